import math

import numpy as np
import pytest
from scipy import special

from satharm.dsp.special_fn import (
    QuadratureSettings, a2_integral, a2_tail_bound, bessel_j, bessel_j_orders, jacobi_anger, jacobi_anger_order,
)
from satharm.errors import ConvergenceError, InvalidParameterError, ParityError

A, B, S_A = 1.0, 31.62, 16.31


# --- Bessel ---

def test_bessel_at_zero():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0


def test_bessel_first_zero():
    assert abs(bessel_j(0, 2.404825557695773)) < 1e-10


def test_bessel_parseval():
    orders = bessel_j_orders(60, 7.3)
    assert orders[0] ** 2 + 2 * np.sum(orders[1:] ** 2) == pytest.approx(1.0, abs=1e-12)


def test_bessel_recurrence():
    x = np.linspace(0.5, 50.0, 100)
    orders = bessel_j_orders(21, x)
    for m in range(1, 21):
        np.testing.assert_allclose(orders[m - 1] + orders[m + 1], 2 * m / x * orders[m], rtol=1e-9, atol=1e-13)


@pytest.mark.parametrize("m", [0, 1, 3, 7, 20, 64])
def test_bessel_matches_scipy(m):
    x = np.concatenate([np.linspace(0.0, 100.0, 401), np.linspace(100.0, 1e4, 51)])
    np.testing.assert_allclose(bessel_j(m, x), special.jv(m, x), rtol=0, atol=1e-12)


def test_bessel_negative_argument():
    assert bessel_j(1, -2.0) == pytest.approx(-bessel_j(1, 2.0))
    assert bessel_j(2, -2.0) == pytest.approx(bessel_j(2, 2.0))


def test_bessel_rejects_bad_order():
    with pytest.raises(InvalidParameterError):
        bessel_j(-1, 1.0)
    with pytest.raises(InvalidParameterError):
        bessel_j(0, math.nan)


# --- Jacobi–Anger ---

def test_jacobi_anger_partial_sum():
    assert jacobi_anger(5.0, 0.7, order=40) == pytest.approx(np.exp(5j * math.cos(0.7)), abs=1e-10)
    assert jacobi_anger(0.0, 1.3) == pytest.approx(1.0)


def test_jacobi_anger_sin_variant():
    phases = np.linspace(-math.pi, math.pi, 25)
    np.testing.assert_allclose(jacobi_anger(5.0, phases, "sin"), np.exp(5j * np.sin(phases)), rtol=0, atol=1e-10)


@pytest.mark.parametrize("z", [0.5, 5.0, 20.0, 37.3, 50.0])
def test_jacobi_anger_default_order(z):
    phases = np.linspace(-math.pi, math.pi, 37)
    order = jacobi_anger_order(z)
    assert order >= z + 20
    np.testing.assert_allclose(jacobi_anger(z, phases), np.exp(1j * z * np.cos(phases)), rtol=0, atol=1e-9)


def test_jacobi_anger_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        jacobi_anger(1.0, 0.0, "tan")
    with pytest.raises(InvalidParameterError):
        jacobi_anger(1.0, 0.0, order=-1)


# --- A2 ---

def test_a2_third_interference_harmonic():
    result = a2_integral(0, 3, A, B, S_A)
    sigma = -result.value / math.pi
    assert sigma == pytest.approx(-2.17, rel=5e-3)
    assert result.error <= QuadratureSettings().target(S_A, result.value)


def test_a2_unclipped_fundamental():
    result = a2_integral(1, 0, 1.0, 0.5, 2.0)
    assert result.value == pytest.approx(math.pi / 2, rel=1e-5)


def test_a2_parity():
    with pytest.raises(ParityError):
        a2_integral(2, 2, A, B, S_A)
    with pytest.raises(InvalidParameterError):
        a2_integral(-1, 2, A, B, S_A)


def test_a2_homogeneity():
    base = a2_integral(0, 3, A, B, S_A).value
    for lam in (0.5, 2.0):
        assert a2_integral(0, 3, lam * A, lam * B, lam * S_A).value == pytest.approx(lam * base, rel=1e-5)


def test_a2_symmetry():
    forward = a2_integral(2, 1, A, B, S_A).value
    assert a2_integral(1, 2, B, A, S_A).value == pytest.approx(forward, rel=1e-5)


def test_a2_vanishes_without_echo():
    assert a2_integral(1, 2, 0.0, B, S_A).value == 0.0


def test_a2_reports_non_convergence():
    with pytest.raises(ConvergenceError) as info:
        a2_integral(0, 3, A, B, S_A, QuadratureSettings(max_panels=1))
    assert math.isfinite(info.value.value)
    assert info.value.estimate > 0


def test_a2_fixed_cutoff():
    result = a2_integral(0, 3, A, B, S_A, QuadratureSettings(tail_cutoff_W=2000.0))
    assert result.cutoff == pytest.approx(2000.0)
    assert result.value == pytest.approx(a2_integral(0, 3, A, B, S_A).value, rel=1e-5)


def test_a2_tail_bound_shrinks():
    assert a2_tail_bound(0, 3, A, B, 1000.0) < a2_tail_bound(0, 3, A, B, 100.0)


def _envelope(order, x):
    return math.sqrt(2.0 / (math.pi * x)) * (1.0 + abs(4 * order * order - 1) / (8.0 * x))


def test_a2_tail_bound_follows_the_envelope_decay():
    w = 1000.0
    # Both envelopes decay like w^-1/2, so the tail integrand falls like w^-3.
    both = _envelope(0, A * w) * _envelope(3, B * w)
    assert a2_tail_bound(0, 3, A, B, w) == pytest.approx(both / w, rel=1e-12)
    # With a = 0, J_0(0) = 1 never decays and only the interference envelope helps.
    single = _envelope(3, B * w)
    assert a2_tail_bound(0, 3, 0.0, B, w) == pytest.approx(2.0 * single / (1.5 * w), rel=1e-12)


def test_quadrature_settings_validation():
    with pytest.raises(InvalidParameterError):
        QuadratureSettings(rel_tol=0.0)
    with pytest.raises(InvalidParameterError):
        QuadratureSettings(max_panels=0)
    assert QuadratureSettings().absolute(S_A) == pytest.approx(1e-9 * S_A)
