# File: satharm/dsp/special_fn.py
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy import special

from satharm.dsp.saturation import GAUSS_CHECK_ORDER, GAUSS_ORDER, gauss_legendre
from satharm.errors import ConvergenceError, InvalidParameterError, ParityError

# --- Constants ---
SERIES_TERMS: int = 30
MILLER_SEED: float = 1e-30
MILLER_RESCALE_AT: float = 1e100
A2_CHUNK_PANELS: int = 512

ArrayOrFloat = Union[float, np.ndarray]


# --- Bessel functions of the first kind ---

def _bessel_series(m: int, x: np.ndarray) -> np.ndarray:
    # Ascending series; all terms shrink monotonically while (x/2)² <= m + 1.
    half = 0.5 * x
    positive = half > 0
    log_half = np.log(np.where(positive, half, 1.0))
    term = np.where(positive, np.exp(m * log_half - math.lgamma(m + 1)), 1.0 if m == 0 else 0.0)
    total = term.copy()
    q = half * half
    for k in range(SERIES_TERMS):
        term = -term * q / ((k + 1) * (k + 1 + m))
        total += term
    return total


def _bessel_miller(top: int, x: np.ndarray) -> np.ndarray:
    """J_0..J_top at x > 0 by downward recurrence, normalised with Σ ε_k J_k² = 1."""
    x_max = float(np.max(x))
    start = int(max(top, x_max) + 30 + 15 * x_max ** (1.0 / 3.0))
    start += start % 2

    out = np.zeros((top + 1, x.size))
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, MILLER_SEED)
    norm = 2.0 * j_cur ** 2
    # J_0 + 2ΣJ_2k = 1 fixes the sign the quadratic normalisation cannot.
    parity_sum = 2.0 * j_cur

    for k in range(start, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        order = k - 1
        weight = 1.0 if order == 0 else 2.0
        if order <= top:
            out[order] = j_prev
        norm += weight * j_prev ** 2
        if order % 2 == 0:
            parity_sum += weight * j_prev

        big = np.abs(j_prev) > MILLER_RESCALE_AT
        if big.any():
            scale = 1.0 / MILLER_RESCALE_AT
            j_prev[big] *= scale
            j_cur[big] *= scale
            out[:, big] *= scale
            norm[big] *= scale * scale
            parity_sum[big] *= scale
        j_next, j_cur = j_cur, j_prev

    return out * (np.sign(parity_sum) / np.sqrt(norm))


def bessel_j_orders(top: int, x: ArrayOrFloat) -> np.ndarray:
    """
    J_0(x) .. J_top(x) stacked along the first axis.

    Orders with (x/2)² <= m + 1 come from the ascending series, the rest from
    Miller's downward recurrence.
    """
    if top < 0:
        raise InvalidParameterError(f"order must be >= 0, got {top}")
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InvalidParameterError("Bessel argument must be finite")
    shape = x.shape
    ax = np.abs(x).reshape(-1)

    out = np.zeros((top + 1, ax.size))
    q = (0.5 * ax) ** 2
    recur = q > 1.0
    if recur.any():
        out[:, recur] = _bessel_miller(top, ax[recur])
    for m in range(top + 1):
        use_series = q <= m + 1
        if use_series.any():
            out[m, use_series] = _bessel_series(m, ax[use_series])

    negative = (x.reshape(-1) < 0)
    if negative.any():
        odd = np.arange(top + 1) % 2 == 1
        out[np.ix_(odd, negative)] *= -1.0
    return out.reshape((top + 1,) + shape)


def bessel_j(m: int, x: ArrayOrFloat) -> ArrayOrFloat:
    """Bessel function of the first kind, integer order m >= 0, real x."""
    if m < 0 or int(m) != m:
        raise InvalidParameterError(f"order must be a non-negative integer, got {m}")
    value = bessel_j_orders(int(m), x)[int(m)]
    return float(value) if np.ndim(value) == 0 else value


# --- Jacobi–Anger expansion ---

def jacobi_anger_order(z: float, tol: float = 1e-9) -> int:
    """Truncation order for the Jacobi–Anger partial sum at argument z."""
    if not tol > 0:
        raise InvalidParameterError(f"tol must be > 0, got {tol}")
    az = abs(z)
    # Past the turning point J_m(z) decays like an Airy tail in (m - z)/z^(1/3).
    extra = 10.0 * max(1.0, -math.log10(tol) / 9.0)
    return int(max(az + 20.0, math.ceil(az + extra * az ** (1.0 / 3.0)) + 10))


def jacobi_anger(z: float, phase: ArrayOrFloat, variant: str = "cos", order: Optional[int] = None):
    """
    Partial sum of the Jacobi–Anger expansion up to ``order``.

    cos: exp(jz·cos φ) = Σ α_m j^m J_m(z) cos(mφ)
    sin: exp(jz·sin φ) = Σ α_m (−j)^m J_m(z) cos(m(φ + π/2))
    """
    if variant not in ("cos", "sin"):
        raise InvalidParameterError(f"variant must be 'cos' or 'sin', got {variant!r}")
    if order is None:
        order = jacobi_anger_order(z)
    if order < 0:
        raise InvalidParameterError(f"truncation order must be >= 0, got {order}")

    phase = np.asarray(phase, dtype=np.float64)
    m = np.arange(order + 1)
    alpha = np.where(m == 0, 1.0, 2.0)
    bessel = bessel_j_orders(order, float(z))
    if variant == "cos":
        weights = alpha * (1j ** m) * bessel
        angles = np.multiply.outer(phase, m)
    else:
        weights = alpha * ((-1j) ** m) * bessel
        angles = np.multiply.outer(phase + 0.5 * np.pi, m)
    total = np.cos(angles) @ weights
    return complex(total) if total.ndim == 0 else total


# --- The A₂ integral ---

@dataclass(frozen=True)
class QuadratureSettings:
    """
    Tolerances for the A₂ half-line quadrature.

    ``abs_tol`` defaults to 1e-9·s_a when left unset. ``tail_cutoff_W`` fixes the
    truncation point; by default it is grown panel chunk by panel chunk until the
    tail bound and the Gauss error estimate meet the tolerance.
    """
    rel_tol: float = 1e-6
    abs_tol: Optional[float] = None
    max_panels: int = 200_000
    tail_cutoff_W: Optional[float] = None

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParameterError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.abs_tol is not None and not self.abs_tol > 0:
            raise InvalidParameterError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_panels < 1:
            raise InvalidParameterError(f"max_panels must be >= 1, got {self.max_panels}")
        if self.tail_cutoff_W is not None and not self.tail_cutoff_W > 0:
            raise InvalidParameterError(f"tail_cutoff_W must be > 0, got {self.tail_cutoff_W}")

    def absolute(self, s_a: float) -> float:
        return self.abs_tol if self.abs_tol is not None else 1e-9 * s_a

    def target(self, s_a: float, value: float) -> float:
        return max(self.absolute(s_a), self.rel_tol * abs(value))


class A2Result(NamedTuple):
    value: float
    error: float
    cutoff: float
    panels: int


def _bessel_envelope(order: int, x: float) -> float:
    if x <= 0:
        return 1.0
    return min(1.0, math.sqrt(2.0 / (math.pi * x)) * (1.0 + abs(4 * order * order - 1) / (8.0 * x)))


def a2_tail_bound(m: int, n: int, a: float, b: float, cutoff: float) -> float:
    """Bound on 2∫_W^∞ |sin(s_a w)/w² J_m(aw) J_n(bw)| dw from the Bessel envelopes."""
    envelopes = (_bessel_envelope(m, a * cutoff), _bessel_envelope(n, b * cutoff))
    # Past W an uncapped envelope shrinks at least like (W/w)^½; a capped one only stays <= 1.
    decay = 0.5 * sum(1 for env in envelopes if env < 1.0)
    # 2∫_W^∞ (W/w)^k / w² dw = 2 / ((1 + k)·W)
    return 2.0 * envelopes[0] * envelopes[1] / ((1.0 + decay) * cutoff)


def _bessel_over_w(order: int, amplitude: float, w: np.ndarray) -> np.ndarray:
    # J_1(x)/x = (J_0(x) + J_2(x))/2 keeps the w → 0 limit free of 0/0.
    if order == 1:
        x = amplitude * w
        return 0.5 * amplitude * (special.jv(0, x) + special.jv(2, x))
    return special.jv(order, amplitude * w) / w


def _a2_integrand(m: int, n: int, a: float, b: float, s_a: float):
    def integrand(w: np.ndarray) -> np.ndarray:
        sin_over_w = s_a * np.sinc(s_a * w / math.pi)
        if m == 1:
            product = _bessel_over_w(1, a, w) * special.jv(n, b * w)
        elif n == 1:
            product = special.jv(m, a * w) * _bessel_over_w(1, b, w)
        else:
            product = special.jv(m, a * w) * special.jv(n, b * w) / w
        return sin_over_w * product

    return integrand


def _check_orders(m: int, n: int) -> None:
    if m < 0 or n < 0:
        raise InvalidParameterError(f"orders must be non-negative, got (m={m}, n={n})")
    if (m + n) % 2 == 0:
        raise ParityError(m, n)


def a2_integral(m: int, n: int, a: float, b: float, s_a: float,
                q: Optional[QuadratureSettings] = None) -> A2Result:
    """
    A₂(m, n) = ∫ sin(s_a w)/w² · J_m(aw) J_n(bw) dw over the real line,
    evaluated as twice the half-line integral.

    Panels of width π/(s_a + a + b) are integrated with a 10-point Gauss rule and
    checked against an 8-point one. Raises :class:`ConvergenceError` when the
    combined estimate cannot meet the tolerance within ``q.max_panels`` panels.
    """
    q = q or QuadratureSettings()
    _check_orders(m, n)
    if a < 0:
        raise InvalidParameterError(f"a must be >= 0, got {a}")
    if not b > 0:
        raise InvalidParameterError(f"b must be > 0, got {b}")
    if not s_a > 0:
        raise InvalidParameterError(f"s_a must be > 0, got {s_a}")
    if a == 0 and m > 0:
        return A2Result(0.0, 0.0, 0.0, 0)

    width = math.pi / (s_a + a + b)
    integrand = _a2_integrand(m, n, a, b, s_a)
    nodes10, weights10 = gauss_legendre(GAUSS_ORDER)
    nodes_check, weights_check = gauss_legendre(GAUSS_CHECK_ORDER)

    fixed_panels = None
    if q.tail_cutoff_W is not None:
        fixed_panels = max(1, math.ceil(q.tail_cutoff_W / width))
        width = q.tail_cutoff_W / fixed_panels
        if fixed_panels > q.max_panels:
            raise InvalidParameterError(
                f"tail_cutoff_W={q.tail_cutoff_W} needs {fixed_panels} panels, above max_panels={q.max_panels}")
    panel_limit = fixed_panels or q.max_panels

    value = 0.0
    quad_err = 0.0
    done = 0
    estimate = math.inf
    while done < panel_limit:
        count = min(A2_CHUNK_PANELS, panel_limit - done)
        lo = (done + np.arange(count))[:, None] * width
        g10 = (integrand(lo + width * nodes10) * weights10).sum(axis=1) * width
        g_check = (integrand(lo + width * nodes_check) * weights_check).sum(axis=1) * width
        value += 2.0 * float(g10.sum())
        quad_err += 2.0 * float(np.abs(g10 - g_check).sum())
        done += count

        cutoff = done * width
        estimate = quad_err + a2_tail_bound(m, n, a, b, cutoff)
        if fixed_panels is None and estimate <= q.target(s_a, value):
            return A2Result(value, estimate, cutoff, done)

    if estimate <= q.target(s_a, value):
        return A2Result(value, estimate, done * width, done)
    raise ConvergenceError(f"A2({m},{n}) did not converge within {panel_limit} panels", value, estimate)
