# File: satharm/dsp/saturation.py
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from scipy import special

from satharm.dsp.signals import ComplexSignal
from satharm.errors import ConvergenceError, InvalidParameterError

# --- Constants ---
GAUSS_ORDER: int = 10
GAUSS_CHECK_ORDER: int = 8
SAT_INTEGRAL_PANELS: int = 32
SAT_INTEGRAL_MAX_HALVINGS: int = 12

SignalOrArray = Union[ComplexSignal, np.ndarray]


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights mapped to [0, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@dataclass(frozen=True)
class SaturationConfig:
    """
    Clip level and the saturation coefficient it corresponds to.

    ``s_a = coefficient * reference_peak``; the reference peak is the unsaturated
    maximum amplitude a + b. Build with :meth:`from_coefficient` or :meth:`from_level`.
    """
    s_a: float
    coefficient: Optional[float] = None
    reference_peak: Optional[float] = None

    def __post_init__(self):
        if not self.s_a > 0:
            raise InvalidParameterError(f"clip level s_a must be > 0, got {self.s_a}")
        if self.coefficient is None:
            return
        if self.reference_peak is None:
            raise InvalidParameterError("a saturation coefficient needs the reference peak it scales")
        if not math.isclose(self.s_a, self.coefficient * self.reference_peak, rel_tol=1e-12):
            raise InvalidParameterError(
                f"clip level s_a={self.s_a} does not equal C·peak = "
                f"{self.coefficient} * {self.reference_peak} = {self.coefficient * self.reference_peak}"
            )

    @classmethod
    def from_coefficient(cls, coefficient: float, reference_peak: float) -> "SaturationConfig":
        _check_coefficient(coefficient)
        if not reference_peak > 0:
            raise InvalidParameterError(f"reference peak must be > 0, got {reference_peak}")
        return cls(s_a=coefficient * reference_peak, coefficient=coefficient, reference_peak=reference_peak)

    @classmethod
    def from_level(cls, s_a: float, reference_peak: Optional[float] = None) -> "SaturationConfig":
        """A coefficient above 1 means the peak is never clipped."""
        if reference_peak is None:
            return cls(s_a=s_a)
        if not reference_peak > 0:
            raise InvalidParameterError(f"reference peak must be > 0, got {reference_peak}")
        return cls(s_a=s_a, coefficient=s_a / reference_peak, reference_peak=reference_peak)

    @property
    def clips_peak(self) -> bool:
        return self.reference_peak is None or self.s_a < self.reference_peak


def _check_coefficient(coefficient: float) -> None:
    if not 0.0 < coefficient <= 1.0:
        raise InvalidParameterError(f"saturation coefficient C must lie in (0, 1], got {coefficient}")


def _check_level(s_a: float) -> None:
    if not s_a > 0:
        raise InvalidParameterError(f"clip level s_a must be > 0, got {s_a}")


def saturation_level(coefficient: float, a: float, b: float) -> float:
    """s_a = C·(a + b)."""
    _check_coefficient(coefficient)
    if a < 0:
        raise InvalidParameterError(f"echo amplitude a must be >= 0, got {a}")
    if not b > 0:
        raise InvalidParameterError(f"interference amplitude b must be > 0, got {b}")
    return coefficient * (a + b)


def sat(x: Union[float, np.ndarray], s_a: float) -> Union[float, np.ndarray]:
    """Real rail clip. |x| = s_a maps onto the rail."""
    _check_level(s_a)
    return np.clip(x, -s_a, s_a)


def _per_component(z: np.ndarray, fn) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    out.real = fn(z.real)
    out.imag = fn(z.imag)
    return out


def csat(z: np.ndarray, s_a: float) -> np.ndarray:
    """I/Q clip on raw arrays: sat(Re z) + j·sat(Im z)."""
    _check_level(s_a)
    return _per_component(z, lambda u: np.clip(u, -s_a, s_a))


def ctanh(z: np.ndarray, s_a: float) -> np.ndarray:
    """Soft saturation s_a·tanh(u/s_a) on each of I and Q."""
    _check_level(s_a)
    return _per_component(z, lambda u: s_a * np.tanh(u / s_a))


def hard_clip_complex(x: SignalOrArray, s_a: float) -> SignalOrArray:
    if isinstance(x, ComplexSignal):
        return x.with_samples(csat(x.samples, s_a))
    return csat(x, s_a)


def tanh_saturate(x: SignalOrArray, s_a: float) -> SignalOrArray:
    if isinstance(x, ComplexSignal):
        return x.with_samples(ctanh(x.samples, s_a))
    return ctanh(x, s_a)


def _cos_over_w2_tail(gamma: float, w: float) -> float:
    # ∫_w^∞ cos(γt)/t² dt = cos(γw)/w − |γ|(π/2 − Si(|γ|w))
    g = abs(gamma)
    si, _ = special.sici(g * w)
    return math.cos(g * w) / w - g * (0.5 * math.pi - si)


def _panel_sums(fn, edges: np.ndarray) -> Tuple[float, float]:
    lo = edges[:-1, None]
    width = np.diff(edges)[:, None]
    sums = []
    for order in (GAUSS_ORDER, GAUSS_CHECK_ORDER):
        nodes, weights = gauss_legendre(order)
        sums.append(float(np.sum(fn(lo + width * nodes) * weights * width)))
    return sums[0], abs(sums[0] - sums[1])


def sat_integral_eval(x: float, s_a: float, tol: float = 1e-6) -> float:
    """
    Evaluates the clip through its integral form
    sat(x) = (2/π)∫₀^∞ sin(s_a w)·sin(x w)/w² dw.

    The head [0, W] is Gauss-panel quadrature, the tail beyond W is exact via the
    sine integral. Panels are halved until two Gauss orders agree within tol.
    """
    _check_level(s_a)
    if not tol > 0:
        raise InvalidParameterError(f"tol must be > 0, got {tol}")
    if not math.isfinite(x):
        raise InvalidParameterError(f"x must be finite, got {x}")
    if x == 0:
        return 0.0

    panel = math.pi / (s_a + abs(x))
    cutoff = SAT_INTEGRAL_PANELS * panel
    tail = 0.5 * (_cos_over_w2_tail(s_a - x, cutoff) - _cos_over_w2_tail(s_a + x, cutoff))

    def integrand(w):
        return s_a * np.sinc(s_a * w / math.pi) * x * np.sinc(x * w / math.pi)

    panels = SAT_INTEGRAL_PANELS
    head, estimate = 0.0, math.inf
    for _ in range(SAT_INTEGRAL_MAX_HALVINGS):
        head, estimate = _panel_sums(integrand, np.linspace(0.0, cutoff, panels + 1))
        if 2.0 / math.pi * estimate < 0.1 * tol:
            return 2.0 / math.pi * (head + tail)
        panels *= 2
    raise ConvergenceError("sat integral did not converge", 2.0 / math.pi * (head + tail), 2.0 / math.pi * estimate)
