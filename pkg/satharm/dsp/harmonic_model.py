# File: satharm/dsp/harmonic_model.py
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from satharm.dsp.saturation import csat, ctanh
from satharm.dsp.signals import ComplexSignal, PhaseTrack
from satharm.dsp.special_fn import A2Result, QuadratureSettings, a2_integral
from satharm.errors import CapabilityError, ConvergenceError, InvalidParameterError, ParityError, ShapeMismatchError
from satharm.utils import resolve_workers

# --- Constants ---
DEFAULT_MAX_ORDER: int = 7
DEFAULT_GRID_N: int = 1024
SIGNIFICANCE_RATIO: float = 1e-6
TANH_ORDERS: Tuple[int, ...] = (1, 3, 5)
OPERATORS: Tuple[str, ...] = ("hard", "tanh")
PROGRESS_BAR_FORMAT: str = "{l_bar} |{bar}| {n_fmt}/{total_fmt} [{rate_fmt}]"

KIND_INTERFERENCE_FUNDAMENTAL = "interference fundamental wave"
KIND_INTERFERENCE_HARMONIC = "interference higher-order harmonic"
KIND_TARGET_FUNDAMENTAL = "target fundamental harmonic"
KIND_TARGET_HARMONIC = "target higher-order harmonic"
KIND_CROSS_TERM = "cross-term harmonic"

CSV_COLUMNS: Tuple[str, ...] = (
    "m", "n", "beta", "combined_coeff", "eps_sum", "eps_diff", "kind",
    "a2_value", "a2_error_estimate", "power_proxy", "significant", "note",
)

Components = Dict[Tuple[int, int], float]


def alpha(m: int) -> float:
    return 1.0 if m == 0 else 2.0


def _sign_power(k: int) -> int:
    return -1 if k % 2 else 1


def classify(m: int, n: int) -> str:
    if m == 0:
        return KIND_INTERFERENCE_FUNDAMENTAL if n == 1 else KIND_INTERFERENCE_HARMONIC
    if n == 0:
        return KIND_TARGET_FUNDAMENTAL if m == 1 else KIND_TARGET_HARMONIC
    return KIND_CROSS_TERM


def odd_pairs(max_order: int) -> List[Tuple[int, int]]:
    """Every (m, n) with m + n odd and m + n <= max_order, ordered by (m + n, m)."""
    if max_order < 1:
        raise InvalidParameterError(f"max_order must be >= 1, got {max_order}")
    return [(m, total - m) for total in range(1, max_order + 1, 2) for m in range(total + 1)]


@dataclass(frozen=True)
class HarmonicTerm:
    """
    One (m, n) entry of the saturated-output expansion:
    β·{exp[eps_sum·j(mφ + nξ)] + exp[eps_diff·j(mφ − nξ)]}.
    """
    m: int
    n: int
    beta: float
    eps_sum: int
    eps_diff: int
    kind: str
    a2_value: float = math.nan
    a2_error: float = math.nan
    note: str = ""

    @property
    def single_signal(self) -> bool:
        return self.m == 0 or self.n == 0

    @property
    def combined_coeff(self) -> float:
        """Weight per exponential; both branches coincide for single-signal terms."""
        return 2.0 * self.beta if self.single_signal else self.beta

    @property
    def power_proxy(self) -> float:
        return self.beta ** 2

    @property
    def converged(self) -> bool:
        return not self.note

    def components(self) -> Components:
        """(p, q) -> coefficient of exp(j(pφ + qξ))."""
        out: Components = {}
        for p, q in ((self.eps_sum * self.m, self.eps_sum * self.n),
                     (self.eps_diff * self.m, -self.eps_diff * self.n)):
            out[(p, q)] = out.get((p, q), 0.0) + self.beta
        return out


def term_from_a2(m: int, n: int, a2_value: float, a2_error: float = math.nan, note: str = "") -> HarmonicTerm:
    if (m + n) % 2 == 0:
        raise ParityError(m, n)
    beta = -alpha(m) * alpha(n) * a2_value * _sign_power((m + n + 1) // 2) / (2.0 * math.pi)
    return HarmonicTerm(
        m=m,
        n=n,
        beta=beta,
        eps_sum=_sign_power((m + n + 3) // 2),
        eps_diff=_sign_power((m - n + 3) // 2),
        kind=classify(m, n),
        a2_value=a2_value,
        a2_error=a2_error,
        note=note,
    )


def harmonic_term(m: int, n: int, a: float, b: float, s_a: float,
                  q: Optional[QuadratureSettings] = None) -> HarmonicTerm:
    result: A2Result = a2_integral(m, n, a, b, s_a, q)
    return term_from_a2(m, n, result.value, result.error)


@dataclass(frozen=True, eq=False)
class DecompositionTable:
    entries: Tuple[HarmonicTerm, ...]
    a: float
    b: float
    s_a: float
    max_order: int

    def __iter__(self) -> Iterator[HarmonicTerm]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def term(self, m: int, n: int) -> HarmonicTerm:
        for entry in self.entries:
            if entry.m == m and entry.n == n:
                return entry
        raise KeyError((m, n))

    @property
    def significance_threshold(self) -> float:
        return SIGNIFICANCE_RATIO * max(self.a, self.b)

    def is_significant(self, entry: HarmonicTerm) -> bool:
        return abs(entry.combined_coeff) > self.significance_threshold

    def components(self) -> Components:
        out: Components = {}
        for entry in self.entries:
            for key, value in entry.components().items():
                out[key] = out.get(key, 0.0) + value
        return out

    def power_sum(self) -> float:
        """Σ |coefficient|² over every modeled exponential."""
        return float(sum(c * c for c in self.components().values()))

    @property
    def unconverged(self) -> List[HarmonicTerm]:
        return [entry for entry in self.entries if not entry.converged]

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for e in self.entries:
                writer.writerow([
                    e.m, e.n, f"{e.beta:.17g}", f"{e.combined_coeff:.17g}", e.eps_sum, e.eps_diff, e.kind,
                    f"{e.a2_value:.17g}", f"{e.a2_error:.17g}", f"{e.power_proxy:.17g}",
                    int(self.is_significant(e)), e.note,
                ])


def decompose(a: float, b: float, s_a: float, max_order: int = DEFAULT_MAX_ORDER,
              q: Optional[QuadratureSettings] = None, workers: Optional[int] = None) -> DecompositionTable:
    """
    Evaluates every odd-parity term up to ``max_order`` in a thread pool.

    A term whose quadrature fails to converge keeps the achieved value and carries
    a note instead of aborting the table.
    """
    pairs = odd_pairs(max_order)
    num_workers = workers or resolve_workers()
    logging.info(f"Decomposing {len(pairs)} terms (a={a:g}, b={b:g}, s_a={s_a:g}) with {num_workers} worker(s).")

    def evaluate(index: int, m: int, n: int) -> Tuple[int, HarmonicTerm]:
        try:
            return index, harmonic_term(m, n, a, b, s_a, q)
        except ConvergenceError as e:
            logging.warning(f"A2({m},{n}) did not converge; keeping value {e.value:.6g} (estimate {e.estimate:.3e}).")
            return index, term_from_a2(m, n, e.value, e.estimate, note=f"not converged: error estimate {e.estimate:.3e}")

    results: Dict[int, HarmonicTerm] = {}
    with ThreadPoolExecutor(max_workers=num_workers) as executor:
        futures = [executor.submit(evaluate, i, m, n) for i, (m, n) in enumerate(pairs)]
        progress_bar = tqdm(
            total=len(pairs),
            desc="A2 integrals",
            unit=" terms",
            ncols=100,
            bar_format=PROGRESS_BAR_FORMAT,
            ascii="░█",
        )
        with progress_bar:
            for future in as_completed(futures):
                index, entry = future.result()
                results[index] = entry
                progress_bar.update(1)

    entries = tuple(results[i] for i in range(len(pairs)))
    return DecompositionTable(entries=entries, a=a, b=b, s_a=s_a, max_order=max_order)


def predict_fourier_coefficient(p: int, q_idx: int, table: DecompositionTable) -> complex:
    """Model coefficient of exp(j(pφ + q_idx·ξ)) in the two-phase series of the saturated signal."""
    if abs(p) + abs(q_idx) > table.max_order:
        raise InvalidParameterError(f"|p| + |q| = {abs(p) + abs(q_idx)} exceeds the table order {table.max_order}")
    return complex(table.components().get((p, q_idx), 0.0))


def reconstruct_harmonic(term: HarmonicTerm, phi: PhaseTrack, xi: PhaseTrack) -> ComplexSignal:
    """Time series of one harmonic term from the echo phase φ(t) and interference phase ξ(t)."""
    if len(phi) != len(xi):
        raise ShapeMismatchError(f"phase tracks differ in length: {len(phi)} vs {len(xi)}")
    if not math.isclose(phi.sample_rate, xi.sample_rate, rel_tol=1e-12):
        raise ShapeMismatchError(f"phase tracks differ in sample rate: {phi.sample_rate} vs {xi.sample_rate}")

    if term.m == 0:
        support = xi.support
    elif term.n == 0:
        support = phi.support
    else:
        support = phi.support & xi.support

    samples = np.zeros(len(phi), dtype=np.complex128)
    for (p, q), coeff in term.components().items():
        samples += coeff * np.exp(1j * (p * phi.phase + q * xi.phase))
    return ComplexSignal(np.where(support, samples, 0.0), phi.sample_rate, phi.t0)


# --- tanh series model ---

class TanhCoefficients(NamedTuple):
    c1: float
    c3: float
    c5: float


def tanh_harmonic_coeffs(b: float, coefficient: float) -> TanhCoefficients:
    """
    First interference harmonics of the tanh saturation series:
    c1 on e^{jξ}, c3 on e^{−j3ξ}, c5 on e^{j5ξ}.
    """
    if not b > 0:
        raise InvalidParameterError(f"b must be > 0, got {b}")
    if not coefficient > 0:
        raise InvalidParameterError(f"C must be > 0, got {coefficient}")
    c2 = coefficient ** 2
    c4 = coefficient ** 4
    return TanhCoefficients(
        c1=b - b / (4.0 * c2) + b / (12.0 * c4),
        c3=-(b / (12.0 * c2) - b / (24.0 * c4)),
        c5=b / (120.0 * c4),
    )


def tanh_term(n: int, b: float, coefficient: float) -> HarmonicTerm:
    """A tanh-series coefficient packaged as a single-signal term."""
    if n not in TANH_ORDERS:
        raise CapabilityError(f"the tanh model only provides interference orders {TANH_ORDERS}, not (0,{n})")
    coeffs = tanh_harmonic_coeffs(b, coefficient)
    value = {1: coeffs.c1, 3: coeffs.c3, 5: coeffs.c5}[n]
    base = term_from_a2(0, n, 0.0)
    return HarmonicTerm(
        m=0,
        n=n,
        beta=0.5 * value,
        eps_sum=base.eps_sum,
        eps_diff=base.eps_diff,
        kind=base.kind,
        note="tanh series",
    )


# --- Brute-force phase average ---

def _min_grid(p: int, q_idx: int) -> int:
    return 4 * (abs(p) + abs(q_idx) + 1)


@dataclass(eq=False)
class OracleGrid:
    """
    Two-phase Fourier coefficients of op(a·e^{jφ} + b·e^{jξ}) from one uniform
    grid_n × grid_n phase grid; coefficients come from a single 2-D FFT.
    """
    a: float
    b: float
    s_a: float
    grid_n: int = DEFAULT_GRID_N
    operator: str = "hard"
    _coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.operator not in OPERATORS:
            raise InvalidParameterError(f"operator must be one of {OPERATORS}, got {self.operator!r}")
        if self.grid_n < 4:
            raise InvalidParameterError(f"grid_n must be >= 4, got {self.grid_n}")
        angles = 2.0 * np.pi * np.arange(self.grid_n) / self.grid_n
        z = self.a * np.exp(1j * angles)[:, None] + self.b * np.exp(1j * angles)[None, :]
        saturated = csat(z, self.s_a) if self.operator == "hard" else ctanh(z, self.s_a)
        self._coeffs = np.fft.fft2(saturated) / self.grid_n ** 2

    def coefficient(self, p: int, q_idx: int) -> complex:
        if self.grid_n < _min_grid(p, q_idx):
            raise InvalidParameterError(
                f"grid_n={self.grid_n} cannot resolve order ({p},{q_idx}); need >= {_min_grid(p, q_idx)}")
        return complex(self._coeffs[p % self.grid_n, q_idx % self.grid_n])


def phase_average_oracle(p: int, q_idx: int, a: float, b: float, s_a: float,
                         grid_n: int = DEFAULT_GRID_N, operator: str = "hard") -> complex:
    if grid_n < _min_grid(p, q_idx):
        raise InvalidParameterError(f"grid_n={grid_n} cannot resolve order ({p},{q_idx}); need >= {_min_grid(p, q_idx)}")
    return OracleGrid(a, b, s_a, grid_n, operator).coefficient(p, q_idx)
