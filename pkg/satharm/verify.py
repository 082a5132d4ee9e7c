# File: satharm/verify.py
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy import special
from tqdm import tqdm

from satharm.config import ScenarioConfig
from satharm.dsp.harmonic_model import OracleGrid, decompose, predict_fourier_coefficient
from satharm.dsp.saturation import hard_clip_complex, sat, sat_integral_eval, saturation_level
from satharm.dsp.special_fn import a2_integral, bessel_j, bessel_j_orders, jacobi_anger, jacobi_anger_order
from satharm.errors import ParityError

# --- Constants ---
ORACLE_SWEEP: Tuple[Tuple[float, float, float], ...] = tuple(
    (1.0, b, c) for b in (2.0, 31.62) for c in (0.3, 0.5, 0.8)
)
ORACLE_ORDER: int = 7
SAT_INTEGRAL_LEVELS: Tuple[float, ...] = (1.0, 16.31)
JACOBI_ANGER_ARGS: Tuple[float, ...] = (0.0, 0.5, 5.0, 15.0, 20.0, 37.3, 50.0)
PROGRESS_BAR_FORMAT: str = "{l_bar} |{bar}| {n_fmt}/{total_fmt} [{rate_fmt}]"


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


# ------------------------------------------------------------
# Suites
# ------------------------------------------------------------
def check_sat_integral(config: ScenarioConfig) -> List[CheckResult]:
    results = []
    for s_a in SAT_INTEGRAL_LEVELS:
        xs = s_a * np.arange(-20, 21) / 10.0
        worst = max(abs(sat_integral_eval(float(x), s_a) - float(sat(x, s_a))) for x in xs)
        results.append(CheckResult("sat-integral", f"integral form vs clip, s_a={s_a:g}", worst, 1e-3))
    return results


def _even_orders(max_order: int) -> List[Tuple[int, int]]:
    return [(p, q) for p in range(-max_order, max_order + 1) for q in range(-max_order, max_order + 1)
            if abs(p) + abs(q) <= max_order and (p + q) % 2 == 0]


def check_parity(config: ScenarioConfig) -> List[CheckResult]:
    scale = max(config.a, config.b)
    order = min(config.max_order, ORACLE_ORDER)
    grid = OracleGrid(config.a, config.b, config.s_a, config.grid_n)
    worst = max(abs(grid.coefficient(p, q)) for p, q in _even_orders(order))

    try:
        a2_integral(2, 2, config.a, config.b, config.s_a)
        rejected = 1.0
    except ParityError:
        rejected = 0.0
    return [
        CheckResult("parity", f"even-order oracle coefficients / max(a,b), |p|+|q|<={order}", worst / scale, 1e-8),
        CheckResult("parity", "A2 rejects even m+n (1 = accepted)", rejected, 0.0),
    ]


def _oracle_scenario(label: str, a: float, b: float, s_a: float, grid_n: int) -> List[CheckResult]:
    scale = max(a, b)
    table = decompose(a, b, s_a, ORACLE_ORDER)
    grid = OracleGrid(a, b, s_a, grid_n)
    worst = 0.0
    worst_imag = 0.0
    for p in range(-ORACLE_ORDER, ORACLE_ORDER + 1):
        for q in range(-ORACLE_ORDER, ORACLE_ORDER + 1):
            if abs(p) + abs(q) > ORACLE_ORDER:
                continue
            oracle = grid.coefficient(p, q)
            worst = max(worst, abs(predict_fourier_coefficient(p, q, table) - oracle))
            worst_imag = max(worst_imag, abs(oracle.imag) / scale)
    return [
        CheckResult("oracle", f"model vs oracle / max(a,b), {label}", worst / scale, 1e-3),
        CheckResult("oracle", f"oracle imaginary part / max(a,b), {label}", worst_imag, 1e-6),
    ]


def check_oracle(config: ScenarioConfig) -> List[CheckResult]:
    scenarios = [("configured scenario", config.a, config.b, config.s_a)]
    scenarios += [(f"a={a:g} b={b:g} C={c:g}", a, b, saturation_level(c, a, b)) for a, b, c in ORACLE_SWEEP]

    results: List[CheckResult] = []
    progress_bar = tqdm(total=len(scenarios), desc="Oracle scenarios", unit=" scenarios", ncols=100,
                        bar_format=PROGRESS_BAR_FORMAT, ascii="░█")
    with progress_bar:
        for label, a, b, s_a in scenarios:
            results += _oracle_scenario(label, a, b, s_a, config.grid_n)
            progress_bar.update(1)

    sigma = -a2_integral(0, 3, 1.0, 31.62, 16.31).value / math.pi
    results.append(CheckResult("oracle", f"sigma = {sigma:.4f} vs -2.17, relative", abs(sigma / -2.17 - 1.0), 5e-3))
    return results


def check_jacobi_anger(config: ScenarioConfig) -> List[CheckResult]:
    phases = np.linspace(-math.pi, math.pi, 37)
    results = []
    for z in JACOBI_ANGER_ARGS:
        order = jacobi_anger_order(z)
        worst = float(np.max(np.abs(jacobi_anger(z, phases, "cos", order) - np.exp(1j * z * np.cos(phases)))))
        results.append(CheckResult("jacobi-anger", f"cos partial sum z={z:g}, M={order}", worst, 1e-9))
    for z in (5.0, 20.0):
        worst = float(np.max(np.abs(jacobi_anger(z, phases, "sin") - jacobi_anger(z, phases - 0.5 * math.pi, "cos"))))
        results.append(CheckResult("jacobi-anger", f"sin variant = cos variant at phi - pi/2, z={z:g}", worst, 1e-12))
    return results


def check_bessel(config: ScenarioConfig) -> List[CheckResult]:
    xs = np.linspace(0.5, 50.0, 199)
    orders = bessel_j_orders(21, xs)
    worst_recurrence = 0.0
    for m in range(1, 21):
        lhs = orders[m - 1] + orders[m + 1]
        rhs = 2.0 * m / xs * orders[m]
        scale = np.maximum.reduce([np.abs(orders[m - 1]), np.abs(orders[m + 1]), np.abs(rhs)])
        worst_recurrence = max(worst_recurrence, float(np.max(np.abs(lhs - rhs) / scale)))

    parseval = bessel_j_orders(60, 7.3)
    parseval_sum = parseval[0] ** 2 + 2.0 * np.sum(parseval[1:] ** 2)

    wide = np.concatenate([np.linspace(0.0, 100.0, 401), np.linspace(100.0, 1e4, 199)])
    worst_reference = max(float(np.max(np.abs(bessel_j(m, wide) - special.jv(m, wide)))) for m in (0, 1, 2, 7, 20, 64))
    return [
        CheckResult("bessel", "recurrence residual, relative, x in [0.5, 50], m <= 20", worst_recurrence, 1e-9),
        CheckResult("bessel", "sum eps_m J_m(7.3)^2 - 1", abs(parseval_sum - 1.0), 1e-12),
        CheckResult("bessel", "J_0 at its first zero", abs(bessel_j(0, 2.404825557695773)), 1e-10),
        CheckResult("bessel", "deviation from scipy.special.jv, x <= 1e4", worst_reference, 1e-12),
    ]


def check_identity(config: ScenarioConfig) -> List[CheckResult]:
    a, b = 1.0, 0.5
    s_a = a + b + 0.5
    rng = np.random.default_rng(config.seed)
    z = (a + b) / math.sqrt(2.0) * (rng.uniform(-1, 1, 4096) + 1j * rng.uniform(-1, 1, 4096))
    clipped = hard_clip_complex(z, s_a)
    changed = 0.0 if np.array_equal(clipped.view(np.uint8), z.view(np.uint8)) else 1.0

    table = decompose(a, b, s_a, ORACLE_ORDER)
    fundamentals = max(abs(table.term(1, 0).combined_coeff - a), abs(table.term(0, 1).combined_coeff - b))
    others = max(abs(e.combined_coeff) for e in table if (e.m, e.n) not in ((1, 0), (0, 1)))

    base = a2_integral(0, 3, 1.0, 31.62, 16.31).value
    scaled = max(abs(a2_integral(0, 3, lam, lam * 31.62, lam * 16.31).value - lam * base) / abs(lam * base)
                 for lam in (0.5, 2.0))
    forward = a2_integral(2, 1, 1.0, 31.62, 16.31).value
    swapped = abs(forward - a2_integral(1, 2, 31.62, 1.0, 16.31).value) / abs(forward)

    return [
        CheckResult("identity", "hard clip below the rails is bit-exact (1 = changed)", changed, 0.0),
        CheckResult("identity", "fundamentals vs a and b / max(a,b), unclipped", fundamentals / max(a, b), 1e-5),
        CheckResult("identity", "other terms / b, unclipped", others / b, 1e-6),
        CheckResult("identity", "A2 homogeneity, relative", scaled, 1e-5),
        CheckResult("identity", "A2 symmetry A2(m,n,a,b) = A2(n,m,b,a), relative", swapped, 1e-5),
    ]


SUITES: Dict[str, Callable[[ScenarioConfig], List[CheckResult]]] = {
    "sat-integral": check_sat_integral,
    "parity": check_parity,
    "oracle": check_oracle,
    "jacobi-anger": check_jacobi_anger,
    "bessel": check_bessel,
    "identity": check_identity,
}


def run_suite(suite: str, config: ScenarioConfig) -> List[CheckResult]:
    names = list(SUITES) if suite == "all" else [suite]
    results: List[CheckResult] = []
    for name in names:
        logging.info(f"Running verification suite '{name}'...")
        results += SUITES[name](config)
    return results


def print_results(results: List[CheckResult]) -> None:
    logging.info("")
    logging.info("━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━")
    logging.info(f"{'Suite':>13} │ {'Value':>10} │ {'Tolerance':>10} │ {'Status':>6} │ Check")
    logging.info("━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━")
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = f"{r.suite:>13} │ {r.value:>10.3e} │ {r.tolerance:>10.3e} │ {status:>6} │ {r.name}"
        if r.passed:
            logging.info(line)
        else:
            logging.error(line)
    logging.info("━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━")
