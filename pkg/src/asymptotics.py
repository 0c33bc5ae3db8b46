"""N-copy scaling, error exponents and the Hoeffding/Stein checks.

Everything is in nats.  Exponents come from the OAQCB:

    gamma_alpha(p) = p L - ln Q_p,   gamma_beta(p) = -(1-p) L - ln Q_p,   L = Q_p'/Q_p
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from .analytic_bounds import oaqcb_point
    from .dv_states import QsEvaluator, RelativeEntropies
    from .errors import ParameterOutOfRange, RateOutOfRange
    from .optimize import golden_section_min, scan_then_maximize
except ImportError:
    from analytic_bounds import oaqcb_point
    from dv_states import QsEvaluator, RelativeEntropies
    from errors import ParameterOutOfRange, RateOutOfRange
    from optimize import golden_section_min, scan_then_maximize

logger = logging.getLogger(__name__)

# --- Configuration ---
HOEFFDING_SCAN = 2048
HOEFFDING_TOL = 1e-8
S_CEILING = 1.0 - 1e-6
FLAT_TOL = 1e-14
SATURATION_TOL = 1e-6


# --- Types ---

@dataclass(frozen=True)
class ExponentPair:
    gamma_alpha: float
    gamma_beta: float


@dataclass(frozen=True)
class HoeffdingResult:
    value: float
    s_max: float


@dataclass(frozen=True)
class ChernoffResult:
    s_star: float
    q_star: float
    exponent: float


@dataclass
class SaturationReport:
    rows: List[Dict[str, float]] = field(default_factory=list)
    worst_deviation: float = 0.0
    tol: float = SATURATION_TOL
    trivial: bool = False

    @property
    def passed(self) -> bool:
        return self.trivial or self.worst_deviation <= self.tol


@dataclass
class LogConvexityReport:
    s_points: int
    min_second_difference: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.min_second_difference >= -self.tol


def _check_interior(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ParameterOutOfRange(f"p must lie strictly inside (0, 1), got {p}")


def _check_copies(n: int) -> None:
    if n < 1:
        raise ParameterOutOfRange(f"number of copies must be >= 1, got {n}")


def _is_flat(q: QsEvaluator) -> bool:
    ent = q.stein_entropies()
    return ent.s12 <= FLAT_TOL and ent.s21 <= FLAT_TOL


# --- N copies ---

def ncopy_fidelity(F1: float, n: int) -> float:
    if not 0.0 <= F1 <= 1.0:
        raise ParameterOutOfRange(f"fidelity must lie in [0, 1], got {F1}")
    _check_copies(n)
    return F1 ** n


def ncopy_qs(q1: float, n: int) -> float:
    if not 0.0 <= q1 <= 1.0 + 1e-12:
        raise ParameterOutOfRange(f"Q_s must lie in [0, 1], got {q1}")
    _check_copies(n)
    return min(q1, 1.0) ** n


def oaqcb_ncopy_point(q: QsEvaluator, p: float, n: int) -> Tuple[float, float]:
    """OAQCB of n copies from the single-copy point: alpha^n/(1-p)^(n-1), beta^n/p^(n-1)."""
    _check_interior(p)
    _check_copies(n)
    alpha, beta = oaqcb_point(q, p)
    return alpha ** n / (1.0 - p) ** (n - 1), beta ** n / p ** (n - 1)


# --- Exponents ---

def error_exponents(q: QsEvaluator, p: float) -> ExponentPair:
    _check_interior(p)
    value = q.value(p)
    log_deriv = q.derivative(p) / value
    log_q = math.log(value)
    return ExponentPair(
        gamma_alpha=max(p * log_deriv - log_q, 0.0),
        gamma_beta=max(-(1.0 - p) * log_deriv - log_q, 0.0),
    )


def exponent_curve(q: QsEvaluator, p_grid: Sequence[float]) -> List[Tuple[float, ExponentPair]]:
    return [(float(p), error_exponents(q, float(p))) for p in p_grid]


def stein_limits(q: QsEvaluator) -> RelativeEntropies:
    """(S12, S21) from the endpoint derivatives of Q_s."""
    return q.stein_entropies()


def chernoff_exponent(q: QsEvaluator) -> ChernoffResult:
    """Symmetric error exponent -ln min_s Q_s."""
    if _is_flat(q):
        return ChernoffResult(s_star=0.5, q_star=1.0, exponent=0.0)
    s_star, q_star = golden_section_min(q.value, 0.0, 1.0, 1e-10)
    for edge in (0.0, 1.0):
        q_edge = q.value(edge)
        if q_edge < q_star:
            s_star, q_star = edge, q_edge
    return ChernoffResult(s_star=s_star, q_star=q_star, exponent=max(-math.log(q_star), 0.0))


# --- Hoeffding ---

def _bmax(q: QsEvaluator, r: float, scan_points: int) -> HoeffdingResult:
    def objective(s: float) -> float:
        return (-s * r - math.log(q.value(s))) / (1.0 - s)

    s_max, value = scan_then_maximize(objective, 0.0, S_CEILING, scan_points, HOEFFDING_TOL)
    if s_max >= S_CEILING - 1e-12:
        logger.debug("Hoeffding objective peaks at the s -> 1 boundary (r=%.6g)", r)
    return HoeffdingResult(value=value, s_max=s_max)


def hoeffding_bmax(q: QsEvaluator, r: float, scan_points: int = HOEFFDING_SCAN) -> HoeffdingResult:
    """b_max(r) = sup over s in [0, 1) of (-s r - ln Q_s)/(1 - s).

    Identical states (Q_s identically 1) give b_max = 0 at s = 0 for any r >= 0.

    Raises:
        RateOutOfRange: r outside (0, S(rho1||rho2)).
    """
    if _is_flat(q):
        if r < 0:
            raise RateOutOfRange(f"rate must be >= 0, got {r}")
        return HoeffdingResult(value=0.0, s_max=0.0)
    s12 = q.stein_entropies().s12
    if not 0.0 < r < s12:
        raise RateOutOfRange(f"rate must lie in (0, {s12:.6g}), got {r}")
    return _bmax(q, r, scan_points)


def check_hoeffding_saturation(
    q: QsEvaluator,
    p_grid: Sequence[float],
    tol: float = SATURATION_TOL,
    scan_points: int = HOEFFDING_SCAN,
) -> SaturationReport:
    """Compare b_max(gamma_beta(p)) with gamma_alpha(p) over a p-grid."""
    if _is_flat(q):
        logger.info("Q_s is flat; all exponents vanish and saturation holds trivially")
        return SaturationReport(tol=tol, trivial=True)
    report = SaturationReport(tol=tol)
    for p in p_grid:
        pair = error_exponents(q, float(p))
        best = _bmax(q, pair.gamma_beta, scan_points)
        deviation = abs(best.value - pair.gamma_alpha)
        report.rows.append({
            "p": float(p),
            "gamma_alpha": pair.gamma_alpha,
            "gamma_beta": pair.gamma_beta,
            "b_max": best.value,
            "s_max": best.s_max,
            "deviation": deviation,
        })
        report.worst_deviation = max(report.worst_deviation, deviation)
    logger.info("Hoeffding saturation: worst deviation %.3e over %d points",
                report.worst_deviation, len(report.rows))
    return report


# --- Log-convexity ---

def logconvexity_check(q: QsEvaluator, s_points: int = 99, tol: float = 1e-9) -> LogConvexityReport:
    """Second divided differences of ln Q_s on the interior grid k/(s_points+1)."""
    if s_points < 3:
        raise ParameterOutOfRange(f"need at least 3 points, got {s_points}")
    s = np.arange(1, s_points + 1) / (s_points + 1.0)
    h = 1.0 / (s_points + 1.0)
    log_q = np.log([q.value(float(x)) for x in s])
    second = (log_q[2:] - 2.0 * log_q[1:-1] + log_q[:-2]) / (h * h)
    return LogConvexityReport(s_points=s_points, min_second_difference=float(second.min()), tol=tol)


def monotonicity_violation(rows: Sequence[Tuple[float, ExponentPair]]) -> Optional[float]:
    """Largest increase of gamma_beta or decrease of gamma_alpha along increasing p."""
    if len(rows) < 2:
        return None
    ordered = sorted(rows, key=lambda row: row[0])
    ga = np.array([pair.gamma_alpha for _, pair in ordered])
    gb = np.array([pair.gamma_beta for _, pair in ordered])
    return float(max(np.max(np.diff(gb)), np.max(-np.diff(ga)), 0.0))
