"""Closed-form ROC bounds.

Lower bounds on the trace norm t_p give upper bounds on the ROC and vice
versa.  The fidelity gives one of each; Q_s gives the constant-s family
(CAQCB) and its p-optimized envelope (OAQCB); the relative entropies give the
hypothesis-testing lower bounds.  All (alpha, beta) pairs are probabilities of
deciding rho2 under rho1 and rho1 under rho2 respectively.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

try:
    from .dv_states import LN2, PowerQs, QsEvaluator, RelativeEntropies
    from .errors import DegenerateParameter, ParameterOutOfRange
    from .exact_roc import ROCCurve, ROCPoint
    from .optimize import golden_section_min
except ImportError:
    from dv_states import LN2, PowerQs, QsEvaluator, RelativeEntropies
    from errors import DegenerateParameter, ParameterOutOfRange
    from exact_roc import ROCCurve, ROCPoint
    from optimize import golden_section_min

logger = logging.getLogger(__name__)

# --- Configuration ---
DEGENERATE_RADICAND = 1e-14
DEFAULT_POINTS = 512


class BoundTag(str, Enum):
    FIDELITY_LB = "fidLB"
    FIDELITY_UB = "fidUB"
    CAQCB = "caqcb"
    OAQCB = "oaqcb"
    QRE_LB_ALPHA = "qreLB-alpha"
    QRE_LB_BETA = "qreLB-beta"


@dataclass(frozen=True)
class BoundKind:
    tag: BoundTag
    s0: Optional[float] = None

    def __post_init__(self):
        if self.tag == BoundTag.CAQCB and (self.s0 is None or not 0.0 < self.s0 < 1.0):
            raise ParameterOutOfRange(f"CAQCB needs s0 in (0, 1), got {self.s0}")

    @property
    def label(self) -> str:
        if self.tag == BoundTag.CAQCB:
            return f"caqcb(s0={self.s0:.6g})"
        return self.tag.value


@dataclass
class BoundInputs:
    """Everything a bound may need; fidelity_error widens the fidelity bounds."""

    fidelity: Optional[float] = None
    fidelity_error: float = 0.0
    qs: Optional[QsEvaluator] = None
    entropies: Optional[RelativeEntropies] = None


def _check_unit(name: str, value: float, open_interval: bool = False) -> None:
    ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    if not ok:
        kind = "(0, 1)" if open_interval else "[0, 1]"
        raise ParameterOutOfRange(f"{name} must lie in {kind}, got {value}")


# --- Trace-norm bounds ---

def tp_fidelity_upper(F: float, p: float) -> float:
    return math.sqrt(max(1.0 - 4.0 * p * (1.0 - p) * F * F, 0.0))


def tp_fidelity_lower(F: float, p: float) -> float:
    return 1.0 - 2.0 * math.sqrt(p * (1.0 - p)) * F


def tp_qcb_lower(q_s0: float, s: float, p: float) -> float:
    return 1.0 - 2.0 * p ** (1.0 - s) * (1.0 - p) ** s * q_s0


def boundary_from_trace_norm(t: float, dt: float, p: float) -> Tuple[float, float]:
    """Tangent point of the line p*alpha + (1-p)*beta = (1-t)/2 given dt/dp."""
    alpha = (1.0 - t) / 2.0 - (1.0 - p) / 2.0 * dt
    beta = (1.0 - t) / 2.0 + p / 2.0 * dt
    return alpha, beta


def tightest_qcb_tp_lower(q: QsEvaluator, p: float) -> Tuple[float, float]:
    """Best t_p lower bound over the Q_s family at fixed p: (s_opt, bound)."""
    _check_unit("p", p, open_interval=True)
    s_opt, g = golden_section_min(
        lambda s: p ** (1.0 - s) * (1.0 - p) ** s * q.value(s), 0.0, 1.0, 1e-10
    )
    return s_opt, 1.0 - 2.0 * g


# --- Fidelity bounds ---

def fidelity_lb_point(F: float, p: float) -> Tuple[float, float]:
    """Parametric fidelity lower bound, exact for pure states.

    Raises:
        DegenerateParameter: 1 - 4p(1-p)F^2 below 1e-14 (F = 1 at p = 1/2).
    """
    _check_unit("F", F)
    _check_unit("p", p)
    rad = 1.0 - 4.0 * p * (1.0 - p) * F * F
    if rad < DEGENERATE_RADICAND:
        raise DegenerateParameter(f"1 - 4p(1-p)F^2 = {rad:.3e} at F={F}, p={p}")
    d = math.sqrt(rad)
    alpha = (2.0 * (1.0 - p) * F * F - 1.0 + d) / (2.0 * d)
    beta = (2.0 * p * F * F - 1.0 + d) / (2.0 * d)
    return min(max(alpha, 0.0), 1.0), min(max(beta, 0.0), 1.0)


def fidelity_lb_alpha(F: float, beta: float) -> float:
    """Eliminated form of the lower bound; zero past its axis crossing at beta = F^2."""
    f2 = F * F
    if beta >= f2 or beta >= 1.0:
        return 0.0
    beta = max(beta, 0.0)
    value = beta - 2.0 * beta * f2 + F * (F - 2.0 * math.sqrt((1.0 - beta) * beta * (1.0 - f2)))
    return max(value, 0.0)


def fidelity_ub_point(F: float, p: float) -> Tuple[float, float]:
    """Parametric fidelity upper bound before the tangent repair (can exceed 1)."""
    _check_unit("p", p, open_interval=True)
    return F / 2.0 * math.sqrt((1.0 - p) / p), F / 2.0 * math.sqrt(p / (1.0 - p))


def fidelity_ub_alpha(F: float, beta: float) -> float:
    """Piecewise upper bound: tangent from (0, 1), F^2/(4 beta), tangent to (1, 0)."""
    f2 = F * F
    if f2 == 0.0:
        return 1.0 if beta <= 0.0 else 0.0
    if beta <= f2 / 2.0:
        return 1.0 - beta / f2
    if beta <= 0.5:
        return f2 / (4.0 * beta)
    return (1.0 - beta) * f2


# --- Q_s bounds ---

def _check_q(q_s0: float, s0: float) -> None:
    if not 0.0 < q_s0 <= 1.0 + 1e-12:
        raise ParameterOutOfRange(f"Q_s0 must lie in (0, 1], got {q_s0}")
    _check_unit("s0", s0, open_interval=True)


def caqcb_point(q_s0: float, s0: float, p: float) -> Tuple[float, float]:
    """Constant-s bound at parameter p, without the tangent repair."""
    _check_q(q_s0, s0)
    _check_unit("p", p, open_interval=True)
    alpha = ((1.0 - p) / p) ** s0 * (1.0 - s0) * q_s0
    beta = (p / (1.0 - p)) ** (1.0 - s0) * s0 * q_s0
    return alpha, beta


def caqcb_alpha(q_s0: float, s0: float, beta: float) -> float:
    """Piecewise CAQCB with knots s0 Q^(1/s0) and s0."""
    _check_q(q_s0, s0)
    q_s0 = min(q_s0, 1.0)
    knot = s0 * q_s0 ** (1.0 / s0)
    if beta <= knot:
        return 1.0 - beta * q_s0 ** (-1.0 / s0)
    if beta <= s0:
        return (1.0 - s0) * q_s0 ** (1.0 / (1.0 - s0)) * (s0 / beta) ** (s0 / (1.0 - s0))
    return (1.0 - beta) * q_s0 ** (1.0 / (1.0 - s0))


def oaqcb_point(q: QsEvaluator, p: float) -> Tuple[float, float]:
    """OAQCB at parameter p using the evaluator's analytic derivative.

    alpha = exp(-p L)(1-p) Q_p, beta = exp((1-p) L) p Q_p with L = Q_p'/Q_p.
    Runs from (beta, alpha) = (0, Q_0) at p = 0 to (Q_1, 0) at p = 1.
    """
    _check_unit("p", p)
    value = q.value(p)
    if not value > 0.0:
        raise ParameterOutOfRange(f"Q_p must be positive, got {value} at p={p}")
    log_deriv = q.derivative(p) / value
    alpha = (1.0 - p) * value * math.exp(-p * log_deriv) if p < 1.0 else 0.0
    beta = p * value * math.exp((1.0 - p) * log_deriv) if p > 0.0 else 0.0
    return min(max(alpha, 0.0), 1.0), min(max(beta, 0.0), 1.0)


def oaqcb_alpha_at(q: QsEvaluator, betas: Iterable[float]) -> np.ndarray:
    """OAQCB read at given betas by solving beta(p) = target for p."""
    beta_end = oaqcb_point(q, 1.0)[1]
    alpha_start = oaqcb_point(q, 0.0)[0]
    out = []
    for target in betas:
        target = float(target)
        if target <= 0.0:
            out.append(alpha_start)
        elif target >= beta_end:
            out.append(0.0)
        else:
            p = optimize.brentq(
                lambda x: oaqcb_point(q, x)[1] - target, 0.0, 1.0, xtol=1e-14
            )
            out.append(oaqcb_point(q, p)[0])
    return np.array(out)


def caqcb_touch_parameter(q: QsEvaluator, s0: float) -> float:
    """CAQCB(s0) parameter at which it touches the OAQCB evaluated at p = s0."""
    _check_unit("s0", s0, open_interval=True)
    log_deriv = q.derivative(s0) / q.value(s0)
    return 1.0 / (1.0 + math.exp(-log_deriv))


def oaqcb_product_point(evaluators: Sequence[QsEvaluator], p: float) -> Tuple[float, float]:
    """OAQCB for a product of non-identical pairs from the per-factor points."""
    _check_unit("p", p, open_interval=True)
    n = len(evaluators)
    if n == 0:
        raise ParameterOutOfRange("need at least one factor")
    points = [oaqcb_point(q, p) for q in evaluators]
    alpha = float(np.prod([a for a, _ in points])) / (1.0 - p) ** (n - 1)
    beta = float(np.prod([b for _, b in points])) / p ** (n - 1)
    return alpha, beta


# --- Relative-entropy lower bounds ---

def binary_entropy(eps: float) -> float:
    """h(eps) in bits with 0 log 0 = 0."""
    _check_unit("eps", eps)
    return float((special.entr(eps) + special.entr(1.0 - eps)) / LN2)


def qre_lb_alpha(s21_bits: float, beta: float) -> float:
    """alpha* >= 2^(-(S(rho2||rho1) + h(beta))/(1 - beta)); trivial when S21 diverges."""
    if math.isinf(s21_bits) or beta >= 1.0:
        return 0.0
    beta = max(beta, 0.0)
    return 2.0 ** (-(s21_bits + binary_entropy(beta)) / (1.0 - beta))


def qre_lb_beta(s12_bits: float, alpha: float) -> float:
    """beta* >= 2^(-(S(rho1||rho2) + h(alpha))/(1 - alpha)); trivial when S12 diverges."""
    return qre_lb_alpha(s12_bits, alpha)


# --- Curves ---

def _beta_grid(points: int, knots: Iterable[float]) -> np.ndarray:
    grid = np.linspace(0.0, 1.0, points)
    extra = [k for k in knots if 0.0 <= k <= 1.0]
    return np.unique(np.concatenate([grid, np.array(extra, dtype=float)]))


def _need(value, what: str):
    if value is None:
        raise ParameterOutOfRange(f"bound needs {what}")
    return value


def bound_curve(
    kind: BoundKind,
    inputs: BoundInputs,
    grid: Optional[Sequence[float]] = None,
    copies: int = 1,
    points: int = DEFAULT_POINTS,
) -> ROCCurve:
    """Emit one bound as a curve over a beta grid (alpha grid for qreLB-beta, p grid for OAQCB).

    N copies use F^N, Q_s^N and N*S.  Knots of the piecewise forms are
    always added to the grid.
    """
    if copies < 1:
        raise ParameterOutOfRange(f"copies must be >= 1, got {copies}")
    label = kind.label
    out: List[ROCPoint] = []

    if kind.tag in (BoundTag.FIDELITY_LB, BoundTag.FIDELITY_UB):
        F = _need(inputs.fidelity, "a fidelity")
        if kind.tag == BoundTag.FIDELITY_LB:
            f_n = max(F - inputs.fidelity_error, 0.0) ** copies
            betas = _beta_grid(points, [f_n * f_n]) if grid is None else np.asarray(grid)
            out = [ROCPoint(None, None, fidelity_lb_alpha(f_n, b), float(b), label) for b in betas]
        else:
            f_n = min(F + inputs.fidelity_error, 1.0) ** copies
            betas = _beta_grid(points, [f_n * f_n / 2.0, 0.5]) if grid is None else np.asarray(grid)
            out = [ROCPoint(None, None, fidelity_ub_alpha(f_n, b), float(b), label) for b in betas]

    elif kind.tag == BoundTag.CAQCB:
        qs = _need(inputs.qs, "a Q_s evaluator")
        s0 = float(kind.s0)
        q_n = qs.value(s0) ** copies
        betas = _beta_grid(points, [s0 * q_n ** (1.0 / s0), s0]) if grid is None else np.asarray(grid)
        out = [ROCPoint(None, None, caqcb_alpha(q_n, s0, b), float(b), label) for b in betas]

    elif kind.tag == BoundTag.OAQCB:
        qs = _need(inputs.qs, "a Q_s evaluator")
        evaluator = qs if copies == 1 else PowerQs(qs, copies)
        ps = np.linspace(0.0, 1.0, points) if grid is None else np.asarray(grid)
        for p in ps:
            a, b = oaqcb_point(evaluator, float(p))
            out.append(ROCPoint(float(p), None, a, b, label))

    elif kind.tag in (BoundTag.QRE_LB_ALPHA, BoundTag.QRE_LB_BETA):
        ent = _need(inputs.entropies, "relative entropies").to("bits")
        xs = np.linspace(0.0, 1.0, points) if grid is None else np.asarray(grid)
        if kind.tag == BoundTag.QRE_LB_ALPHA:
            s = ent.s21 * copies
            out = [ROCPoint(None, None, qre_lb_alpha(s, x), float(x), label) for x in xs]
        else:
            s = ent.s12 * copies
            out = [ROCPoint(None, None, float(x), qre_lb_beta(s, x), label) for x in xs]

    logger.debug("bound %s: %d points", label, len(out))
    return ROCCurve(out).sorted()
