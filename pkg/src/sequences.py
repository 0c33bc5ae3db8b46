"""Three-copy decision rules and adaptive measurement sequences for pure-state pairs.

Single-copy errors always come from the fidelity lower bound, which is the
exact ROC of a pure pair.  In the adaptive sequence only the last outcome
decides; earlier outcomes pick the parameter of the next measurement.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
from scipy import optimize

try:
    from .analytic_bounds import fidelity_lb_point
    from .errors import DegenerateParameter, ParameterOutOfRange
    from .exact_roc import ROCCurve, ROCPoint
except ImportError:
    from analytic_bounds import fidelity_lb_point
    from errors import DegenerateParameter, ParameterOutOfRange
    from exact_roc import ROCCurve, ROCPoint

logger = logging.getLogger(__name__)

class Rule(str, Enum):
    ALL_FIRST = "a"  # decide rho1 only if all three outcomes say rho1
    MAJORITY = "b"
    ALL_SECOND = "c"  # decide rho2 only if all three outcomes say rho2
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class SequencePlan:
    """Branch parameters; entry i is used after the first i+1 subsystems were measured."""

    p0: float
    fidelities: Tuple[float, ...]
    minus: Tuple[float, ...]
    plus: Tuple[float, ...]


def _check_fidelities(fidelities: Sequence[float]) -> Tuple[float, ...]:
    out = tuple(float(f) for f in fidelities)
    if not out:
        raise ParameterOutOfRange("need at least one fidelity")
    for f in out:
        if not 0.0 <= f <= 1.0:
            raise ParameterOutOfRange(f"fidelities must lie in [0, 1], got {f}")
    return out


def _check_p0(p0: float) -> None:
    if not 0.0 < p0 < 1.0:
        raise ParameterOutOfRange(f"p0 must lie strictly inside (0, 1), got {p0}")


def _branches(p0: float, overlap: float) -> Tuple[float, float]:
    root = math.sqrt(max(1.0 - 4.0 * p0 * (1.0 - p0) * overlap * overlap, 0.0))
    return 0.5 * (1.0 - root), 0.5 * (1.0 + root)


def adaptive_parameters(p0: float, fidelities: Sequence[float]) -> SequencePlan:
    _check_p0(p0)
    fids = _check_fidelities(fidelities)
    products = np.cumprod(fids)
    pairs = [_branches(p0, float(f)) for f in products]
    return SequencePlan(
        p0=p0,
        fidelities=fids,
        minus=tuple(m for m, _ in pairs),
        plus=tuple(p for _, p in pairs),
    )


def _step(
    alpha: float, beta: float, plus: float, minus: float, F: float
) -> Tuple[float, float]:
    """Append one subsystem: p+ after a 'rho1' outcome, p- after a 'rho2' outcome."""
    a_plus, b_plus = fidelity_lb_point(F, plus)
    a_minus, b_minus = fidelity_lb_point(F, minus)
    alpha_next = (1.0 - alpha) * a_plus + alpha * a_minus
    beta_next = beta * b_plus + (1.0 - beta) * b_minus
    return alpha_next, beta_next


def adaptive_sequence_errors_multi(p0: float, fidelities: Sequence[float]) -> Tuple[float, float]:
    """Errors of the adaptive sequence over any number of subsystems."""
    plan = adaptive_parameters(p0, fidelities)
    alpha, beta = fidelity_lb_point(plan.fidelities[0], p0)
    for i, F in enumerate(plan.fidelities[1:]):
        alpha, beta = _step(alpha, beta, plan.plus[i], plan.minus[i], F)
    return alpha, beta


def adaptive_sequence_errors(p0: float, F1: float, F2: float) -> Tuple[float, float]:
    return adaptive_sequence_errors_multi(p0, [F1, F2])


def adaptive_residual(p0: float, fidelities: Sequence[float]) -> float:
    """Distance between the sequence errors and the optimum for the product fidelity."""
    alpha, beta = adaptive_sequence_errors_multi(p0, fidelities)
    a_opt, b_opt = fidelity_lb_point(float(np.prod(fidelities)), p0)
    return max(abs(alpha - a_opt), abs(beta - b_opt))


# --- Non-adaptive three-copy rules ---

def _combine(alpha: float, beta: float, rule: Rule) -> Tuple[float, float]:
    if rule == Rule.ALL_FIRST:
        return 1.0 - (1.0 - alpha) ** 3, beta ** 3
    if rule == Rule.MAJORITY:
        return 3 * alpha ** 2 - 2 * alpha ** 3, 3 * beta ** 2 - 2 * beta ** 3
    if rule == Rule.ALL_SECOND:
        return alpha ** 3, 1.0 - (1.0 - beta) ** 3
    raise ParameterOutOfRange(f"rule {rule.value!r} is not a three-copy rule")


def nonadaptive_three_copy(F1: float, p: float, rule) -> Tuple[float, float]:
    rule = Rule(rule)
    alpha, beta = fidelity_lb_point(F1, p)
    return _combine(alpha, beta, rule)


def _decides_second(outcomes: Tuple[int, ...], rule: Rule) -> bool:
    votes = sum(outcomes)  # 1 means the measurement said rho2
    if rule == Rule.ALL_FIRST:
        return votes > 0
    if rule == Rule.MAJORITY:
        return votes >= 2
    if rule == Rule.ALL_SECOND:
        return votes == 3
    raise ParameterOutOfRange(f"rule {rule.value!r} is not a three-copy rule")


def sequence_tree_errors(alpha: float, beta: float, rule) -> Tuple[float, float]:
    """Sum the probabilities of all 2^3 outcome strings under each hypothesis."""
    rule = Rule(rule)
    total_alpha = total_beta = 0.0
    for outcomes in itertools.product((0, 1), repeat=3):
        says_second = sum(outcomes)
        under_first = alpha ** says_second * (1.0 - alpha) ** (3 - says_second)
        under_second = (1.0 - beta) ** says_second * beta ** (3 - says_second)
        if _decides_second(outcomes, rule):
            total_alpha += under_first
        else:
            total_beta += under_second
    return total_alpha, total_beta


# --- Curves ---

def _collect(points: List[ROCPoint], label: str, p: float, fn) -> None:
    try:
        alpha, beta = fn(p)
    except DegenerateParameter as err:
        logger.debug("skipping p=%.6g: %s", p, err)
        return
    points.append(ROCPoint(p, None, alpha, beta, label))


def nonadaptive_curve(F1: float, rule, grid: Sequence[float]) -> ROCCurve:
    rule = Rule(rule)
    label = f"nonadaptive-{rule.value}"
    points: List[ROCPoint] = []
    for p in grid:
        _collect(points, label, float(p), lambda x: nonadaptive_three_copy(F1, x, rule))
    return ROCCurve(points).sorted()


def adaptive_curve(p0_grid: Sequence[float], fidelities: Sequence[float]) -> ROCCurve:
    points: List[ROCPoint] = []
    for p0 in p0_grid:
        p0 = float(p0)
        if not 0.0 < p0 < 1.0:
            continue
        _collect(points, "adaptive", p0, lambda x: adaptive_sequence_errors_multi(x, fidelities))
    return ROCCurve(points).sorted()


def optimal_curve(F: float, grid: Sequence[float], label: str = "optimal") -> ROCCurve:
    """Exact ROC of a pure pair with overlap F, for comparison with the rules above."""
    points: List[ROCPoint] = []
    for p in grid:
        _collect(points, label, float(p), lambda x: fidelity_lb_point(F, x))
    return ROCCurve(points).sorted()


def rule_alpha_at(F1: float, rule, betas: Sequence[float]) -> np.ndarray:
    """Alpha of a three-copy rule read at given betas (beta grows with p)."""
    rule = Rule(rule)

    def point(p: float) -> Tuple[float, float]:
        return nonadaptive_three_copy(F1, p, rule)

    alpha_start, _ = point(0.0)
    _, beta_end = point(1.0)
    out = []
    for target in betas:
        target = float(target)
        if target <= 0.0:
            out.append(alpha_start)
        elif target >= beta_end:
            out.append(0.0)
        else:
            p = optimize.brentq(lambda x: point(x)[1] - target, 0.0, 1.0, xtol=1e-15)
            out.append(point(p)[0])
    return np.array(out)


def envelope_violation(F1: float, betas: Sequence[float]) -> float:
    """How far the majority-vote curve dips below min(case a, case c) on a beta grid."""
    a = rule_alpha_at(F1, Rule.ALL_FIRST, betas)
    b = rule_alpha_at(F1, Rule.MAJORITY, betas)
    c = rule_alpha_at(F1, Rule.ALL_SECOND, betas)
    return float(max(np.max(np.minimum(a, c) - b), 0.0))
