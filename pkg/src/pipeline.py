import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

# Import all engines the commands need
try:
    from .analytic_bounds import BoundInputs, BoundKind, BoundTag, bound_curve
    from .asymptotics import (
        chernoff_exponent,
        check_hoeffding_saturation,
        error_exponents,
        logconvexity_check,
        monotonicity_violation,
        stein_limits,
    )
    from .dv_states import DecompositionQs, fidelity, relative_entropies
    from .errors import (
        CapabilityError,
        CutoffTooSmall,
        DegenerateParameter,
        InvalidConfig,
        ParameterOutOfRange,
        UnsupportedInput,
    )
    from .exact_roc import ROCCurve, chebyshev_grid, roc_curve_exact
    from .gaussian import MAX_CUTOFF, gaussian_fidelity_truncated, gaussian_qs_evaluator
    from .loader import GAUSSIAN, StatePair
    from .sequences import Rule, adaptive_curve, adaptive_residual, nonadaptive_curve, optimal_curve
except ImportError:
    from analytic_bounds import BoundInputs, BoundKind, BoundTag, bound_curve
    from asymptotics import (
        chernoff_exponent,
        check_hoeffding_saturation,
        error_exponents,
        logconvexity_check,
        monotonicity_violation,
        stein_limits,
    )
    from dv_states import DecompositionQs, fidelity, relative_entropies
    from errors import (
        CapabilityError,
        CutoffTooSmall,
        DegenerateParameter,
        InvalidConfig,
        ParameterOutOfRange,
        UnsupportedInput,
    )
    from exact_roc import ROCCurve, chebyshev_grid, roc_curve_exact
    from gaussian import MAX_CUTOFF, gaussian_fidelity_truncated, gaussian_qs_evaluator
    from loader import GAUSSIAN, StatePair
    from sequences import Rule, adaptive_curve, adaptive_residual, nonadaptive_curve, optimal_curve

logger = logging.getLogger(__name__)

# --- Configuration ---
CONFIG_PATH = "config.yaml"
CONFIG_ENV = "QROC_CONFIG"
THREADS_ENV = "QROC_THREADS"
DEFAULT_BOUNDS = ["fidUB", "fidLB", "caqcb", "oaqcb", "qreLB"]
DEFAULT_P_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class Settings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    exact_grid_points: int = Field(512, ge=2)
    bound_grid_points: int = Field(512, ge=2)
    kernel_scan_points: int = Field(2048, ge=16)
    zero_tol_rel: float = Field(1e-10, ge=0.0)
    zero_tol_abs: float = Field(1e-14, ge=0.0)
    fock_cutoff: int = Field(40, ge=1, le=64)
    fock_max_deficit: float = Field(1e-6, gt=0.0)
    hoeffding_scan_points: int = Field(2048, ge=16)
    saturation_tol: float = Field(1e-6, gt=0.0)
    threads: int = Field(4, ge=1)
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"


# --- Configuration Cache ---
config_cache: Dict[str, Dict[str, Any]] = {}


def load_config(config_path: str) -> Dict[str, Any]:
    """Raw settings mapping of a YAML file, parsed once per resolved path.

    Raises:
        FileNotFoundError: nothing at ``config_path`` (the caller decides if that matters).
        InvalidConfig: unparsable YAML or a document that is not a mapping.
    """
    path = Path(config_path)
    key = str(path.resolve())
    if key in config_cache:
        return config_cache[key]
    if not path.is_file():
        raise FileNotFoundError(f"settings file not found: {config_path}")

    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise InvalidConfig(f"{config_path}: {e}") from e
    if not isinstance(raw, dict):
        kind = "empty" if raw is None else type(raw).__name__
        raise InvalidConfig(f"{config_path}: expected a mapping of settings, got {kind}")
    config_cache[key] = raw
    logger.debug("settings read from %s", key)
    return raw


def load_settings(config_path: Optional[str] = None, **overrides) -> Settings:
    """Settings from YAML, then QROC_THREADS, then explicit overrides (None is ignored).

    A missing default config file means built-in defaults; a file named
    explicitly (argument or QROC_CONFIG) has to exist.
    """
    explicit = config_path or os.environ.get(CONFIG_ENV)
    path = explicit or CONFIG_PATH
    try:
        raw = dict(load_config(path))
    except FileNotFoundError as e:
        if explicit:
            raise InvalidConfig(str(e)) from e
        logger.debug("no %s found, using defaults", path)
        raw = {}

    threads = os.environ.get(THREADS_ENV)
    if threads:
        try:
            raw["threads"] = int(threads)
        except ValueError as e:
            raise InvalidConfig(f"{THREADS_ENV} must be an integer, got {threads!r}") from e
    raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Settings(**raw)
    except PydanticValidationError as e:
        first = e.errors()[0]
        raise InvalidConfig(f"config key {'.'.join(map(str, first['loc']))}: {first['msg']}") from e


def zero_tolerance(pair: StatePair, settings: Settings) -> float:
    """Absolute kernel tolerance scaled by the spectral radius of the inputs."""
    radius = max(
        float(np.max(np.abs(np.linalg.eigvalsh(pair.first.matrix)))),
        float(np.max(np.abs(np.linalg.eigvalsh(pair.second.matrix)))),
    )
    return max(settings.zero_tol_rel * radius, settings.zero_tol_abs)


# --- Commands ---

def run_exact(pair: StatePair, settings: Settings, grid: Optional[int] = None) -> ROCCurve:
    if pair.kind == GAUSSIAN:
        raise UnsupportedInput("the exact ROC needs finite-dimensional density matrices")
    points = grid or settings.exact_grid_points
    logger.info("Stage 1: exact ROC on a %d-point grid", points)
    return roc_curve_exact(
        pair.first,
        pair.second,
        p_grid=chebyshev_grid(points),
        zero_tol=zero_tolerance(pair, settings),
        threads=settings.threads,
        scan_points=settings.kernel_scan_points,
    )


def parse_bound_names(names: Sequence[str]) -> List[BoundTag]:
    tags: List[BoundTag] = []
    for name in names:
        if name == "qreLB":
            tags += [BoundTag.QRE_LB_ALPHA, BoundTag.QRE_LB_BETA]
            continue
        try:
            tags.append(BoundTag(name))
        except ValueError as e:
            raise ParameterOutOfRange(f"unknown bound {name!r}") from e
    return tags


def truncated_fidelity(pair: StatePair, settings: Settings) -> Tuple[float, float]:
    """Fock-truncated fidelity of a Gaussian pair at the configured cutoff.

    A cutoff that loses too much trace is retried once at MAX_CUTOFF.
    """
    cutoff = settings.fock_cutoff
    while True:
        try:
            value, err = gaussian_fidelity_truncated(
                pair.first, pair.second, cutoff, settings.fock_max_deficit
            )
            break
        except CutoffTooSmall as e:
            if cutoff >= MAX_CUTOFF:
                raise
            logger.info("%s; retrying at cutoff %d", e, MAX_CUTOFF)
            cutoff = MAX_CUTOFF
    logger.info("truncated fidelity %.10f +- %.2e (cutoff %d)", value, err, cutoff)
    return value, err


def bound_inputs(pair: StatePair, settings: Settings, need_fidelity: bool = True) -> BoundInputs:
    """Fidelity, Q_s evaluator and relative entropies for either input kind.

    Gaussian fidelities come from Fock truncation and carry its error bar.
    """
    if pair.kind == GAUSSIAN:
        qs = gaussian_qs_evaluator(pair.first, pair.second)
        inputs = BoundInputs(qs=qs, entropies=qs.stein_entropies())
        if need_fidelity:
            inputs.fidelity, inputs.fidelity_error = truncated_fidelity(pair, settings)
        return inputs
    qs = DecompositionQs.from_states(pair.first, pair.second)
    return BoundInputs(
        fidelity=fidelity(pair.first, pair.second),
        qs=qs,
        entropies=relative_entropies(qs.decomposition),
    )


def run_bounds(
    pair: StatePair,
    settings: Settings,
    names: Sequence[str] = tuple(DEFAULT_BOUNDS),
    copies: int = 1,
    s0: Optional[float] = None,
    grid: Optional[int] = None,
) -> Tuple[List[ROCCurve], Optional[CapabilityError]]:
    """Curves for the requested bounds.

    When a Gaussian fidelity cannot be obtained the fidelity bounds are left
    out and the error is returned next to the remaining curves.

    Returns:
        The curves and the error that made the fidelity bounds unavailable, if any.
    """
    tags = parse_bound_names(names)
    fidelity_tags = [t for t in tags if t in (BoundTag.FIDELITY_LB, BoundTag.FIDELITY_UB)]
    inputs = bound_inputs(pair, settings, need_fidelity=False)
    skipped: Optional[CapabilityError] = None
    if fidelity_tags and pair.kind == GAUSSIAN:
        try:
            inputs.fidelity, inputs.fidelity_error = truncated_fidelity(pair, settings)
        except CapabilityError as e:
            logger.warning("skipping %s: %s", ",".join(t.value for t in fidelity_tags), e)
            tags = [t for t in tags if t not in fidelity_tags]
            skipped = e
    points = grid or settings.bound_grid_points

    curves = []
    for tag in tags:
        if tag == BoundTag.CAQCB:
            s = s0
            if s is None:
                s = chernoff_exponent(inputs.qs).s_star
                if not 0.0 < s < 1.0:
                    s = 0.5  # s* on the boundary: use the symmetric member
            kind = BoundKind(tag, s)
        else:
            kind = BoundKind(tag)
        logger.info("Stage 2: %s (copies=%d)", kind.label, copies)
        curves.append(bound_curve(kind, inputs, copies=copies, points=points))
    return curves, skipped


def run_asymptotics(
    pair: StatePair, settings: Settings, p_grid: Sequence[float] = tuple(DEFAULT_P_GRID)
) -> Dict[str, Any]:
    inputs = bound_inputs(pair, settings, need_fidelity=False)
    qs = inputs.qs
    logger.info("Stage 1: exponents on %d points", len(p_grid))
    rows = [(float(p), error_exponents(qs, float(p))) for p in p_grid]
    logger.info("Stage 2: Hoeffding saturation")
    saturation = check_hoeffding_saturation(
        qs, p_grid, settings.saturation_tol, settings.hoeffding_scan_points
    )
    stein = stein_limits(qs)
    chernoff = chernoff_exponent(qs)
    convexity = logconvexity_check(qs)
    return {
        "kind": pair.kind,
        "exponents": [
            {"p": p, "gamma_alpha": e.gamma_alpha, "gamma_beta": e.gamma_beta} for p, e in rows
        ],
        "monotonicity_violation": monotonicity_violation(rows),
        "saturation": {
            "rows": saturation.rows,
            "worst_deviation": saturation.worst_deviation,
            "tol": saturation.tol,
            "trivial": saturation.trivial,
            "passed": saturation.passed,
        },
        "stein": {"s12_nats": stein.s12, "s21_nats": stein.s21},
        "chernoff": {"s_star": chernoff.s_star, "q_star": chernoff.q_star, "exponent": chernoff.exponent},
        "log_convexity": {
            "s_points": convexity.s_points,
            "min_second_difference": convexity.min_second_difference,
            "passed": convexity.passed,
        },
    }


def run_sequence(
    fidelities: Sequence[float],
    rule: str,
    p_grid: Sequence[float],
) -> Tuple[List[ROCCurve], Optional[float]]:
    """Curves for a three-copy rule or the adaptive sequence, plus the optimum to compare with.

    Returns:
        The curves and, for the adaptive rule, the largest identity residual.
    """
    try:
        rule = Rule(rule)
    except ValueError as e:
        raise ParameterOutOfRange(f"unknown rule {rule!r}") from e
    if rule == Rule.ADAPTIVE:
        curve = adaptive_curve(p_grid, fidelities)
        residuals = []
        for p in p_grid:
            if not 0.0 < p < 1.0:
                continue
            try:
                residuals.append(adaptive_residual(float(p), fidelities))
            except DegenerateParameter:
                logger.debug("no residual at degenerate p0=%.6g", p)
        worst = max(residuals) if residuals else None
        if worst is not None:
            logger.info("adaptive identity residual: max %.3e", worst)
        return [curve, optimal_curve(float(np.prod(fidelities)), p_grid)], worst
    F1 = float(fidelities[0])
    return [nonadaptive_curve(F1, rule, p_grid), optimal_curve(F1 ** 3, p_grid)], None
