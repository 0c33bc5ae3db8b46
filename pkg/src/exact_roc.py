"""Exact ROC boundary for finite-dimensional pairs.

Every point comes from the Neyman-Pearson POVM of X(p) = (1-p) rho2 - p rho1:
decide rho1 on the negative eigenspace, rho2 on the positive one, and split
the kernel with weight q.  Where X(p) is singular the ROC has a straight
segment, traced by q from 0 to 1.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize

try:
    from .dv_states import DensityMatrix, LN2, _check_dims
    from .errors import ParameterOutOfRange
    from .linalg_core import default_zero_tol, hermitian_eig, projectors_from_eig, trace_norm
except ImportError:
    from dv_states import DensityMatrix, LN2, _check_dims
    from errors import ParameterOutOfRange
    from linalg_core import default_zero_tol, hermitian_eig, projectors_from_eig, trace_norm

logger = logging.getLogger(__name__)

# --- Configuration ---
DEFAULT_GRID = 512
DEFAULT_SCAN = 2048
KERNEL_XTOL = 1e-12
KERNEL_MERGE = 1e-9
BISECTION_STEPS = 52
BETA_TIE = 1e-15  # betas closer than this are the same ROC abscissa
MONOTONE_SLACK = 1e-9
CONVEX_SLACK = 1e-8

EXACT = "exact"
KERNEL_SEGMENT = "kernel-segment"


# --- Types ---

@dataclass(frozen=True, eq=False)
class HelstromParts:
    p: float
    P1: np.ndarray
    P2: np.ndarray
    P0: np.ndarray
    t_p: float
    x_p: float
    y_p: float


@dataclass(frozen=True)
class ROCPoint:
    p: Optional[float]
    q: Optional[float]
    alpha: float
    beta: float
    kind: str = EXACT


@dataclass
class ROCCurve:
    points: List[ROCPoint] = field(default_factory=list)

    def sorted(self) -> "ROCCurve":
        return ROCCurve(sorted(self.points, key=lambda pt: (pt.beta, -pt.alpha)))

    @property
    def betas(self) -> np.ndarray:
        return np.array([pt.beta for pt in self.points])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([pt.alpha for pt in self.points])


def _check_p(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ParameterOutOfRange(f"{name} must lie in [0, 1], got {value}")


def _operator(rho1: DensityMatrix, rho2: DensityMatrix, p: float) -> np.ndarray:
    return (1.0 - p) * rho2.matrix - p * rho1.matrix


def _expect(projector: np.ndarray, rho: DensityMatrix) -> float:
    return float(np.real(np.trace(projector @ rho.matrix)))


# --- Operations ---

def weighted_trace_norm(rho1: DensityMatrix, rho2: DensityMatrix, p: float) -> float:
    """t_p = ||(1-p) rho2 - p rho1||_1."""
    _check_dims(rho1, rho2)
    _check_p("p", p)
    return trace_norm(_operator(rho1, rho2, p))


def neyman_pearson_povm(
    rho1: DensityMatrix, rho2: DensityMatrix, p: float, zero_tol: Optional[float] = None
) -> HelstromParts:
    """Projectors P1 (decide rho1), P2 (decide rho2) and the kernel P0 at parameter p."""
    _check_dims(rho1, rho2)
    _check_p("p", p)
    es = hermitian_eig(_operator(rho1, rho2, p))
    proj = projectors_from_eig(es, zero_tol)
    return HelstromParts(
        p=p,
        P1=proj.minus,
        P2=proj.plus,
        P0=proj.zero,
        t_p=float(np.sum(np.abs(es.eigenvalues))),
        x_p=_expect(proj.zero, rho1),
        y_p=_expect(proj.zero, rho2),
    )


def errors_from_parts(
    parts: HelstromParts, rho1: DensityMatrix, rho2: DensityMatrix, q: float
) -> Tuple[float, float]:
    a2 = _expect(parts.P2, rho1)
    b1 = _expect(parts.P1, rho2)
    alpha = a2 + (1.0 - q) * parts.x_p
    beta = b1 + q * parts.y_p
    return float(np.clip(alpha, 0.0, 1.0)), float(np.clip(beta, 0.0, 1.0))


def exact_errors(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    p: float,
    q: float = 0.0,
    zero_tol: Optional[float] = None,
) -> Tuple[float, float]:
    """(alpha, beta) with alpha = Tr[(P2 + (1-q) P0) rho1], beta = Tr[(P1 + q P0) rho2]."""
    _check_p("q", q)
    parts = neyman_pearson_povm(rho1, rho2, p, zero_tol)
    return errors_from_parts(parts, rho1, rho2, q)


def _support_basis(rho1: DensityMatrix, rho2: DensityMatrix) -> np.ndarray:
    w, v = linalg.eigh(rho1.matrix + rho2.matrix)
    keep = w > default_zero_tol(w)
    return v[:, keep]


def locate_kernel_points(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    scan_points: int = DEFAULT_SCAN,
    zero_tol: Optional[float] = None,
) -> List[float]:
    """Interior p where (1-p) rho2 - p rho1 is singular on the support of rho1 + rho2.

    On that support X(p) = rho2 - p (rho1 + rho2) has strictly decreasing
    eigenvalues, so each sorted eigenvalue crosses zero exactly once; the scan
    brackets the crossing and brentq refines it to 1e-12.
    """
    if scan_points < 100:
        raise ParameterOutOfRange(f"scan_points must be >= 100, got {scan_points}")
    _check_dims(rho1, rho2)
    basis = _support_basis(rho1, rho2)
    if basis.shape[1] == 0:
        return []
    r1 = basis.conj().T @ rho1.matrix @ basis
    r2 = basis.conj().T @ rho2.matrix @ basis

    def eigs(p: float) -> np.ndarray:
        m = (1.0 - p) * r2 - p * r1
        return linalg.eigvalsh(0.5 * (m + m.conj().T))

    grid = np.linspace(0.0, 1.0, scan_points)
    table = np.array([eigs(p) for p in grid])
    tol = default_zero_tol(table[0]) if zero_tol is None else zero_tol

    roots: List[float] = []
    for k in range(table.shape[1]):
        column = table[:, k]
        for i in range(scan_points - 1):
            lo, hi = column[i], column[i + 1]
            if lo > 0 >= hi or (lo >= 0 > hi):
                a, b = grid[i], grid[i + 1]
                if hi == 0:
                    root = b
                elif lo == 0:
                    root = a
                else:
                    root = optimize.brentq(lambda p: eigs(p)[k], a, b, xtol=KERNEL_XTOL)
                roots.append(float(root))
                break

    interior = sorted(
        r for r in roots
        if KERNEL_XTOL < r < 1.0 - KERNEL_XTOL and np.min(np.abs(eigs(r))) <= max(tol, 1e-10)
    )
    merged: List[float] = []
    for r in interior:
        if merged and r - merged[-1] < KERNEL_MERGE:
            continue
        merged.append(r)
    logger.debug("kernel points: %s", merged)
    return merged


def chebyshev_grid(n: int = DEFAULT_GRID) -> np.ndarray:
    """p_k = (1 - cos(pi (k + 1/2) / n)) / 2, all strictly inside (0, 1)."""
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(np.pi * (k + 0.5) / n))


def roc_curve_exact(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    p_grid: Optional[Sequence[float]] = None,
    zero_tol: Optional[float] = None,
    threads: int = 1,
    scan_points: int = DEFAULT_SCAN,
) -> ROCCurve:
    """Exact ROC: grid points at q = 0, both q endpoints at kernel points and at p = 0, 1.

    Evaluation may use a thread pool; the result is sorted by beta and does not
    depend on the number of threads.
    """
    _check_dims(rho1, rho2)
    grid = chebyshev_grid() if p_grid is None else np.asarray(p_grid, dtype=float)
    for p in grid:
        _check_p("p", float(p))
    kernels = locate_kernel_points(rho1, rho2, scan_points, zero_tol)

    tasks: List[Tuple[float, bool]] = [(float(p), False) for p in grid]
    tasks += [(p, True) for p in kernels]
    tasks += [(0.0, True), (1.0, True)]

    def evaluate(task: Tuple[float, bool]) -> List[ROCPoint]:
        p, both = task
        parts = neyman_pearson_povm(rho1, rho2, p, zero_tol)
        if not both:
            a, b = errors_from_parts(parts, rho1, rho2, 0.0)
            return [ROCPoint(p=p, q=0.0, alpha=a, beta=b, kind=EXACT)]
        out = []
        for q in (0.0, 1.0):
            a, b = errors_from_parts(parts, rho1, rho2, q)
            out.append(ROCPoint(p=p, q=q, alpha=a, beta=b, kind=KERNEL_SEGMENT))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(evaluate, tasks))
    else:
        chunks = [evaluate(t) for t in tasks]

    points = [pt for chunk in chunks for pt in chunk]
    logger.info("exact ROC: %d points, %d kernel points", len(points), len(kernels))
    return ROCCurve(points).sorted()


# --- Curve utilities ---

def _hull_arrays(curve: ROCCurve) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct betas with the lowest alpha at each, ascending."""
    pts = sorted((pt.beta, pt.alpha) for pt in curve.points)
    betas: List[float] = []
    alphas: List[float] = []
    for b, a in pts:
        if betas and abs(b - betas[-1]) <= 1e-12:
            alphas[-1] = min(alphas[-1], a)
            continue
        betas.append(b)
        alphas.append(a)
    return np.array(betas), np.array(alphas)


def interpolate_alpha(curve: ROCCurve, betas) -> np.ndarray:
    """Piecewise-linear alpha(beta) through the curve's distinct points."""
    xb, xa = _hull_arrays(curve)
    return np.interp(np.asarray(betas, dtype=float), xb, xa)


def check_curve(curve: ROCCurve) -> Dict[str, float]:
    """Worst monotonicity and convexity violations (0 when the curve is a valid ROC)."""
    alphas = [pt.alpha for pt in curve.points]
    monotone = max([0.0] + [alphas[i + 1] - alphas[i] for i in range(len(alphas) - 1)])
    xb, xa = _hull_arrays(curve)
    convex = 0.0
    for i in range(1, len(xb) - 1):
        a0, a1, a2 = xa[i - 1], xa[i], xa[i + 1]
        b0, b1, b2 = xb[i - 1], xb[i], xb[i + 1]
        chord = a0 + (a2 - a0) * (b1 - b0) / (b2 - b0)
        convex = max(convex, a1 - chord)
    has_ends = bool(len(xb)) and xb[0] <= 1e-12 and xb[-1] >= 1.0 - 1e-12
    return {
        "monotone_violation": float(monotone),
        "convex_violation": float(convex),
        "has_endpoints": float(has_ends),
        "valid": float(monotone <= MONOTONE_SLACK and convex <= CONVEX_SLACK and has_ends),
    }


def curved_stretches(curve: ROCCurve, tol: float = 1e-6) -> List[Tuple[float, float]]:
    """Beta ranges where the ROC is not a straight line.

    Runs of consecutive distinct points are split at kernel-segment endpoints
    (the straight pieces); a run counts as curved when some point leaves the
    chord between the run's ends by more than ``tol``.
    """
    xb, xa = _hull_arrays(curve)
    anchors = {round(pt.beta, 12) for pt in curve.points if pt.kind == KERNEL_SEGMENT}
    stretches: List[Tuple[float, float]] = []
    start = 0
    for i in range(1, len(xb)):
        if round(xb[i], 12) in anchors or i == len(xb) - 1:
            run_b, run_a = xb[start:i + 1], xa[start:i + 1]
            if len(run_b) > 2:
                chord = run_a[0] + (run_a[-1] - run_a[0]) * (run_b - run_b[0]) / (run_b[-1] - run_b[0])
                if float(np.max(chord - run_a)) > tol:
                    stretches.append((float(run_b[0]), float(run_b[-1])))
            start = i
    return stretches


def exact_alpha_at(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    betas,
    zero_tol: Optional[float] = None,
) -> np.ndarray:
    """Exact alpha*(beta) by bisection on p.

    beta at q = 1 is non-decreasing in p, so bisection finds the smallest p
    reaching the target; the answer is read off the straight line through the
    ROC points at the two final brackets (covering kernel segments).
    """
    _check_dims(rho1, rho2)
    out = []

    def points_at(p: float) -> List[Tuple[float, float]]:
        parts = neyman_pearson_povm(rho1, rho2, p, zero_tol)
        pts = []
        for q in (0.0, 1.0):
            a, b = errors_from_parts(parts, rho1, rho2, q)
            pts.append((b, a))
        return pts

    for target in np.asarray(betas, dtype=float).ravel():
        target = float(np.clip(target, 0.0, 1.0))
        lo, hi = 0.0, 1.0
        lo_pts = points_at(lo)
        if lo_pts[1][0] >= target:
            hi_pts = lo_pts
        else:
            hi_pts = points_at(hi)
            for _ in range(BISECTION_STEPS):
                mid = 0.5 * (lo + hi)
                mid_pts = points_at(mid)
                if mid_pts[1][0] >= target:
                    hi, hi_pts = mid, mid_pts
                else:
                    lo, lo_pts = mid, mid_pts
                if hi - lo < 1e-16:
                    break
        cand = sorted(set(lo_pts + hi_pts))
        # every candidate is achievable, so among equal betas the smallest alpha wins
        tied = [a for b, a in cand if abs(b - target) <= BETA_TIE]
        if tied:
            out.append(min(tied))
            continue
        below = [c for c in cand if c[0] < target]
        above = [c for c in cand if c[0] > target]
        if not below:
            out.append(min(a for b, a in above if b == above[0][0]))
            continue
        if not above:
            out.append(below[-1][1])
            continue
        b0, a0 = max(below, key=lambda c: (c[0], -c[1]))
        b1, a1 = min(above, key=lambda c: (c[0], c[1]))
        out.append(a0 + (a1 - a0) * (target - b0) / (b1 - b0))
    return np.array(out)


def hypothesis_testing_relative_entropy(
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    eps: float,
    unit: str = "bits",
) -> float:
    """D_H^eps(rho1||rho2) = -log beta*(alpha = eps).

    The optimal beta at a given alpha is the exact ROC read along the other
    axis: swapping the roles of the states maps (beta, alpha) to (alpha, beta).
    """
    _check_p("eps", eps)
    beta = float(exact_alpha_at(rho2, rho1, [eps], None)[0])
    if beta <= 0.0:
        return float("inf")
    value = -np.log(beta)
    return float(value / LN2) if unit == "bits" else float(value)
