"""One-dimensional searches used by the Chernoff, Hoeffding and s_opt routines."""

import logging
import math
from typing import Callable, Tuple

import numpy as np

logger = logging.getLogger(__name__)

invphi = (math.sqrt(5) - 1) / 2  # 1 / phi
invphi2 = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section_min(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10
) -> Tuple[float, float]:
    """Golden-section search for the minimum of a unimodal function.

    Reuses one function evaluation per iteration.

    Args:
        f: Objective, assumed to have a single local minimum in [a, b].
        a: Left end of the bracket.
        b: Right end of the bracket.
        tol: Width of the final bracket.

    Returns:
        (x, f(x)) at the midpoint of the final bracket.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    n = int(math.ceil(math.log(tol / h) / math.log(invphi)))
    logger.debug("golden section on [%g, %g]: %d iterations", a, b, n)

    c = a + invphi2 * h
    d = a + invphi * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc < yd:
            b = d
            d = c
            yd = yc
            h = invphi * h
            c = a + invphi2 * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = invphi * h
            d = a + invphi * h
            yd = f(d)

    lo, hi = (a, d) if yc < yd else (c, b)
    x = 0.5 * (lo + hi)
    return x, f(x)


def scan_then_maximize(
    f: Callable[[float], float],
    a: float,
    b: float,
    scan_points: int = 2048,
    tol: float = 1e-8,
) -> Tuple[float, float]:
    """Maximize f on [a, b]: coarse grid scan, then golden section around the best cell.

    The grid endpoints are kept as candidates so a boundary maximum is never lost.

    Returns:
        (argmax, max).
    """
    grid = np.linspace(a, b, scan_points)
    values = np.array([f(float(x)) for x in grid])
    values = np.where(np.isfinite(values), values, -np.inf)
    k = int(np.argmax(values))

    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, scan_points - 1)]
    x, neg = golden_section_min(lambda t: -f(t), float(lo), float(hi), tol)
    best_x, best_f = x, -neg
    if values[k] > best_f:
        best_x, best_f = float(grid[k]), float(values[k])
    return best_x, best_f
