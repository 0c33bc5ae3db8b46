"""Dense Hermitian linear algebra shared by every other module.

Matrix functions are computed from the Hermitian eigendecomposition; nothing
here calls a generic ``sqrtm``/``logm`` because the support conventions
(0^s = 0, log restricted to the support) have to be explicit.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

try:
    from .errors import NonHermitianInput, NotPositiveSemidefinite, ParameterOutOfRange
except ImportError:
    from errors import NonHermitianInput, NotPositiveSemidefinite, ParameterOutOfRange

logger = logging.getLogger(__name__)

# --- Tolerances ---
HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10
CLAMP_RTOL = 1e-14
ZERO_RTOL = 1e-10
ZERO_ATOL = 1e-14


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


class Projectors(NamedTuple):
    plus: np.ndarray
    minus: np.ndarray
    zero: np.ndarray


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return (M + M^dagger)/2, removing round-off asymmetry."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def as_hermitian(m) -> np.ndarray:
    """Validate that ``m`` is a square Hermitian matrix and return it as complex.

    Raises:
        NonHermitianInput: not square, or asymmetric beyond 1e-12 of the largest entry.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonHermitianInput("matrix has non-finite entries")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if asym > HERMITIAN_RTOL * scale:
        raise NonHermitianInput(
            f"matrix is not Hermitian: max |M - M^H| = {asym:.3e} (scale {scale:.3e})"
        )
    return m


def hermitian_eig(m) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    m = as_hermitian(m)
    w, v = linalg.eigh(m)
    return EigenSystem(eigenvalues=w[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def _apply(es: EigenSystem, values: np.ndarray) -> np.ndarray:
    u = es.eigenvectors
    return hermitize((u * values) @ u.conj().T)


def psd_eigenvalues(m) -> EigenSystem:
    """Eigendecomposition with the PSD check used by every matrix function.

    Raises:
        NotPositiveSemidefinite: an eigenvalue below -1e-10 times the largest one.
    """
    es = hermitian_eig(m)
    lam = es.eigenvalues
    top = float(lam[0]) if lam.size else 0.0
    if lam.size and lam[-1] < -PSD_RTOL * max(top, 0.0) - ZERO_ATOL:
        raise NotPositiveSemidefinite(
            f"smallest eigenvalue {lam[-1]:.3e} is below tolerance (largest {top:.3e})"
        )
    return es


def psd_matrix_function(m, fn: str, s: Optional[float] = None) -> np.ndarray:
    """Apply ``sqrt``, ``power`` (with exponent ``s``) or ``log`` to a PSD matrix.

    Eigenvalues at or below 1e-14 times the largest are treated as exact zeros:
    0^s = 0 for s > 0, power(0) is the support projector, and log acts on the
    support only (zero on the kernel).

    Args:
        m: Hermitian positive semidefinite matrix.
        fn: One of "sqrt", "power", "log".
        s: Exponent for "power"; must be >= 0.

    Returns:
        The Hermitian matrix U f(lambda) U^dagger.
    """
    es = psd_eigenvalues(m)
    lam = es.eigenvalues
    top = max(float(lam[0]), 0.0) if lam.size else 0.0
    support = lam > CLAMP_RTOL * top
    safe = np.where(support, lam, 1.0)

    if fn == "sqrt":
        fn, s = "power", 0.5
    if fn == "power":
        if s is None or s < 0:
            raise ParameterOutOfRange(f"power exponent must be >= 0, got {s}")
        if s == 0:
            values = support.astype(float)
        else:
            values = np.where(support, safe ** s, 0.0)
    elif fn == "log":
        values = np.where(support, np.log(safe), 0.0)
    else:
        raise ValueError(f"unknown matrix function: {fn}")
    return _apply(es, values)


def trace_norm(m) -> float:
    """Sum of absolute eigenvalues."""
    m = as_hermitian(m)
    return float(np.sum(np.abs(linalg.eigvalsh(m))))


def default_zero_tol(eigenvalues: np.ndarray) -> float:
    radius = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    return max(ZERO_RTOL * radius, ZERO_ATOL)


def signed_projectors(m, zero_tol: Optional[float] = None) -> Projectors:
    """Projectors onto the positive, negative and (numerically) zero eigenspaces.

    Eigenvalues with |lambda| <= zero_tol go to the zero projector, and so does any
    eigenvalue chained to one of them by gaps smaller than zero_tol, so a
    degenerate cluster is never split between two projectors.
    """
    return projectors_from_eig(hermitian_eig(m), zero_tol)


def projectors_from_eig(es: EigenSystem, zero_tol: Optional[float] = None) -> Projectors:
    """``signed_projectors`` on an existing eigendecomposition."""
    lam = es.eigenvalues
    tol = default_zero_tol(lam) if zero_tol is None else float(zero_tol)

    is_zero = np.abs(lam) <= tol
    changed = bool(is_zero.any())
    while changed:
        changed = False
        zero_vals = lam[is_zero]
        for i in np.flatnonzero(~is_zero):
            if np.min(np.abs(zero_vals - lam[i])) < tol:
                is_zero[i] = True
                changed = True

    u = es.eigenvectors
    plus = (lam > 0) & ~is_zero
    minus = (lam < 0) & ~is_zero

    def proj(mask: np.ndarray) -> np.ndarray:
        v = u[:, mask]
        return hermitize(v @ v.conj().T)

    return Projectors(plus=proj(plus), minus=proj(minus), zero=proj(is_zero))
