"""Gaussian states: validation, Q_s from first and second moments, Fock truncation.

Conventions: quadratures ordered x1, p1, ..., xm, pm; Omega has per-mode
blocks [[0, 1], [-1, 0]]; the vacuum covariance is I/2 and a state is physical
when V + i Omega/2 >= 0.

Functions of W = -2 V i Omega are evaluated through the Hermitian matrix
K = S (-2 i Omega) S with S = V^(1/2), since W = S K S^-1 and K has the same
eigenvalues (+-2 nu for each symplectic eigenvalue nu).  Two consequences are
used throughout:

    V(s) = S h_s(K) S,   h_s(k) = (1 + r) / ((1 - r) |k|),  r = ((|k|-1)/(|k|+1))^s
    det(V(s) + i Omega/2) = prod_nu r / (1 - r)^2
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from thewalrus.quantum import density_matrix
from thewalrus.symplectic import xpxp_to_xxpp

try:
    from .dv_states import DensityMatrix, QsEvaluator
    from .errors import (
        AsymmetricCovariance,
        CutoffTooSmall,
        DimensionMismatch,
        IllConditioned,
        ParameterOutOfRange,
        SingularGaussianState,
        Unphysical,
        UnsupportedInput,
    )
    from .linalg_core import hermitize, psd_matrix_function
except ImportError:
    from dv_states import DensityMatrix, QsEvaluator
    from errors import (
        AsymmetricCovariance,
        CutoffTooSmall,
        DimensionMismatch,
        IllConditioned,
        ParameterOutOfRange,
        SingularGaussianState,
        Unphysical,
        UnsupportedInput,
    )
    from linalg_core import hermitize, psd_matrix_function

logger = logging.getLogger(__name__)

# --- Configuration ---
SYMMETRY_TOL = 1e-10
PHYSICAL_TOL = 1e-8
PURITY_MARGIN = 1e-8  # nu must exceed 1/2 by this much for Q_s formulas
FOCK_HBAR = 1.0  # vacuum covariance I/2
SUPPORT_CUT = 1e-14  # eigenvalues of a truncated matrix below this fraction of the largest are dropped
ENDPOINT_STEP = 1e-6
MAX_CONDITION = 1e8
MAX_FOCK_MODES = 2
MAX_CUTOFF = 64
DEFAULT_MAX_DEFICIT = 1e-6


# --- Types ---

@dataclass(frozen=True, eq=False)
class GaussianState:
    modes: int
    mean: np.ndarray
    cov: np.ndarray


@dataclass(frozen=True, eq=False)
class GaussianQsWork:
    """Intermediate matrices of one Q_s evaluation (roles as in Tr[rho2^s rho1^(1-s)])."""

    W1: np.ndarray
    W2: np.ndarray
    V1s: np.ndarray
    V2s: np.ndarray
    Z1: float
    Z2: float
    delta: np.ndarray


@dataclass(frozen=True, eq=False)
class FockState:
    """Fock-basis truncation of a Gaussian state; not renormalized."""

    matrix: np.ndarray
    trace_deficit: float
    cutoff: int
    modes: int

    def density(self) -> DensityMatrix:
        return DensityMatrix(matrix=self.matrix)


def symplectic_form(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


# --- Construction and validation ---

def validate_gaussian(mean, cov, modes: Optional[int] = None) -> GaussianState:
    """Check shapes, symmetry and the uncertainty relation.

    Raises:
        DimensionMismatch, AsymmetricCovariance, Unphysical
    """
    cov = np.asarray(cov, dtype=float)
    mean = np.asarray(mean, dtype=float).ravel()
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
        raise DimensionMismatch(f"covariance must be 2m x 2m, got shape {cov.shape}")
    m = cov.shape[0] // 2 if modes is None else int(modes)
    if cov.shape[0] != 2 * m or mean.size != 2 * m:
        raise DimensionMismatch(
            f"{m} modes need a {2 * m}-vector and {2 * m}x{2 * m} covariance, "
            f"got {mean.size} and {cov.shape}"
        )
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL:
        raise AsymmetricCovariance("covariance matrix is not symmetric")
    cov = 0.5 * (cov + cov.T)
    test = cov + 0.5j * symplectic_form(m)
    lowest = float(linalg.eigvalsh(test)[0])
    if lowest < -PHYSICAL_TOL:
        raise Unphysical(f"V + i Omega/2 has eigenvalue {lowest:.3e}")
    return GaussianState(modes=m, mean=mean, cov=cov)


def vacuum(modes: int = 1) -> GaussianState:
    return validate_gaussian(np.zeros(2 * modes), 0.5 * np.eye(2 * modes))


def thermal_state(nbar: float) -> GaussianState:
    if nbar < 0:
        raise ParameterOutOfRange(f"thermal number must be >= 0, got {nbar}")
    return validate_gaussian(np.zeros(2), (nbar + 0.5) * np.eye(2))


def product_state(*states: GaussianState) -> GaussianState:
    mean = np.concatenate([g.mean for g in states])
    cov = linalg.block_diag(*[g.cov for g in states])
    return validate_gaussian(mean, cov)


def tmsv_through_thermal_loss(nbar: float, tau: float, nth: float) -> GaussianState:
    """Two-mode squeezed vacuum with mode B sent through a thermal loss channel."""
    if nbar < 0 or nth < 0 or not 0.0 <= tau <= 1.0:
        raise ParameterOutOfRange(
            f"need nbar >= 0, nth >= 0, tau in [0, 1]; got {nbar}, {nth}, {tau}"
        )
    a = nbar + 0.5
    b = tau * a + (1.0 - tau) * (nth + 0.5)
    c = np.sqrt(tau) * np.sqrt(nbar * (nbar + 1.0))
    cov = np.zeros((4, 4))
    cov[:2, :2] = a * np.eye(2)
    cov[2:, 2:] = b * np.eye(2)
    cov[:2, 2:] = c * np.diag([1.0, -1.0])
    cov[2:, :2] = c * np.diag([1.0, -1.0])
    return validate_gaussian(np.zeros(4), cov)


def two_mode_squeezed_vacuum(nbar: float) -> GaussianState:
    return tmsv_through_thermal_loss(nbar, 1.0, 0.0)


# --- Spectral plumbing ---

@dataclass(frozen=True, eq=False)
class _Spectral:
    sqrt_v: np.ndarray
    sqrt_v_inv: np.ndarray
    k: np.ndarray  # eigenvalues of K, +-2 nu
    u: np.ndarray

    @property
    def nu(self) -> np.ndarray:
        """Symplectic eigenvalues, one per mode (from the positive eigenvalues of K)."""
        return np.sort(self.k[self.k > 0]) / 2.0

    def fn(self, values: np.ndarray) -> np.ndarray:
        return (self.u * values) @ self.u.conj().T


def _spectral(g: GaussianState) -> _Spectral:
    w, e = linalg.eigh(g.cov)
    if w[0] <= 0:
        raise Unphysical("covariance matrix is not positive definite")
    if np.sqrt(w[-1] / w[0]) > MAX_CONDITION:
        raise IllConditioned(f"sqrt(cond(V)) = {np.sqrt(w[-1] / w[0]):.3e} exceeds {MAX_CONDITION:g}")
    sqrt_v = (e * np.sqrt(w)) @ e.T
    sqrt_v_inv = (e / np.sqrt(w)) @ e.T
    k_mat = hermitize(-2.0 * sqrt_v @ (1j * symplectic_form(g.modes)) @ sqrt_v)
    k, u = linalg.eigh(k_mat)
    return _Spectral(sqrt_v=sqrt_v, sqrt_v_inv=sqrt_v_inv, k=k, u=u)


def symplectic_eigenvalues(g: GaussianState) -> np.ndarray:
    return _spectral(g).nu


def _require_mixed(sp: _Spectral) -> None:
    lowest = float(np.min(sp.nu))
    if lowest < 0.5 + PURITY_MARGIN:
        raise SingularGaussianState(
            f"symplectic eigenvalue {lowest:.12g} is too close to 1/2 (pure or near-pure state)"
        )


def gaussian_zeta(g: GaussianState) -> float:
    """Z = sqrt(det(V + i Omega/2)) = prod sqrt(nu^2 - 1/4); zero for pure states."""
    nu = symplectic_eigenvalues(g)
    return float(np.prod(np.sqrt(np.clip(nu * nu - 0.25, 0.0, None))))


def _ratio(abs_k: np.ndarray, s: float) -> Tuple[np.ndarray, np.ndarray]:
    """r = y^s and 1 - r for y = (|k|-1)/(|k|+1), with 1 - r from expm1."""
    log_y = np.log((abs_k - 1.0) / (abs_k + 1.0))
    r = np.exp(s * log_y)
    return r, -np.expm1(s * log_y)


def _v_power(sp: _Spectral, s: float) -> np.ndarray:
    abs_k = np.abs(sp.k)
    r, one_minus_r = _ratio(abs_k, s)
    h = (1.0 + r) / (one_minus_r * abs_k)
    v = np.real(sp.sqrt_v @ sp.fn(h) @ sp.sqrt_v)
    return 0.5 * (v + v.T)


def _v_power_derivative(sp: _Spectral, s: float) -> np.ndarray:
    abs_k = np.abs(sp.k)
    r, one_minus_r = _ratio(abs_k, s)
    log_y = np.log((abs_k - 1.0) / (abs_k + 1.0))
    dh = 2.0 * r * log_y / (one_minus_r ** 2 * abs_k)
    v = np.real(sp.sqrt_v @ sp.fn(dh) @ sp.sqrt_v)
    return 0.5 * (v + v.T)


def _w_power(sp: _Spectral, s: float) -> np.ndarray:
    """W(s) = ((W+1)^s + (W-1)^s) / ((W+1)^s - (W-1)^s)."""
    abs_k = np.abs(sp.k)
    r, one_minus_r = _ratio(abs_k, s)
    f = np.sign(sp.k) * (1.0 + r) / one_minus_r
    return sp.sqrt_v @ sp.fn(f) @ sp.sqrt_v_inv


def _half_log_norm(sp: _Spectral, s: float) -> Tuple[float, float]:
    """(1/2) ln[det(V(s) + i Omega/2) / det(V + i Omega/2)^s] and its s-derivative."""
    nu = sp.nu
    log_x = np.log((2.0 * nu - 1.0) / (2.0 * nu + 1.0))
    one_minus = -np.expm1(s * log_x)
    x_s = np.exp(s * log_x)
    value = -np.sum(np.log(one_minus) + s * np.log(nu + 0.5))
    deriv = np.sum(x_s * log_x / one_minus - np.log(nu + 0.5))
    return float(value), float(deriv)


def _log_overlap(a: _Spectral, b: _Spectral, delta: np.ndarray, s: float) -> Tuple[float, float]:
    """ln Tr[rho_a^s rho_b^(1-s)] and its derivative in s."""
    na, dna = _half_log_norm(a, s)
    nb, dnb = _half_log_norm(b, 1.0 - s)
    m = _v_power(a, s) + _v_power(b, 1.0 - s)
    dm = _v_power_derivative(a, s) - _v_power_derivative(b, 1.0 - s)
    chol = linalg.cho_factor(m)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol[0]))))
    m_inv_delta = linalg.cho_solve(chol, delta)
    m_inv_dm = linalg.cho_solve(chol, dm)
    value = na + nb - 0.5 * float(delta @ m_inv_delta) - 0.5 * logdet
    deriv = (
        dna
        - dnb
        - 0.5 * float(np.trace(m_inv_dm))
        + 0.5 * float(m_inv_delta @ dm @ m_inv_delta)
    )
    return value, deriv


def _prepare(g1: GaussianState, g2: GaussianState) -> Tuple[_Spectral, _Spectral, np.ndarray]:
    if g1.modes != g2.modes:
        raise DimensionMismatch(f"mode counts differ: {g1.modes} vs {g2.modes}")
    sp1, sp2 = _spectral(g1), _spectral(g2)
    _require_mixed(sp1)
    _require_mixed(sp2)
    return sp1, sp2, g2.mean - g1.mean


def _check_open_s(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ParameterOutOfRange(f"s must lie strictly inside (0, 1), got {s}")


# --- Q_s ---

def gaussian_qs_work(g1: GaussianState, g2: GaussianState, s: float) -> GaussianQsWork:
    sp1, sp2, delta = _prepare(g1, g2)
    return GaussianQsWork(
        W1=_w_power(sp1, 1.0),
        W2=_w_power(sp2, 1.0),
        V1s=_v_power(sp1, 1.0 - s),
        V2s=_v_power(sp2, s),
        Z1=gaussian_zeta(g1),
        Z2=gaussian_zeta(g2),
        delta=delta,
    )


def w_power(g: GaussianState, s: float) -> np.ndarray:
    """W(s) for a single state (W(1) = W = -2 V i Omega)."""
    sp = _spectral(g)
    _require_mixed(sp)
    return _w_power(sp, s)


def v_power(g: GaussianState, s: float) -> np.ndarray:
    """Covariance of the normalized state rho^s / Tr rho^s."""
    sp = _spectral(g)
    _require_mixed(sp)
    return _v_power(sp, s)


def gaussian_q_s(g1: GaussianState, g2: GaussianState, s: float) -> float:
    """Q_s = Tr[rho2^s rho1^(1-s)] from the moments."""
    _check_open_s(s)
    sp1, sp2, delta = _prepare(g1, g2)
    value, _ = _log_overlap(sp2, sp1, delta, s)
    return float(np.exp(value))


def gaussian_q_s_logderiv(g1: GaussianState, g2: GaussianState, s: float) -> float:
    """q_s = -d/ds ln Q_s."""
    _check_open_s(s)
    sp1, sp2, delta = _prepare(g1, g2)
    _, deriv = _log_overlap(sp2, sp1, delta, s)
    return -deriv


class GaussianQsEvaluator(QsEvaluator):
    """Q_s evaluator for a Gaussian pair; endpoints use s = 1e-6 and 1 - 1e-6."""

    def __init__(self, g1: GaussianState, g2: GaussianState):
        self.g1, self.g2 = g1, g2
        self._sp1, self._sp2, self._delta = _prepare(g1, g2)

    def _eval(self, s: float) -> Tuple[float, float]:
        if not 0.0 <= s <= 1.0:
            raise ParameterOutOfRange(f"s must lie in [0, 1], got {s}")
        s = min(max(s, ENDPOINT_STEP), 1.0 - ENDPOINT_STEP)
        log_q, dlog_q = _log_overlap(self._sp2, self._sp1, self._delta, s)
        q = float(np.exp(log_q))
        return q, q * dlog_q

    def value(self, s: float) -> float:
        return self._eval(s)[0]

    def derivative(self, s: float) -> float:
        return self._eval(s)[1]


def gaussian_qs_evaluator(g1: GaussianState, g2: GaussianState) -> GaussianQsEvaluator:
    return GaussianQsEvaluator(g1, g2)


def gaussian_relative_entropies(g1: GaussianState, g2: GaussianState):
    """Stein endpoints (nats) from the evaluator's one-sided derivatives."""
    return gaussian_qs_evaluator(g1, g2).stein_entropies()


# --- Fock truncation ---

def gaussian_to_fock(
    g: GaussianState,
    cutoff: int,
    max_deficit: float = DEFAULT_MAX_DEFICIT,
) -> FockState:
    """Density matrix in the Fock basis, photon numbers < cutoff per mode.

    The elements come from thewalrus' multidimensional Hermite recursion, so
    only the kept block is ever built.

    Raises:
        UnsupportedInput: more than two modes.
        CutoffTooSmall: the kept block misses more than ``max_deficit`` of the trace.
    """
    if g.modes > MAX_FOCK_MODES:
        raise UnsupportedInput(f"Fock truncation supports at most {MAX_FOCK_MODES} modes")
    if not 1 <= cutoff <= MAX_CUTOFF:
        raise ParameterOutOfRange(f"cutoff must lie in [1, {MAX_CUTOFF}], got {cutoff}")
    m = g.modes

    # thewalrus orders quadratures xxpp and puts the vacuum at hbar/2
    rho = density_matrix(
        xpxp_to_xxpp(g.mean),
        xpxp_to_xxpp(g.cov),
        normalize=False,
        cutoff=cutoff,
        hbar=FOCK_HBAR,
    )
    if m == 2:
        # (i1, j1, i2, j2) -> (i1, i2, j1, j2)
        rho = rho.transpose(0, 2, 1, 3)
    block = hermitize(np.asarray(rho, dtype=complex).reshape(cutoff ** m, cutoff ** m))
    deficit = abs(1.0 - float(np.real(np.trace(block))))
    logger.debug("fock truncation: modes=%d cutoff=%d deficit=%.3e", m, cutoff, deficit)
    if deficit > max_deficit:
        raise CutoffTooSmall(
            f"cutoff {cutoff} keeps trace {1.0 - deficit:.10f}; deficit {deficit:.3e} > {max_deficit:.1e}"
        )
    return FockState(matrix=block, trace_deficit=deficit, cutoff=cutoff, modes=m)


def gaussian_fidelity_truncated(
    g1: GaussianState,
    g2: GaussianState,
    cutoff: int,
    max_deficit: float = DEFAULT_MAX_DEFICIT,
) -> Tuple[float, float]:
    """Fidelity of the truncated matrices and the summed trace deficits as its error bar.

    Uses Tr sqrt(A1^(1/2) A2 A1^(1/2)) with one eigendecomposition of A1,
    restricted to its numerical support.
    """
    if g1.modes != g2.modes:
        raise DimensionMismatch(f"mode counts differ: {g1.modes} vs {g2.modes}")
    f1 = gaussian_to_fock(g1, cutoff, max_deficit)
    f2 = gaussian_to_fock(g2, cutoff, max_deficit)
    w, v = linalg.eigh(f1.matrix)
    keep = w > SUPPORT_CUT * max(float(w[-1]), 0.0)
    half = v[:, keep] * np.sqrt(w[keep])
    inner = linalg.eigvalsh(hermitize(half.conj().T @ f2.matrix @ half))
    value = float(np.clip(np.sum(np.sqrt(np.clip(inner, 0.0, None))), 0.0, 1.0))
    return value, f1.trace_deficit + f2.trace_deficit


def fock_q_s(f1: FockState, f2: FockState, s: float) -> float:
    """Tr[A2^s A1^(1-s)] on truncated matrices (no renormalization)."""
    a = psd_matrix_function(f2.matrix, "power", s)
    b = psd_matrix_function(f1.matrix, "power", 1.0 - s)
    return float(np.real(np.trace(a @ b)))
