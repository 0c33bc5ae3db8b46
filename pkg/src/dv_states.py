"""Finite-dimensional states, fidelity, and the overlap decomposition behind Q_s.

With rho1 = sum_i mu_i |f_i><f_i| and rho2 = sum_j lambda_j |e_j><e_j|, every
trace of the form Tr[rho2^s rho1^(1-s)] collapses to a sum over pairs (i, j)
weighted by c_ij = |<e_j|f_i>|^2.  Q_s, its derivative and both relative
entropies are computed from that single table.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

try:
    from .errors import DimensionMismatch, ParameterOutOfRange, TraceNotOne
    from .linalg_core import (
        CLAMP_RTOL,
        as_hermitian,
        hermitize,
        psd_eigenvalues,
        psd_matrix_function,
    )
    from .optimize import golden_section_min
except ImportError:
    from errors import DimensionMismatch, ParameterOutOfRange, TraceNotOne
    from linalg_core import (
        CLAMP_RTOL,
        as_hermitian,
        hermitize,
        psd_eigenvalues,
        psd_matrix_function,
    )
    from optimize import golden_section_min

logger = logging.getLogger(__name__)

# --- Configuration ---
TRACE_TOL = 1e-8
DROP_C = 1e-14
DIVERGENCE_MASS = 1e-12
CHERNOFF_TOL = 1e-10
FIDELITY_SNAP = 1e-13  # round-off distance from 1 treated as identical states
LN2 = float(np.log(2.0))


# --- Types ---

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix. Build through ``validate_density``."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True, eq=False)
class OverlapDecomposition:
    """Flattened (c, lambda, mu) table; lambda from rho2, mu from rho1."""

    c: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    def entries(self) -> List[Tuple[float, float, float]]:
        return [(float(a), float(b), float(m)) for a, b, m in zip(self.c, self.lam, self.mu)]

    def __len__(self) -> int:
        return int(self.c.size)


@dataclass(frozen=True)
class RelativeEntropies:
    s12: float
    s21: float
    unit: str = "nats"

    def to(self, unit: str) -> "RelativeEntropies":
        if unit == self.unit:
            return self
        factor = 1.0 / LN2 if unit == "bits" else LN2
        return RelativeEntropies(self.s12 * factor, self.s21 * factor, unit)


# --- Construction ---

def validate_density(matrix) -> DensityMatrix:
    """Check Hermiticity, positivity and unit trace.

    Raises:
        NonHermitianInput, NotPositiveSemidefinite, TraceNotOne
    """
    m = as_hermitian(matrix)
    psd_eigenvalues(m)
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace is {tr:.12g}, expected 1")
    return DensityMatrix(matrix=hermitize(m))


def pure_state(vector) -> DensityMatrix:
    """|psi><psi| for a (not necessarily normalized) state vector."""
    v = np.asarray(vector, dtype=complex).ravel()
    norm = linalg.norm(v)
    if norm == 0:
        raise ParameterOutOfRange("state vector is zero")
    v = v / norm
    return validate_density(np.outer(v, v.conj()))


def tensor_product(*states: DensityMatrix) -> DensityMatrix:
    matrix = reduce(np.kron, [s.matrix for s in states])
    return DensityMatrix(matrix=hermitize(matrix))


def tensor_power(rho: DensityMatrix, n: int) -> DensityMatrix:
    if n < 1:
        raise ParameterOutOfRange(f"number of copies must be >= 1, got {n}")
    return tensor_product(*([rho] * n))


def random_density(
    dim: int, rng: np.random.Generator, rank: Optional[int] = None
) -> DensityMatrix:
    """Ginibre-ensemble density matrix of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(matrix=hermitize(m / np.real(np.trace(m))))


def random_pure(dim: int, rng: np.random.Generator) -> DensityMatrix:
    return pure_state(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def _check_dims(rho1: DensityMatrix, rho2: DensityMatrix) -> None:
    if rho1.dim != rho2.dim:
        raise DimensionMismatch(f"state dimensions differ: {rho1.dim} vs {rho2.dim}")


# --- Fidelity and decomposition ---

def fidelity(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """F = || sqrt(rho1) sqrt(rho2) ||_1, the sum of singular values."""
    _check_dims(rho1, rho2)
    a = psd_matrix_function(rho1.matrix, "sqrt")
    b = psd_matrix_function(rho2.matrix, "sqrt")
    value = float(np.sum(linalg.svdvals(a @ b)))
    if value > 1.0 - FIDELITY_SNAP:
        return 1.0
    return max(value, 0.0)


def _clamped_spectrum(rho: DensityMatrix) -> Tuple[np.ndarray, np.ndarray]:
    es = psd_eigenvalues(rho.matrix)
    lam = es.eigenvalues
    top = max(float(lam[0]), 0.0)
    lam = np.where(lam > CLAMP_RTOL * top, lam, 0.0)
    return lam, es.eigenvectors


def overlap_decomposition(rho1: DensityMatrix, rho2: DensityMatrix) -> OverlapDecomposition:
    """Tabulate c_ij = |<e_j(rho2)|f_i(rho1)>|^2 with mu_i from rho1, lambda_j from rho2."""
    _check_dims(rho1, rho2)
    mu, f = _clamped_spectrum(rho1)
    lam, e = _clamped_spectrum(rho2)
    c = np.abs(f.conj().T @ e) ** 2  # rows i (rho1), columns j (rho2)
    mu_grid, lam_grid = np.meshgrid(mu, lam, indexing="ij")
    c, mu_flat, lam_flat = c.ravel(), mu_grid.ravel(), lam_grid.ravel()
    keep = c >= DROP_C
    return OverlapDecomposition(c=c[keep], lam=lam_flat[keep], mu=mu_flat[keep])


def _spow(x: np.ndarray, t: float) -> np.ndarray:
    """x^t with the support convention: zero wherever x = 0, including t = 0."""
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, safe ** t, 0.0)


def _check_s(s: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ParameterOutOfRange(f"s must lie in [0, 1], got {s}")


def q_s(d: OverlapDecomposition, s: float) -> float:
    """Q_s = Tr[rho2^s rho1^(1-s)] = sum c lambda^s mu^(1-s)."""
    _check_s(s)
    return float(np.sum(d.c * _spow(d.lam, s) * _spow(d.mu, 1.0 - s)))


def q_s_derivative(d: OverlapDecomposition, s: float) -> float:
    """dQ_s/ds; terms with a vanishing eigenvalue contribute zero."""
    _check_s(s)
    mask = (d.lam > 0) & (d.mu > 0)
    c, lam, mu = d.c[mask], d.lam[mask], d.mu[mask]
    return float(np.sum(c * lam ** s * mu ** (1.0 - s) * (np.log(lam) - np.log(mu))))


def _one_relative_entropy(c, a, b) -> float:
    """S(A||B) from the table, A's eigenvalue ``a`` and B's ``b`` per entry."""
    weight = c * a
    if np.any((b == 0) & (weight > DIVERGENCE_MASS)):
        return float("inf")
    mask = (a > 0) & (b > 0)
    value = float(np.sum(weight[mask] * (np.log(a[mask]) - np.log(b[mask]))))
    return max(value, 0.0)


def relative_entropies(d: OverlapDecomposition, unit: str = "nats") -> RelativeEntropies:
    """S(rho1||rho2) and S(rho2||rho1); +inf when support containment fails."""
    if unit not in ("nats", "bits"):
        raise ValueError(f"unknown unit: {unit}")
    out = RelativeEntropies(
        s12=_one_relative_entropy(d.c, d.mu, d.lam),
        s21=_one_relative_entropy(d.c, d.lam, d.mu),
    )
    return out.to(unit)


def relative_entropy_direct(rho_a: DensityMatrix, rho_b: DensityMatrix, unit: str = "nats") -> float:
    """Tr[rho_a ln rho_a - rho_a ln rho_b] from matrix logarithms on the supports."""
    _check_dims(rho_a, rho_b)
    support_b = psd_matrix_function(rho_b.matrix, "power", 0.0)
    leak = float(np.real(np.trace(rho_a.matrix @ (np.eye(rho_a.dim) - support_b))))
    if leak > DIVERGENCE_MASS:
        return float("inf")
    log_a = psd_matrix_function(rho_a.matrix, "log")
    log_b = psd_matrix_function(rho_b.matrix, "log")
    value = max(float(np.real(np.trace(rho_a.matrix @ (log_a - log_b)))), 0.0)
    return value / LN2 if unit == "bits" else value


def chernoff_s_star(d: OverlapDecomposition) -> Tuple[float, float]:
    """Minimize Q_s over [0, 1]; Q_s is log-convex so golden section is enough.

    A flat Q_s (identical states) returns s_star = 0.5.
    """
    probe = [q_s(d, s) for s in np.linspace(0.0, 1.0, 11)]
    if max(probe) - min(probe) < 1e-14:
        logger.debug("Q_s is flat; using s_star = 0.5")
        return 0.5, q_s(d, 0.5)
    s_star, q_star = golden_section_min(lambda s: q_s(d, s), 0.0, 1.0, CHERNOFF_TOL)
    for edge in (0.0, 1.0):
        q_edge = q_s(d, edge)
        if q_edge < q_star:
            s_star, q_star = edge, q_edge
    return s_star, q_star


# --- Q_s evaluators ---

class QsEvaluator(ABC):
    """s -> (Q_s, dQ_s/ds) on [0, 1] for Q_s = Tr[rho2^s rho1^(1-s)]."""

    @abstractmethod
    def value(self, s: float) -> float:
        ...

    @abstractmethod
    def derivative(self, s: float) -> float:
        ...

    def log_derivative(self, s: float) -> float:
        """d ln Q_s / ds."""
        return self.derivative(s) / self.value(s)

    def stein_entropies(self) -> RelativeEntropies:
        """(S12, S21) in nats from the endpoint derivatives: Q'(0) = -S12, Q'(1) = S21."""
        return RelativeEntropies(
            s12=max(-self.derivative(0.0), 0.0), s21=max(self.derivative(1.0), 0.0)
        )


class DecompositionQs(QsEvaluator):
    """Finite-dimensional evaluator backed by an overlap decomposition."""

    def __init__(self, decomposition: OverlapDecomposition):
        self.decomposition = decomposition

    @classmethod
    def from_states(cls, rho1: DensityMatrix, rho2: DensityMatrix) -> "DecompositionQs":
        return cls(overlap_decomposition(rho1, rho2))

    def value(self, s: float) -> float:
        return q_s(self.decomposition, s)

    def derivative(self, s: float) -> float:
        return q_s_derivative(self.decomposition, s)

    def stein_entropies(self) -> RelativeEntropies:
        return relative_entropies(self.decomposition)


class PowerQs(QsEvaluator):
    """Q_s of N identical copies: Q^N, with derivative N Q^(N-1) Q'."""

    def __init__(self, base: QsEvaluator, copies: int):
        if copies < 1:
            raise ParameterOutOfRange(f"number of copies must be >= 1, got {copies}")
        self.base = base
        self.copies = copies

    def value(self, s: float) -> float:
        return self.base.value(s) ** self.copies

    def derivative(self, s: float) -> float:
        n = self.copies
        return n * self.base.value(s) ** (n - 1) * self.base.derivative(s)

    def stein_entropies(self) -> RelativeEntropies:
        one = self.base.stein_entropies()
        return RelativeEntropies(self.copies * one.s12, self.copies * one.s21)


class ProductQs(QsEvaluator):
    """Q_s of a tensor product of non-identical pairs."""

    def __init__(self, factors: Sequence[QsEvaluator]):
        if not factors:
            raise ParameterOutOfRange("a product needs at least one factor")
        self.factors = list(factors)

    def value(self, s: float) -> float:
        return float(np.prod([f.value(s) for f in self.factors]))

    def derivative(self, s: float) -> float:
        total = 0.0
        values = [f.value(s) for f in self.factors]
        for k, f in enumerate(self.factors):
            others = np.prod(values[:k] + values[k + 1:]) if len(values) > 1 else 1.0
            total += others * f.derivative(s)
        return float(total)

    def stein_entropies(self) -> RelativeEntropies:
        parts = [f.stein_entropies() for f in self.factors]
        return RelativeEntropies(sum(p.s12 for p in parts), sum(p.s21 for p in parts))
