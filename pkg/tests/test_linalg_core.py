import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import NonHermitianInput, NotPositiveSemidefinite, ParameterOutOfRange
from src.linalg_core import (
    as_hermitian,
    hermitian_eig,
    psd_matrix_function,
    signed_projectors,
    trace_norm,
)


class TestValidation:
    def test_rejects_non_square(self):
        with pytest.raises(NonHermitianInput):
            as_hermitian(np.zeros((2, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(NonHermitianInput):
            as_hermitian(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_accepts_complex_hermitian(self):
        m = np.array([[1.0, 0.5j], [-0.5j, 2.0]])
        assert_allclose(as_hermitian(m), m)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(NotPositiveSemidefinite):
            psd_matrix_function(np.diag([1.0, -0.1]), "sqrt")


class TestEigen:
    def test_descending_and_reconstructs(self, rng):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = g + g.conj().T
        es = hermitian_eig(m)
        assert np.all(np.diff(es.eigenvalues) <= 0)
        assert_allclose(es.reconstruct(), m, atol=1e-12)


class TestMatrixFunctions:
    def test_sqrt_squares_back(self, rng):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = g @ g.conj().T
        root = psd_matrix_function(m, "sqrt")
        assert_allclose(root @ root, m, atol=1e-10)

    def test_power_zero_is_support_projector(self):
        m = np.diag([0.7, 0.3, 0.0])
        assert_allclose(psd_matrix_function(m, "power", 0.0), np.diag([1.0, 1.0, 0.0]))

    def test_power_keeps_kernel_at_zero(self):
        m = np.diag([0.5, 0.0])
        assert_allclose(psd_matrix_function(m, "power", 0.3), np.diag([0.5 ** 0.3, 0.0]))

    def test_log_acts_on_support_only(self):
        m = np.diag([0.5, 0.0])
        assert_allclose(psd_matrix_function(m, "log"), np.diag([np.log(0.5), 0.0]))

    @pytest.mark.parametrize("s, t", [(0.3, 0.5), (0.7, 0.9), (1.0, 0.4), (0.5, 0.0)])
    def test_powers_compose(self, rng, s, t):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = g @ g.conj().T + 0.1 * np.eye(4)
        nested = psd_matrix_function(psd_matrix_function(m, "power", t), "power", s)
        assert_allclose(nested, psd_matrix_function(m, "power", s * t), atol=1e-9)

    def test_negative_exponent_rejected(self):
        with pytest.raises(ParameterOutOfRange):
            psd_matrix_function(np.eye(2), "power", -1.0)


class TestProjectors:
    def test_trace_norm(self):
        assert trace_norm(np.diag([0.3, -0.2, 0.0])) == pytest.approx(0.5)

    def test_trace_norm_splits_over_projectors(self, rng):
        g = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        m = g + g.conj().T
        proj = signed_projectors(m)
        signed = np.real(np.trace(proj.plus @ m) - np.trace(proj.minus @ m))
        assert trace_norm(m) == pytest.approx(signed, abs=1e-10)

    def test_split_is_complete(self, rng):
        g = rng.normal(size=(5, 5))
        m = g + g.T
        proj = signed_projectors(m)
        assert_allclose(proj.plus + proj.minus + proj.zero, np.eye(5), atol=1e-12)

    def test_near_zero_cluster_is_not_split(self):
        m = np.diag([1.0, 1e-13, -1e-13, -1.0])
        proj = signed_projectors(m, zero_tol=1e-12)
        assert np.real(np.trace(proj.zero)) == pytest.approx(2.0)
        assert np.real(np.trace(proj.plus)) == pytest.approx(1.0)
        assert np.real(np.trace(proj.minus)) == pytest.approx(1.0)
