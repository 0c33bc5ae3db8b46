import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.asymptotics import logconvexity_check
from src.errors import (
    AsymmetricCovariance,
    CutoffTooSmall,
    DimensionMismatch,
    ParameterOutOfRange,
    SingularGaussianState,
    Unphysical,
    UnsupportedInput,
)
from src.gaussian import (
    fock_q_s,
    gaussian_fidelity_truncated,
    gaussian_q_s,
    gaussian_q_s_logderiv,
    gaussian_qs_evaluator,
    gaussian_qs_work,
    gaussian_relative_entropies,
    gaussian_to_fock,
    product_state,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_state,
    tmsv_through_thermal_loss,
    two_mode_squeezed_vacuum,
    v_power,
    vacuum,
    validate_gaussian,
    w_power,
)


def thermal_q_s(n1, n2, s):
    """Geometric-series closed form of Tr[rho2^s rho1^(1-s)] for thermal states."""
    x1, x2 = n1 / (n1 + 1), n2 / (n2 + 1)
    return (1 - x2) ** s * (1 - x1) ** (1 - s) / (1 - x2 ** s * x1 ** (1 - s))


def thermal_relative_entropy(n1, n2):
    """S(rho1||rho2) in nats for thermal states with mean photon numbers n1, n2."""
    x1, x2 = n1 / (n1 + 1), n2 / (n2 + 1)
    return math.log((1 - x1) / (1 - x2)) + n1 * math.log(x1 / x2)


def displaced_thermal(nbar, mean):
    return validate_gaussian(mean, (nbar + 0.5) * np.eye(2))


class TestValidation:
    def test_below_vacuum_is_unphysical(self):
        with pytest.raises(Unphysical):
            validate_gaussian([0, 0], 0.25 * np.eye(2))

    def test_asymmetric(self):
        with pytest.raises(AsymmetricCovariance):
            validate_gaussian([0, 0], [[1.0, 0.1], [0.0, 1.0]])

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            validate_gaussian([0, 0, 0], np.eye(2))
        with pytest.raises(DimensionMismatch):
            validate_gaussian([0, 0], np.eye(2), modes=2)

    def test_tmsv_is_physical(self):
        g = tmsv_through_thermal_loss(4.0, 0.7, 0.4)
        assert g.modes == 2
        assert g.cov.shape == (4, 4)

    def test_loss_parameters_checked(self):
        with pytest.raises(ParameterOutOfRange):
            tmsv_through_thermal_loss(1.0, 1.5, 0.0)


class TestSymplectic:
    def test_thermal(self):
        assert_allclose(symplectic_eigenvalues(thermal_state(1.3)), [1.8], atol=1e-12)

    def test_product(self):
        g = product_state(thermal_state(0.2), thermal_state(0.9))
        assert_allclose(np.sort(symplectic_eigenvalues(g)), [0.7, 1.4], atol=1e-12)

    def test_tmsv_is_pure(self):
        assert_allclose(symplectic_eigenvalues(two_mode_squeezed_vacuum(2.0)), [0.5, 0.5], atol=1e-9)

    def test_v_power_of_thermal(self):
        # rho^s / Tr rho^s is thermal with x^s
        n, s = 0.8, 0.3
        xs = (n / (n + 1)) ** s
        expected = (0.5 * (1 + xs) / (1 - xs)) * np.eye(2)
        assert_allclose(v_power(thermal_state(n), s), expected, atol=1e-10)

    def test_powers_at_one_reproduce_the_state(self):
        g = tmsv_through_thermal_loss(1.0, 0.6, 0.3)
        assert_allclose(v_power(g, 1.0), g.cov, atol=1e-8)
        assert_allclose(w_power(g, 1.0), -2j * g.cov @ symplectic_form(2), atol=1e-8)

    def test_qs_work_collects_single_state_pieces(self):
        g1, g2 = thermal_state(0.4), displaced_thermal(0.9, [0.3, -0.1])
        work = gaussian_qs_work(g1, g2, 0.3)
        assert_allclose(work.W1, w_power(g1, 1.0), atol=1e-12)
        assert_allclose(work.V1s, v_power(g1, 0.7), atol=1e-12)
        assert_allclose(work.V2s, v_power(g2, 0.3), atol=1e-12)
        assert_allclose(work.delta, [0.3, -0.1])
        assert work.Z1 == pytest.approx(math.sqrt(0.9 ** 2 - 0.25), abs=1e-12)


class TestQs:
    @pytest.mark.parametrize("n1, n2", [(0.2, 0.6), (1.0, 0.4), (0.5, 0.5)])
    def test_thermal_closed_form(self, n1, n2):
        for s in np.linspace(0.1, 0.9, 9):
            got = gaussian_q_s(thermal_state(n1), thermal_state(n2), float(s))
            assert got == pytest.approx(thermal_q_s(n1, n2, s), abs=1e-10)

    def test_swap_symmetry(self):
        g1 = displaced_thermal(0.5, [0.4, -0.2])
        g2 = displaced_thermal(0.8, [-0.1, 0.3])
        for s in (0.2, 0.5, 0.7):
            assert gaussian_q_s(g1, g2, s) == pytest.approx(gaussian_q_s(g2, g1, 1 - s), abs=1e-12)

    def test_identical_states(self):
        g = tmsv_through_thermal_loss(1.0, 0.6, 0.3)
        assert gaussian_q_s(g, g, 0.4) == pytest.approx(1.0, abs=1e-10)

    def test_logderiv_matches_finite_difference(self):
        g1 = tmsv_through_thermal_loss(1.0, 0.7, 0.4)
        g2 = tmsv_through_thermal_loss(1.0, 0.3, 0.6)
        h = 1e-5
        for s in (0.2, 0.5, 0.8):
            fd = -(math.log(gaussian_q_s(g1, g2, s + h)) - math.log(gaussian_q_s(g1, g2, s - h))) / (2 * h)
            assert gaussian_q_s_logderiv(g1, g2, s) == pytest.approx(fd, abs=1e-5)

    def test_open_interval(self):
        with pytest.raises(ParameterOutOfRange):
            gaussian_q_s(thermal_state(0.3), thermal_state(0.5), 0.0)

    def test_pure_state_is_singular(self):
        with pytest.raises(SingularGaussianState):
            gaussian_q_s(vacuum(), thermal_state(0.5), 0.5)

    def test_mode_mismatch(self):
        with pytest.raises(DimensionMismatch):
            gaussian_q_s(thermal_state(0.3), product_state(thermal_state(0.3), thermal_state(0.3)), 0.5)


class TestEvaluator:
    def test_stein_endpoints_match_thermal_entropies(self):
        n1, n2 = 0.3, 0.9
        ent = gaussian_relative_entropies(thermal_state(n1), thermal_state(n2))
        assert ent.s12 == pytest.approx(thermal_relative_entropy(n1, n2), abs=1e-4)
        assert ent.s21 == pytest.approx(thermal_relative_entropy(n2, n1), abs=1e-4)

    def test_log_convex(self):
        q = gaussian_qs_evaluator(tmsv_through_thermal_loss(4.0, 0.7, 0.4), tmsv_through_thermal_loss(4.0, 0.3, 0.6))
        assert logconvexity_check(q).passed

    def test_value_and_derivative_agree(self):
        q = gaussian_qs_evaluator(thermal_state(0.4), thermal_state(1.1))
        for s in (0.3, 0.6):
            assert q.value(s) == pytest.approx(thermal_q_s(0.4, 1.1, s), abs=1e-10)
            assert q.log_derivative(s) == pytest.approx(
                -gaussian_q_s_logderiv(thermal_state(0.4), thermal_state(1.1), s), abs=1e-12
            )


class TestFock:
    def test_thermal_diagonal(self):
        n = 0.7
        f = gaussian_to_fock(thermal_state(n), 30)
        k = np.arange(30)
        assert_allclose(np.real(np.diag(f.matrix)), n ** k / (n + 1) ** (k + 1), atol=1e-12)
        assert_allclose(f.matrix - np.diag(np.diag(f.matrix)), 0.0, atol=1e-12)

    def test_thermal_fidelity(self):
        n1, n2 = 0.3, 0.8
        value, err = gaussian_fidelity_truncated(thermal_state(n1), thermal_state(n2), 40)
        expected = 1.0 / (math.sqrt((n1 + 1) * (n2 + 1)) - math.sqrt(n1 * n2))
        assert value == pytest.approx(expected, abs=1e-8)
        assert err < 1e-10

    def test_displaced_q_s_matches_truncation(self):
        g1 = displaced_thermal(0.5, [0.4, -0.2])
        g2 = displaced_thermal(0.8, [-0.1, 0.3])
        f1, f2 = gaussian_to_fock(g1, 50), gaussian_to_fock(g2, 50)
        for s in (0.25, 0.5, 0.75):
            assert fock_q_s(f1, f2, s) == pytest.approx(gaussian_q_s(g1, g2, s), abs=1e-6)

    def test_two_mode_product_is_kronecker(self):
        f1, f2 = gaussian_to_fock(thermal_state(0.2), 16), gaussian_to_fock(thermal_state(0.5), 16)
        joint = gaussian_to_fock(product_state(thermal_state(0.2), thermal_state(0.5)), 16)
        assert joint.matrix.shape == (256, 256)
        assert_allclose(joint.matrix, np.kron(f1.matrix, f2.matrix), atol=1e-12)

    def test_two_mode_squeezed_vacuum_pairs_photons(self):
        nbar, cutoff = 0.5, 30
        f = gaussian_to_fock(two_mode_squeezed_vacuum(nbar), cutoff)
        n = np.arange(cutoff)
        amp = np.sqrt(nbar ** n / (nbar + 1) ** (n + 1))
        diag_pairs = n * cutoff + n
        block = f.matrix[np.ix_(diag_pairs, diag_pairs)]
        assert_allclose(np.abs(block), np.outer(amp, amp), atol=1e-10)
        # no weight outside the |n, n> sector
        assert np.sum(np.abs(f.matrix)) == pytest.approx(np.sum(np.abs(block)), abs=1e-9)

    def test_product_fidelity_factorizes(self):
        a = product_state(thermal_state(0.2), thermal_state(0.4))
        b = product_state(thermal_state(0.3), thermal_state(0.1))
        joint, _ = gaussian_fidelity_truncated(a, b, 24)
        first, _ = gaussian_fidelity_truncated(thermal_state(0.2), thermal_state(0.3), 24)
        second, _ = gaussian_fidelity_truncated(thermal_state(0.4), thermal_state(0.1), 24)
        assert joint == pytest.approx(first * second, abs=1e-9)

    @pytest.mark.slow
    def test_thermal_loss_pair_at_largest_cutoff(self):
        g1 = tmsv_through_thermal_loss(4.0, 0.7, 0.4)
        g2 = tmsv_through_thermal_loss(4.0, 0.3, 0.6)
        value, err = gaussian_fidelity_truncated(g1, g2, 64)
        assert err < 2e-6
        # Tr[rho1^(1/2) rho2^(1/2)] never exceeds the fidelity
        assert gaussian_q_s(g1, g2, 0.5) <= value + 1e-6
        assert value < 1.0

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            gaussian_to_fock(thermal_state(4.0), 5)

    def test_cutoff_range(self):
        with pytest.raises(ParameterOutOfRange):
            gaussian_to_fock(thermal_state(0.2), 0)

    def test_three_modes_unsupported(self):
        g = product_state(thermal_state(0.1), thermal_state(0.1), thermal_state(0.1))
        with pytest.raises(UnsupportedInput):
            gaussian_to_fock(g, 4)

    @pytest.mark.slow
    def test_thermal_grid_against_large_cutoff(self):
        for n1 in (0.2, 0.6, 1.0):
            for n2 in (0.4, 0.8):
                f1 = gaussian_to_fock(thermal_state(n1), 64)
                f2 = gaussian_to_fock(thermal_state(n2), 64)
                for s in np.linspace(0.1, 0.9, 9):
                    exact = gaussian_q_s(thermal_state(n1), thermal_state(n2), float(s))
                    assert fock_q_s(f1, f2, float(s)) == pytest.approx(exact, abs=1e-6)
                    assert exact == pytest.approx(thermal_q_s(n1, n2, s), abs=1e-10)
