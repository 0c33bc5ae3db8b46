import math

import numpy as np
import pytest

from src.analytic_bounds import oaqcb_point
from src.asymptotics import (
    chernoff_exponent,
    check_hoeffding_saturation,
    error_exponents,
    exponent_curve,
    hoeffding_bmax,
    logconvexity_check,
    monotonicity_violation,
    ncopy_fidelity,
    ncopy_qs,
    oaqcb_ncopy_point,
    stein_limits,
)
from src.dv_states import DecompositionQs, PowerQs, fidelity, random_density, relative_entropies, tensor_power
from src.errors import ParameterOutOfRange, RateOutOfRange
from src.gaussian import gaussian_qs_evaluator, thermal_state

P_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class TestNCopies:
    def test_power_laws(self, qubit_pair):
        qs = DecompositionQs.from_states(*qubit_pair)
        F = fidelity(*qubit_pair)
        for n in (2, 3):
            rho1, rho2 = (tensor_power(r, n) for r in qubit_pair)
            assert fidelity(rho1, rho2) == pytest.approx(ncopy_fidelity(F, n), abs=1e-10)
            joint = DecompositionQs.from_states(rho1, rho2)
            for s in (0.2, 0.5, 0.8):
                assert joint.value(s) == pytest.approx(ncopy_qs(qs.value(s), n), abs=1e-10)

    @pytest.mark.parametrize("n", [2, 3])
    def test_oaqcb_from_single_copy(self, qubit_pair, n):
        qs = DecompositionQs.from_states(*qubit_pair)
        joint = DecompositionQs.from_states(*(tensor_power(r, n) for r in qubit_pair))
        for p in (0.2, 0.5, 0.8):
            assert oaqcb_ncopy_point(qs, p, n) == pytest.approx(oaqcb_point(joint, p), abs=1e-9)

    def test_bad_copies(self):
        with pytest.raises(ParameterOutOfRange):
            ncopy_fidelity(0.5, 0)


class TestExponents:
    def test_match_ncopy_decay(self, qutrit_pair):
        qs = DecompositionQs.from_states(*qutrit_pair)
        n, p = 10, 0.3
        alpha, beta = oaqcb_point(PowerQs(qs, n), p)
        pair = error_exponents(qs, p)
        assert -math.log(alpha / (1 - p)) / n == pytest.approx(pair.gamma_alpha, rel=1e-10)
        assert -math.log(beta / p) / n == pytest.approx(pair.gamma_beta, rel=1e-10)

    def test_monotone_in_p(self, qubit_pair):
        rows = exponent_curve(DecompositionQs.from_states(*qubit_pair), P_GRID)
        assert monotonicity_violation(rows) <= 1e-12

    def test_interior_only(self, qubit_pair):
        with pytest.raises(ParameterOutOfRange):
            error_exponents(DecompositionQs.from_states(*qubit_pair), 0.0)

    def test_stein_limits(self, qutrit_pair):
        qs = DecompositionQs.from_states(*qutrit_pair)
        ent = relative_entropies(qs.decomposition)
        limits = stein_limits(qs)
        assert limits.s12 == pytest.approx(ent.s12)
        assert limits.s21 == pytest.approx(ent.s21)

    def test_exponents_approach_stein(self, qubit_pair):
        qs = DecompositionQs.from_states(*qubit_pair)
        ent = relative_entropies(qs.decomposition)
        assert error_exponents(qs, 1e-6).gamma_beta == pytest.approx(ent.s12, abs=1e-4)
        assert error_exponents(qs, 1 - 1e-6).gamma_alpha == pytest.approx(ent.s21, abs=1e-4)

    def test_chernoff(self, qubit_pair):
        qs = DecompositionQs.from_states(*qubit_pair)
        result = chernoff_exponent(qs)
        grid = min(qs.value(s) for s in np.linspace(0, 1, 1001))
        assert result.q_star <= grid + 1e-12
        assert result.exponent == pytest.approx(-math.log(result.q_star))

    def test_chernoff_identical(self, rng):
        rho = random_density(3, rng)
        result = chernoff_exponent(DecompositionQs.from_states(rho, rho))
        assert (result.s_star, result.q_star, result.exponent) == (0.5, 1.0, 0.0)


class TestHoeffding:
    def test_saturation_qubit(self, qubit_pair):
        report = check_hoeffding_saturation(DecompositionQs.from_states(*qubit_pair), P_GRID)
        assert report.passed
        assert report.worst_deviation < 1e-6
        for row in report.rows:
            assert row["s_max"] == pytest.approx(row["p"], abs=1e-3)

    def test_saturation_random(self, random_pairs):
        for rho1, rho2 in random_pairs(3):
            report = check_hoeffding_saturation(DecompositionQs.from_states(rho1, rho2), P_GRID)
            assert report.worst_deviation < 1e-6

    @pytest.mark.slow
    def test_saturation_acceptance(self, random_pairs):
        for rho1, rho2 in random_pairs(20):
            report = check_hoeffding_saturation(DecompositionQs.from_states(rho1, rho2), P_GRID)
            assert report.worst_deviation < 1e-6
            for row in report.rows:
                assert row["s_max"] == pytest.approx(row["p"], abs=1e-3)

    def test_identical_states_are_trivial(self, rng):
        rho = random_density(2, rng)
        qs = DecompositionQs.from_states(rho, rho)
        report = check_hoeffding_saturation(qs, P_GRID)
        assert report.trivial and report.passed
        result = hoeffding_bmax(qs, 0.3)
        assert (result.value, result.s_max) == (0.0, 0.0)

    @pytest.mark.parametrize("rate", [0.0, -0.1, 10.0])
    def test_rate_out_of_range(self, qubit_pair, rate):
        with pytest.raises(RateOutOfRange):
            hoeffding_bmax(DecompositionQs.from_states(*qubit_pair), rate)

    def test_gaussian_thermal_pair(self):
        q = gaussian_qs_evaluator(thermal_state(0.3), thermal_state(1.2))
        report = check_hoeffding_saturation(q, [0.2, 0.5, 0.8])
        assert report.worst_deviation < 1e-6


class TestLogConvexity:
    def test_random_pairs(self, random_pairs):
        for rho1, rho2 in random_pairs(10):
            assert logconvexity_check(DecompositionQs.from_states(rho1, rho2)).passed

    @pytest.mark.slow
    def test_random_pairs_acceptance(self, random_pairs):
        for rho1, rho2 in random_pairs(100):
            assert logconvexity_check(DecompositionQs.from_states(rho1, rho2)).passed

    def test_too_few_points(self, qubit_pair):
        with pytest.raises(ParameterOutOfRange):
            logconvexity_check(DecompositionQs.from_states(*qubit_pair), s_points=2)
