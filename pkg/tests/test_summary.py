"""Summary statistics, their estimates, and expected-error formulas."""

import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from voisched import (
    BeliefState,
    avg_statistic,
    centering_matrix,
    count_statistic,
    custom_statistic,
    estimate_statistic,
    eval_statistic,
    expected_err_avg,
    expected_err_mse,
    expected_err_var,
    max_statistic,
    realized_error,
    var_statistic,
)
from voisched.summary import SummaryStatistic, bvn_cdf, count_variance, sample_belief

from conftest import random_belief, random_psd


class TestStatisticTypes:
    def test_count_interval_validated(self):
        count_statistic(-5, 5)
        with pytest.raises(ValueError):
            count_statistic(5, -5)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            SummaryStatistic("median")

    def test_custom_needs_function(self):
        with pytest.raises(ValueError):
            SummaryStatistic("custom")


class TestEval:
    def test_hand_values(self):
        x = np.array([1.0, 2.0, 3.0])
        assert eval_statistic(avg_statistic(), x) == 2.0
        assert eval_statistic(var_statistic(), x) == 1.0
        assert eval_statistic(max_statistic(), x) == 3.0

    def test_count_bounds_inclusive(self):
        x = np.array([0.0, 6.0, -5.0])
        assert eval_statistic(count_statistic(-5, 5), x) == 2.0

    def test_var_of_constant_vector(self):
        assert eval_statistic(var_statistic(), np.full(5, 3.7)) == 0.0

    def test_batched_evaluation(self):
        x = np.array([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])
        np.testing.assert_allclose(eval_statistic(max_statistic(), x), [3.0, 0.0])

    def test_custom_statistic(self):
        stat = custom_statistic(lambda x: float(x[0] - x[1]), label="gap")
        assert stat.name == "gap"
        assert eval_statistic(stat, np.array([5.0, 2.0])) == 3.0


class TestCenteringMatrix:
    @pytest.mark.parametrize("n", [2, 3, 8, 20])
    def test_projector_properties(self, n):
        m = centering_matrix(n)
        np.testing.assert_allclose(m, m.T, atol=1e-12)
        np.testing.assert_allclose(m @ m, m, atol=1e-10)
        assert np.trace(m) == pytest.approx(n - 1)
        np.testing.assert_allclose(m @ np.ones(n), np.zeros(n), atol=1e-10)


class TestEstimate:
    def test_avg_is_mean_of_belief_mean(self, rng):
        belief = random_belief(5, rng)
        assert estimate_statistic(avg_statistic(), belief) == np.mean(belief.mean)

    def test_var_identity_covariance(self):
        belief = BeliefState(np.zeros(3), np.eye(3))
        assert estimate_statistic(var_statistic(), belief) == pytest.approx(1.0)

    def test_count_degenerate_marginals(self):
        belief = BeliefState(np.array([0.0, 6.0, -5.0]), np.zeros((3, 3)))
        assert estimate_statistic(count_statistic(-5, 5), belief) == pytest.approx(2.0)

    def test_count_within_bounds_and_monotone_in_variance(self):
        stat = count_statistic(-1, 1)
        prev = None
        for v in np.linspace(0.01, 5.0, 25):
            belief = BeliefState(np.zeros(4), v * np.eye(4))
            z = estimate_statistic(stat, belief)
            assert 0.0 <= z <= 4.0
            if prev is not None:
                assert z <= prev + 1e-12
            prev = z

    def test_max_two_standard_normals(self, rng):
        # E[max(X1, X2)] = 1/sqrt(pi) for independent standard normals
        belief = BeliefState(np.zeros(2), np.eye(2))
        m = 200_000
        z = estimate_statistic(max_statistic(), belief, mc_samples=m, rng=rng)
        se = 1.0 / math.sqrt(m)
        assert abs(z - 1 / math.sqrt(math.pi)) < 3 * se

    def test_max_single_coordinate_degenerate(self):
        belief = BeliefState(np.array([2.5]), np.zeros((1, 1)))
        z = estimate_statistic(max_statistic(), belief, mc_samples=10,
                               rng=np.random.default_rng(0))
        assert z == 2.5

    def test_mc_requirements(self):
        belief = BeliefState(np.zeros(2), np.eye(2))
        with pytest.raises(ValueError):
            estimate_statistic(max_statistic(), belief, mc_samples=0,
                               rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            estimate_statistic(max_statistic(), belief, mc_samples=10, rng=None)


class TestExpectedErrors:
    def test_mse_trivial(self):
        assert expected_err_mse(BeliefState(np.zeros(20), np.eye(20))) == 20.0
        assert expected_err_mse(BeliefState(np.zeros(3), np.diag([1.0, 2.0, 3.0]))) == 6.0

    def test_avg_trivial(self):
        assert expected_err_avg(BeliefState(np.zeros(20), np.eye(20))) == pytest.approx(0.05)
        assert expected_err_avg(BeliefState(np.zeros(2), np.ones((2, 2)))) == pytest.approx(1.0)

    def test_var_identity(self):
        belief = BeliefState(np.zeros(3), np.eye(3))
        assert expected_err_var(belief) == pytest.approx(1.0)
        assert expected_err_var(belief, form="printed") == pytest.approx(1.0)

    def test_var_isotropic_scaling(self):
        n, c = 6, 2.5
        belief = BeliefState(np.zeros(n), c * np.eye(n))
        assert expected_err_var(belief) == pytest.approx(2 * c**2 / (n - 1))

    def test_var_unknown_form(self):
        with pytest.raises(ValueError):
            expected_err_var(BeliefState(np.zeros(2), np.eye(2)), form="other")

    def test_sampling_oracles_small(self, rng):
        # quick 3-sigma check on a handful of beliefs; the acceptance suite
        # repeats this at full scale
        for n in (2, 4):
            for _ in range(3):
                belief = random_belief(n, rng)
                draws = sample_belief(belief, 200_000, rng)
                sq = np.sum((draws - belief.mean) ** 2, axis=1)
                se = np.std(sq) / math.sqrt(sq.size)
                assert abs(expected_err_mse(belief) - np.mean(sq)) < 3 * se

                means = np.mean(draws, axis=1)
                dev = (means - np.mean(means)) ** 2
                se = np.std(dev) / math.sqrt(dev.size)
                assert abs(expected_err_avg(belief) - np.var(means)) < 4 * se

                zv = np.var(draws, axis=1, ddof=1)
                dev = (zv - np.mean(zv)) ** 2
                se = np.std(dev) / math.sqrt(dev.size)
                assert abs(expected_err_var(belief) - np.var(zv)) < 4 * se


class TestRealizedError:
    def test_trivial_values(self):
        stat = custom_statistic(lambda x: float(x[0]))
        assert realized_error(stat, np.array([2.0]), 2.0) == 0.0
        assert realized_error(stat, np.array([3.0]), 1.0) == 4.0

    def test_nonnegative(self, rng):
        stat = max_statistic()
        for _ in range(50):
            x = rng.standard_normal(4)
            assert realized_error(stat, x, float(rng.standard_normal())) >= 0.0


class TestBivariateNormal:
    def test_against_scipy(self, rng):
        for _ in range(200):
            h, k = rng.uniform(-3, 3, size=2)
            rho = rng.uniform(-0.99, 0.99)
            ref = multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]]).cdf([h, k])
            assert abs(bvn_cdf(h, k, rho) - ref) < 1e-10

    def test_zero_arguments(self):
        assert bvn_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-12)

    def test_independent_factorizes(self):
        from scipy.stats import norm
        assert bvn_cdf(1.0, -0.5, 0.0) == pytest.approx(norm.cdf(1.0) * norm.cdf(-0.5))


class TestCountVariance:
    def test_independent_coordinates(self):
        # independent coordinates: variance is the sum of Bernoulli variances
        mean = np.array([0.0, 2.0])
        cov = np.eye(2)
        from scipy.stats import norm
        p = norm.cdf(1 - mean) - norm.cdf(-1 - mean)
        expected = float(np.sum(p * (1 - p)))
        assert count_variance(mean, cov, -1, 1) == pytest.approx(expected, abs=1e-12)

    def test_monte_carlo_oracle(self, rng):
        for _ in range(5):
            n = 4
            mean = rng.standard_normal(n)
            cov = random_psd(n, rng)
            draws = mean + rng.standard_normal((400_000, n)) @ np.linalg.cholesky(cov).T
            counts = np.sum((draws >= -1) & (draws <= 1), axis=1).astype(float)
            dev = (counts - counts.mean()) ** 2
            se = np.std(dev) / math.sqrt(dev.size)
            assert abs(count_variance(mean, cov, -1, 1) - np.var(counts)) < 4 * se

    def test_degenerate_coordinates(self):
        mean = np.array([0.0, 10.0])
        cov = np.diag([0.0, 1.0])
        from scipy.stats import norm
        p = norm.cdf(1 - 10) - norm.cdf(-1 - 10)
        assert count_variance(mean, cov, -1, 1) == pytest.approx(p * (1 - p), abs=1e-12)

    def test_batched_matches_loop(self, rng):
        cov = random_psd(3, rng)
        means = rng.standard_normal((5, 3))
        batched = count_variance(means, cov, -2, 2)
        for i in range(5):
            assert batched[i] == pytest.approx(count_variance(means[i], cov, -2, 2))
