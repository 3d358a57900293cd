import math

import numpy as np
import pytest
from scipy.integrate import quad

from evoboss.gp import (
    FittedGP,
    GPNumericsError,
    KernelSpec,
    LengthScalePrior,
    default_jitter,
    distance,
    fit,
    kernel,
    kernel_matrix,
    log_marginal_likelihood,
    make_fitted,
)


def dense_oracle(E, y, spec, jitter):
    """Explicit-inverse GP oracle: lml, and posterior at arbitrary points."""
    K = kernel_matrix(E, E, spec) + jitter * np.eye(len(y))
    K_inv = np.linalg.inv(K)
    sign, logdet = np.linalg.slogdet(K)
    assert sign > 0
    lml = -0.5 * y @ K_inv @ y - 0.5 * logdet - 0.5 * len(y) * math.log(2 * math.pi)

    def posterior(e):
        k_star = np.array([kernel(row, e, spec) for row in E])
        mu = k_star @ K_inv @ y
        var = kernel(e, e, spec) - k_star @ K_inv @ k_star
        return mu, max(var, 0.0)

    return lml, posterior


class TestDistance:
    def test_euclidean_at_theta_one(self):
        assert distance(np.array([0.0, 0.0]), np.array([3.0, 4.0]), 1.0) == 5.0

    def test_zero_at_equal_points(self):
        e = np.array([1.0, -2.0, 0.5])
        assert distance(e, e, 7.3) == 0.0

    def test_homogeneous_in_theta(self):
        e, e2 = np.array([0.0, 0.0]), np.array([3.0, 4.0])
        assert distance(e, e2, 2.0) == 10.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            distance(np.zeros(2), np.zeros(3), 1.0)


class TestKernel:
    def test_unit_at_zero_distance(self):
        e = np.array([1.0, 2.0])
        for family in ("matern32", "se"):
            assert kernel(e, e, KernelSpec(family, 3.0)) == 1.0

    def test_matern_hand_value(self):
        # d = 1/sqrt(3) makes k = exp(-1) * 2
        e, e2 = np.zeros(1), np.array([1.0 / math.sqrt(3.0)])
        k = kernel(e, e2, KernelSpec("matern32", 1.0))
        assert k == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)

    def test_strictly_decreasing_in_distance(self):
        ds = np.linspace(0.0, 10.0, 200)
        for family in ("matern32", "se"):
            spec = KernelSpec(family, 1.0)
            ks = [kernel(np.zeros(1), np.array([d]), spec) for d in ds]
            assert all(a > b for a, b in zip(ks, ks[1:]))

    def test_theta_zero_gives_constant_kernel(self):
        rng = np.random.default_rng(0)
        E = rng.standard_normal((4, 3))
        K = kernel_matrix(E, E, KernelSpec("matern32", 0.0))
        np.testing.assert_array_equal(K, np.ones((4, 4)))

    def test_psd_on_random_sets(self):
        rng = np.random.default_rng(1)
        prior = LengthScalePrior.for_dim(5)
        for _ in range(20):
            t = int(rng.integers(2, 51))
            E = rng.standard_normal((t, 5))
            theta = abs(rng.normal(0, prior.sigma))
            for family in ("matern32", "se"):
                K = kernel_matrix(E, E, KernelSpec(family, theta))
                assert np.linalg.eigvalsh(K).min() >= -1e-8


class TestLengthScalePrior:
    def test_sigma_for_paper_dim(self):
        assert LengthScalePrior.for_dim(1280).sigma == pytest.approx(
            math.sqrt(1280) / 3.0
        )

    def test_density_normalized_on_half_line(self):
        p = LengthScalePrior(2.5)
        total, _ = quad(lambda t: math.exp(p.log_density(t)), 0, 60)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_zero_below_support(self):
        assert LengthScalePrior(1.0).log_density(-0.1) == -math.inf

    def test_quantiles_monotone(self):
        p = LengthScalePrior(3.0)
        qs = [p.quantile(i / 21) for i in range(1, 21)]
        assert all(a < b for a, b in zip(qs, qs[1:]))
        assert qs[0] > 0.0


class TestLogMarginalLikelihood:
    def test_scalar_case(self):
        j = 1e-6
        y1 = 0.7
        got = log_marginal_likelihood(
            np.array([[1.0, 2.0]]), np.array([y1]), KernelSpec("matern32", 1.0), j
        )
        want = -0.5 * y1**2 / (1 + j) - 0.5 * math.log(1 + j) - 0.5 * math.log(2 * math.pi)
        assert got == pytest.approx(want, abs=1e-12)

    def test_matches_dense_inverse_oracle(self):
        rng = np.random.default_rng(2)
        E = rng.standard_normal((4, 3))
        y = rng.standard_normal(4)
        spec = KernelSpec("matern32", 0.8)
        got = log_marginal_likelihood(E, y, spec, 1e-8)
        want, _ = dense_oracle(E, y, spec, 1e-8)
        assert got == pytest.approx(want, abs=1e-8)

    def test_zero_targets(self):
        rng = np.random.default_rng(3)
        E = rng.standard_normal((3, 2))
        spec = KernelSpec("matern32", 1.2)
        j = 1e-8
        got = log_marginal_likelihood(E, np.zeros(3), spec, j)
        K = kernel_matrix(E, E, spec) + j * np.eye(3)
        _, logdet = np.linalg.slogdet(K)
        assert got == pytest.approx(-0.5 * logdet - 1.5 * math.log(2 * math.pi))


class TestPosterior:
    def test_interpolates_observations(self):
        rng = np.random.default_rng(4)
        E = rng.standard_normal((6, 4))
        y = rng.standard_normal(6) * 3
        gp = make_fitted(E, y, KernelSpec("matern32", 0.7))
        for i in range(6):
            mu, var = gp.posterior(E[i])
            assert abs(mu - y[i]) <= 1e-6 * (1 + abs(y[i]))
            assert var <= 1e-6

    def test_recovers_prior_far_away(self):
        rng = np.random.default_rng(5)
        E = rng.standard_normal((4, 3))
        y = rng.standard_normal(4)
        gp = make_fitted(E, y, KernelSpec("matern32", 1.0))
        mu, var = gp.posterior(np.full(3, 1e6))
        assert mu == pytest.approx(0.0, abs=1e-9)
        assert var == pytest.approx(1.0, abs=1e-9)

    def test_matches_dense_inverse_oracle(self):
        rng = np.random.default_rng(6)
        E = rng.standard_normal((5, 3))
        y = rng.standard_normal(5)
        spec = KernelSpec("matern32", 0.9)
        gp = make_fitted(E, y, spec, jitter=1e-8)
        _, oracle_post = dense_oracle(E, y, spec, 1e-8)
        queries = rng.standard_normal((10, 3))
        for q in queries:
            mu, var = gp.posterior(q)
            mu_o, var_o = oracle_post(q)
            assert mu == pytest.approx(mu_o, abs=1e-8)
            assert var == pytest.approx(var_o, abs=1e-8)

    def test_variance_below_prior_everywhere(self):
        rng = np.random.default_rng(7)
        E = rng.standard_normal((8, 4))
        y = rng.standard_normal(8)
        gp = make_fitted(E, y, KernelSpec("matern32", 0.5))
        _, var = gp.posterior_many(rng.standard_normal((200, 4)))
        assert np.all(var <= 1.0 + 1e-12)

    def test_dimension_mismatch(self):
        gp = make_fitted(np.zeros((2, 3)), np.zeros(2), KernelSpec("matern32", 1.0))
        with pytest.raises(ValueError):
            gp.posterior(np.zeros(4))


def grid_oracle(E, y, prior, objective, family="matern32", points=10_000):
    """Dense 1-D grid maximum of the fit objective over [0, 6*sigma]."""
    jitter = default_jitter(1.0)
    best = -math.inf
    for theta in np.linspace(0.0, 6 * prior.sigma, points):
        try:
            value = log_marginal_likelihood(E, y, KernelSpec(family, theta), jitter)
        except np.linalg.LinAlgError:
            continue
        if objective == "map":
            value += prior.log_density(theta)
        best = max(best, value)
    return best


class TestFit:
    def test_deterministic(self):
        rng = np.random.default_rng(8)
        E = rng.standard_normal((5, 4))
        y = rng.standard_normal(5)
        a = fit(E, y)
        b = fit(E, y)
        assert a.theta == b.theta
        assert a.objective_value == b.objective_value

    @pytest.mark.parametrize("objective", ["map", "mle"])
    def test_beats_grid_oracle_t2(self, objective):
        rng = np.random.default_rng(9)
        E = rng.standard_normal((2, 3))
        y = rng.standard_normal(2)
        prior = LengthScalePrior.for_dim(3)
        g = fit(E, y, prior=prior, objective=objective)
        assert g.objective_value >= grid_oracle(E, y, prior, objective) - 1e-6

    def test_order_invariance(self):
        rng = np.random.default_rng(10)
        E = rng.standard_normal((6, 3))
        y = rng.standard_normal(6)
        perm = rng.permutation(6)
        a = fit(E, y)
        b = fit(E[perm], y[perm])
        assert a.theta == pytest.approx(b.theta, abs=1e-8)
        q = rng.standard_normal(3)
        assert a.posterior(q)[0] == pytest.approx(b.posterior(q)[0], abs=1e-8)
        assert a.posterior(q)[1] == pytest.approx(b.posterior(q)[1], abs=1e-8)

    def test_interpolation_after_y_scaling(self):
        rng = np.random.default_rng(11)
        E = rng.standard_normal((4, 3))
        y = rng.standard_normal(4)
        for scale in (1.0, 2.0):
            g = fit(E, scale * y)
            mu, _ = g.posterior_many(E)
            np.testing.assert_allclose(mu, scale * y, atol=1e-6)

    def test_warm_start_extra_point_is_used(self):
        rng = np.random.default_rng(12)
        E = rng.standard_normal((4, 3))
        y = rng.standard_normal(4)
        base = fit(E, y)
        warm = fit(E, y, extra_starts=(base.theta,))
        assert warm.objective_value >= base.objective_value - 1e-12

    def test_identical_rows_survive_via_jitter(self):
        # duplicate embeddings with equal targets: singular K, jitter escalates
        E = np.zeros((3, 2))
        y = np.array([1.0, 1.0, 1.0])
        g = fit(E, y)
        assert g.jitter <= 1e-2
        mu, _ = g.posterior(np.zeros(2))
        assert mu == pytest.approx(1.0, rel=1e-3)

    def test_cholesky_cached_consistently(self):
        rng = np.random.default_rng(13)
        E = rng.standard_normal((5, 3))
        y = rng.standard_normal(5)
        g = fit(E, y)
        K = kernel_matrix(E, E, g.spec) + g.jitter * np.eye(5)
        np.testing.assert_allclose(g.chol @ g.chol.T, K, atol=1e-8)

    def test_negative_theta_rejected(self):
        with pytest.raises(ValueError):
            KernelSpec("matern32", -0.1)
