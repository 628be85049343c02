import math

import numpy as np
import pytest

from adamlab import harness
from adamlab.estimators import (
    DegenerateDisplacement,
    FitError,
    SmoothnessSample,
    collect_smoothness_samples,
    estimate_affine_noise,
    estimate_coordinate_smoothness,
    fit_l0_l1,
)
from adamlab.optim import OptimizerConfig
from adamlab.oracles import ExpSum, GaussianLinreg, Quadratic, Quartic


class TestCoordinateSmoothness:
    def test_quadratic_is_exactly_one(self):
        oracle = Quadratic(a=[1.0])
        rng = np.random.default_rng(0)
        values = []
        for _ in range(25):
            x = rng.uniform(-3, 3, size=1)
            y = x + rng.uniform(0.01, 1.0, size=1) * rng.choice([-1.0, 1.0])
            local = estimate_coordinate_smoothness(oracle, x, y, gammas=[0.2, 0.5, 1.0])
            values.append(local[0])
        values = np.asarray(values)
        assert np.max(values) / np.min(values) - 1.0 <= 1e-10

    def test_exp_sum_hand_case(self):
        oracle = ExpSum(dim=1)
        local = estimate_coordinate_smoothness(
            oracle, np.array([0.0]), np.array([0.1]), gammas=[0.25, 0.5, 1.0]
        )
        expected = max((math.exp(0.1 * g) - 1.0) / (0.1 * g) for g in (0.25, 0.5, 1.0))
        assert local[0] == pytest.approx(expected, rel=1e-12)
        assert local[0] == pytest.approx(1.05171, abs=1e-5)

    def test_degenerate_pair_rejected(self):
        oracle = Quadratic(a=[1.0])
        with pytest.raises(DegenerateDisplacement):
            estimate_coordinate_smoothness(oracle, np.array([1.0]), np.array([1.0]))

    def test_gamma_range_enforced(self):
        oracle = Quadratic(a=[1.0])
        with pytest.raises(ValueError):
            estimate_coordinate_smoothness(oracle, np.zeros(1), np.ones(1), gammas=[0.0, 1.0])
        with pytest.raises(ValueError):
            estimate_coordinate_smoothness(oracle, np.zeros(1), np.ones(1), gammas=[1.5])

    def test_scale_covariance(self):
        # doubling the objective doubles every local constant
        base = Quadratic(a=[1.0, 1.0])
        doubled = Quadratic(a=[2.0, 2.0])
        x, y = np.array([0.5, -0.25]), np.array([1.0, 0.75])
        l1 = estimate_coordinate_smoothness(base, x, y)
        l2 = estimate_coordinate_smoothness(doubled, x, y)
        np.testing.assert_allclose(l2, 2.0 * l1, rtol=1e-12)

    def test_collect_skips_degenerate_steps(self):
        oracle = Quadratic(a=[1.0])
        config = OptimizerConfig(eta=0.1, beta2=0.9, zeta=1.0)
        rec = harness.run_trajectory(oracle, config, np.zeros(1), 10, seed=0)  # never moves
        samples, skipped = collect_smoothness_samples(rec, oracle)
        assert samples == []
        assert skipped == 10


class TestFitL0L1:
    def _exact_samples(self, l0, l1, dim, n=40):
        rng = np.random.default_rng(1)
        grads = rng.uniform(0.0, 5.0, size=n)
        return [
            SmoothnessSample(t=k, i=0, grad_abs=float(g), local_l=float(l0 / math.sqrt(dim) + l1 * g))
            for k, g in enumerate(grads)
        ]

    def test_recovers_exact_line(self):
        samples = self._exact_samples(l0=2.5, l1=0.75, dim=4)
        fits = fit_l0_l1(samples, dim=4)
        assert fits[0].l0_hat == pytest.approx(2.5, abs=1e-8)
        assert fits[0].l1_hat == pytest.approx(0.75, abs=1e-8)
        assert fits[0].l0_env == pytest.approx(2.5, abs=1e-6)
        assert fits[0].l1_env == pytest.approx(0.75, abs=1e-6)

    def test_flat_line_gives_l1_zero(self):
        samples = self._exact_samples(l0=math.sqrt(9), l1=0.0, dim=9)
        samples = [
            SmoothnessSample(t=s.t, i=0, grad_abs=s.grad_abs, local_l=1.0) for s in samples
        ]
        fits = fit_l0_l1(samples, dim=9)
        assert fits[0].l1_hat == pytest.approx(0.0, abs=1e-10)
        assert fits[0].l0_hat == pytest.approx(3.0, abs=1e-8)

    def test_too_few_samples(self):
        with pytest.raises(FitError):
            fit_l0_l1(self._exact_samples(1.0, 1.0, 1, n=5), dim=1)

    def test_degenerate_grad_abs(self):
        samples = [
            SmoothnessSample(t=k, i=0, grad_abs=2.0, local_l=1.0) for k in range(12)
        ]
        with pytest.raises(FitError):
            fit_l0_l1(samples, dim=1)

    def test_exp_sum_trajectory_recovers_unit_slope(self):
        oracle = ExpSum(dim=1)
        config = OptimizerConfig(eta=0.02, beta1=0.0, beta2=0.9, zeta=1e-8)
        rec = harness.run_trajectory(oracle, config, np.array([1.0]), 200, seed=0)
        samples, _ = collect_smoothness_samples(rec, oracle)
        fits = fit_l0_l1(samples, dim=1)
        assert 0.9 <= fits[0].l1_hat <= 1.1


class TestAffineNoise:
    def test_gaussian_linreg_recovers_d1_three(self):
        oracle = GaussianLinreg()
        rng = np.random.default_rng(2024)
        fits = estimate_affine_noise(oracle, [[0.5], [1.0], [2.0], [4.0]], 10_000, rng)
        assert 2.7 <= fits[0].d1_hat <= 3.3
        assert fits[0].d0_hat <= 0.1
        assert not fits[0].rank_deficient

    def test_noiseless_oracle_gives_exact_line(self):
        oracle = Quadratic(a=[1.0], sigma0=0.0, sigma1=0.0)
        rng = np.random.default_rng(0)
        fits = estimate_affine_noise(oracle, [[0.5], [1.0], [2.0]], 200, rng)
        assert fits[0].d1_hat == pytest.approx(1.0, abs=1e-12)
        assert fits[0].d0_hat == pytest.approx(0.0, abs=1e-12)

    def test_single_stationary_point_is_rank_deficient(self):
        oracle = Quartic(dim=2, sigma0=1.0)
        rng = np.random.default_rng(0)
        fits = estimate_affine_noise(oracle, [np.zeros(2)], 500, rng)
        assert all(f.rank_deficient for f in fits)

    def test_sample_floor(self):
        with pytest.raises(FitError):
            estimate_affine_noise(GaussianLinreg(), [[1.0]], 50, np.random.default_rng(0))
        with pytest.raises(FitError):
            estimate_affine_noise(GaussianLinreg(), [], 500, np.random.default_rng(0))

    def test_pooled_fit(self):
        oracle = Quartic(dim=3, sigma0=1.0)
        rng = np.random.default_rng(5)
        fit = estimate_affine_noise(oracle, [np.full(3, 0.5), np.full(3, 1.0)], 2000, rng, pooled=True)
        assert fit.n_points == 6
        assert fit.d0_hat >= 0 and fit.d1_hat >= 0

    def test_concentration_halves_se_with_double_samples(self):
        # standard error of d1_hat shrinks by about sqrt(2) when n doubles
        oracle = GaussianLinreg()
        points = [[0.5], [1.0], [2.0]]
        estimates = {n: [] for n in (1000, 2000)}
        rng = np.random.default_rng(77)
        for _ in range(50):
            for n in estimates:
                fit = estimate_affine_noise(oracle, points, n, rng)
                estimates[n].append(fit[0].d1_hat)
        sd_small = np.std(estimates[1000], ddof=1)
        sd_big = np.std(estimates[2000], ddof=1)
        assert 1.1 <= sd_small / sd_big <= 1.8
