import math

import numpy as np
import pytest

from adamlab.oracles import (
    ExpSum,
    GaussianLinreg,
    LogisticToy,
    ObjectiveSpec,
    Quadratic,
    Quartic,
    make_objective,
    noise_envelope,
)


def stochastic_catalog():
    return [
        Quartic(dim=10, sigma0=1.0, sigma1=0.5, box=2.0),
        ExpSum(dim=3, sigma0=0.5, sigma1=0.3),
        Quadratic(a=[1.0, 2.0, 0.5], sigma0=0.2, sigma1=0.1),
        GaussianLinreg(),
        LogisticToy(),
    ]


class TestCatalogConstruction:
    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown objective"):
            make_objective("rosenbrock")

    def test_bad_parameter(self):
        with pytest.raises(ValueError, match="bad parameters"):
            make_objective("quartic", wrong_knob=3)
        with pytest.raises(ValueError):
            make_objective("quartic", sigma0=-1.0)

    def test_spec_from_mapping(self):
        spec = ObjectiveSpec.from_mapping({"name": "quadratic", "params": {"a": [2.0]}})
        oracle = make_objective(spec)
        assert oracle.dim == 1
        with pytest.raises(ValueError):
            ObjectiveSpec.from_mapping({"name": "quadratic", "extra": 1})
        with pytest.raises(ValueError):
            ObjectiveSpec.from_mapping(["quadratic"])


class TestGaussianLinreg:
    def test_eval_at_two(self):
        oracle = GaussianLinreg()
        f, grad = oracle.eval([2.0])
        assert f == 4.0
        assert grad[0] == 4.0

    def test_second_moment_is_three_grad_sq(self):
        # E[z^4] = 3 for a standard normal, so E[g^2] = 12 w^2 = 3 (f'(w))^2
        oracle = GaussianLinreg()
        rng = np.random.default_rng(42)
        draws = oracle.sample_n([2.0], rng, 100_000)
        mean_sq = float(np.mean(draws ** 2))
        se = float(np.std(draws ** 2, ddof=1) / math.sqrt(draws.shape[0]))
        assert abs(mean_sq - 48.0) <= 4 * se
        assert oracle.noise.d0 == 0.0 and oracle.noise.d1 == 3.0

    def test_envelope_at_two(self):
        np.testing.assert_allclose(noise_envelope(GaussianLinreg(), [2.0]), [48.0])


class TestQuartic:
    def test_zero_point_isolates_d0(self):
        oracle = Quartic(dim=3, sigma0=1.0, sigma1=0.7)
        f, grad = oracle.eval(np.zeros(3))
        assert f == 0.0
        assert np.array_equal(grad, np.zeros(3))
        rng = np.random.default_rng(7)
        draws = oracle.sample_n(np.zeros(3), rng, 100_000)
        mean_sq = np.mean(draws ** 2, axis=0)
        se = np.std(draws ** 2, axis=0, ddof=1) / math.sqrt(draws.shape[0])
        assert np.all(np.abs(mean_sq - 1.0) <= 4 * se)

    def test_envelope_example(self):
        oracle = Quartic(dim=1, sigma0=1.0, sigma1=0.0)
        np.testing.assert_allclose(noise_envelope(oracle, [1.0]), [2.0])

    def test_envelope_collapses_to_d0_at_stationary_points(self):
        oracle = Quartic(dim=3, sigma0=1.5, sigma1=0.4)
        np.testing.assert_allclose(noise_envelope(oracle, np.zeros(3)), np.full(3, 2.25))

    def test_smoothness_constants_hold_on_box(self):
        oracle = Quartic(dim=4, sigma0=0.0, sigma1=0.0, box=2.0)
        l0, l1 = oracle.smooth.l0, oracle.smooth.l1
        rng = np.random.default_rng(3)
        for _ in range(400):
            x = rng.uniform(-2.0, 2.0, size=4)
            y = rng.uniform(-2.0, 2.0, size=4)
            _, gx = oracle.eval(x)
            _, gy = oracle.eval(y)
            lhs = np.abs(gx - gy)
            rhs = (l0 / 2.0 + l1 * np.abs(gx)) * np.linalg.norm(x - y)
            assert np.all(lhs <= rhs * (1 + 1e-12))


class TestExpSum:
    def test_eval(self):
        oracle = ExpSum(dim=2)
        f, grad = oracle.eval([0.0, 1.0])
        assert f == pytest.approx(1.0 + math.e, rel=1e-15)
        np.testing.assert_allclose(grad, [1.0, math.e], rtol=1e-15)
        assert oracle.smooth.l1 == 1.0 and not oracle.smooth.exact


class TestQuadratic:
    def test_eval_and_noiseless_sampling(self):
        oracle = Quadratic(a=[1.0])
        f, grad = oracle.eval([3.0])
        assert f == 4.5
        assert grad[0] == 3.0
        rng = np.random.default_rng(0)
        for _ in range(5):
            assert oracle.sample([3.0], rng)[0] == 3.0


class TestLogisticToy:
    def test_dataset_is_fixed_by_seed(self):
        a, b = LogisticToy(), LogisticToy()
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)
        c = LogisticToy(dataset_seed=1)
        assert not np.array_equal(a.features, c.features)

    def test_loss_is_bounded_below_by_f_inf(self):
        oracle = LogisticToy()
        f, _ = oracle.eval(np.zeros(oracle.dim))
        assert f >= oracle.f_inf == 0.0
        assert f == pytest.approx(math.log(2.0), rel=1e-12)


@pytest.mark.parametrize("oracle", stochastic_catalog(), ids=lambda o: o.name)
def test_unbiasedness_and_envelope(oracle):
    """Sampled gradients match the analytic gradient and the noise envelope."""
    rng = np.random.default_rng(np.random.SeedSequence(2024, spawn_key=(hash(oracle.name) % 2 ** 16,)))
    point_rng = np.random.default_rng(99)
    n = 100_000
    for _ in range(5):
        x = point_rng.uniform(-1.5, 1.5, size=oracle.dim)
        _, grad = oracle.eval(x)
        draws = oracle.sample_n(x, rng, n)
        mean = np.mean(draws, axis=0)
        se = np.std(draws, axis=0, ddof=1) / math.sqrt(n) + 1e-15
        assert np.all(np.abs(mean - grad) <= 4 * se), oracle.name
        mean_sq = np.mean(draws ** 2, axis=0)
        se_sq = np.std(draws ** 2, axis=0, ddof=1) / math.sqrt(n)
        envelope = noise_envelope(oracle, x)
        assert np.all(mean_sq <= envelope + 4 * se_sq), oracle.name


def test_chunked_draws_match_single_draws():
    """k-step pre-draws must replay exactly as k single-step samples."""
    for oracle in stochastic_catalog():
        x = np.full(oracle.dim, 0.3)
        a = np.random.default_rng(np.random.SeedSequence(5))
        b = np.random.default_rng(np.random.SeedSequence(5))
        raw = oracle.raw_draws(a, 7)
        singles = [oracle.sample(x, b) for _ in range(7)]
        _, grad = oracle.eval(x)
        X = np.tile(x, (1, 1))
        G = np.tile(grad, (1, 1))
        for j in range(7):
            chunked = oracle.noisy_grad(X, G, raw[j: j + 1])[0]
            assert np.array_equal(chunked, singles[j]), oracle.name
