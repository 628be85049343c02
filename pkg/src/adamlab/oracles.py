"""Synthetic objectives with analytic gradients and stochastic-gradient samplers.

Every oracle in the catalog knows its noise constants (d0, d1) such that
E[g_i^2 | x] <= d0 + d1 * (grad_i f(x))^2, and coordinate-wise smoothness
constants (l0, l1) such that

    |grad_i f(x) - grad_i f(y)| <= (l0 / sqrt(d) + l1 |grad_i f(x)|) ||x - y||

holds either everywhere or on a documented box ||x||_inf <= box.

Samplers consume caller-supplied numpy Generators.  ``raw_draws(rng, k)``
pre-draws the randomness for k steps in one call; drawing k steps at once
yields the same stream as k single-step draws, which the batched trajectory
runner relies on.
"""

from __future__ import annotations

import dataclasses
from typing import Any

import numpy as np


@dataclasses.dataclass(frozen=True)
class NoiseModel:
    d0: float
    d1: float

    def __post_init__(self):
        if self.d0 < 0 or self.d1 < 0:
            raise ValueError("noise constants must be nonnegative")


@dataclasses.dataclass(frozen=True)
class SmoothnessModel:
    l0: float
    l1: float
    exact: bool = True

    def __post_init__(self):
        if self.l0 < 0 or self.l1 < 0:
            raise ValueError("smoothness constants must be nonnegative")


@dataclasses.dataclass(frozen=True)
class ObjectiveSpec:
    """Catalog entry name plus its parameter map (config-file friendly)."""

    name: str
    params: dict[str, Any] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_mapping(cls, doc) -> "ObjectiveSpec":
        if not isinstance(doc, dict) or "name" not in doc:
            raise ValueError("oracle spec must be a mapping with a 'name' field")
        unknown = set(doc) - {"name", "params"}
        if unknown:
            raise ValueError(f"unknown oracle spec keys: {sorted(unknown)}")
        return cls(name=doc["name"], params=dict(doc.get("params") or {}))


class ObjectiveOracle:
    """Base oracle: exact evaluation plus unbiased stochastic gradients.

    Subclasses implement ``value_grad_many`` (row-wise exact f and gradient),
    ``raw_draws`` (per-step randomness) and ``noisy_grad`` (map exact
    gradients plus raw randomness to gradient estimates).
    """

    name: str = ""
    dim: int = 0
    noise: NoiseModel = NoiseModel(0.0, 0.0)
    smooth: SmoothnessModel = SmoothnessModel(0.0, 0.0)
    f_inf: float = 0.0
    box: float | None = None

    def value_grad_many(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def raw_draws(self, rng: np.random.Generator, k: int) -> np.ndarray | None:
        """Randomness for k consecutive sample() calls; None if deterministic."""
        raise NotImplementedError

    def noisy_grad(self, X: np.ndarray, G: np.ndarray, raw) -> np.ndarray:
        """Gradient estimates for iterate rows X with exact gradients G."""
        raise NotImplementedError

    def eval(self, x) -> tuple[float, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        F, G = self.value_grad_many(x[None, :])
        return float(F[0]), G[0]

    def sample(self, x, rng: np.random.Generator) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        F, G = self.value_grad_many(x[None, :])
        raw = self.raw_draws(rng, 1)
        raw0 = None if raw is None else raw[0:1]
        return self.noisy_grad(x[None, :], G, raw0)[0]

    def sample_n(self, x, rng: np.random.Generator, n: int) -> np.ndarray:
        """n independent gradient estimates at a fixed point, shape (n, dim)."""
        x = np.asarray(x, dtype=np.float64)
        F, G = self.value_grad_many(x[None, :])
        X = np.broadcast_to(x, (n, self.dim))
        Gn = np.broadcast_to(G[0], (n, self.dim))
        raw = self.raw_draws(rng, n)
        return self.noisy_grad(X, Gn, raw)


def noise_envelope(oracle: ObjectiveOracle, x) -> np.ndarray:
    """Analytic bound d0 + d1 * grad_i^2 on E[g_i^2] at x, per coordinate."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    _, grad = oracle.eval(x)
    return oracle.noise.d0 + oracle.noise.d1 * grad ** 2


class _GaussianNoiseOracle(ObjectiveOracle):
    """Shared sampler g_i = grad_i * (1 + sigma1 * xi_i) + sigma0 * xi'_i."""

    def __init__(self, dim, sigma0, sigma1):
        if sigma0 < 0 or sigma1 < 0:
            raise ValueError("noise scales must be nonnegative")
        self.dim = int(dim)
        self.sigma0 = float(sigma0)
        self.sigma1 = float(sigma1)
        self.noise = NoiseModel(d0=self.sigma0 ** 2, d1=1.0 + self.sigma1 ** 2)
        self._n_draws = (1 if self.sigma1 > 0 else 0) + (1 if self.sigma0 > 0 else 0)

    def raw_draws(self, rng, k):
        if self._n_draws == 0:
            return None
        return rng.standard_normal((k, self._n_draws, self.dim))

    def noisy_grad(self, X, G, raw):
        g = G
        j = 0
        if self.sigma1 > 0:
            g = g * (1.0 + self.sigma1 * raw[:, j])
            j += 1
        if self.sigma0 > 0:
            g = g + self.sigma0 * raw[:, j]
        return np.array(g, dtype=np.float64, copy=True)


class Quartic(_GaussianNoiseOracle):
    """f(x) = sum_i x_i^4 / 4.  Curvature grows with the gradient.

    On the box ||x||_inf <= box the documented constants l0 = 3 sqrt(d) box^2,
    l1 = 3 / box satisfy the coordinate-wise smoothness inequality.
    """

    name = "quartic"

    def __init__(self, dim=10, sigma0=1.0, sigma1=0.0, box=1.0):
        super().__init__(dim, sigma0, sigma1)
        if box <= 0:
            raise ValueError("box must be positive")
        self.box = float(box)
        self.smooth = SmoothnessModel(
            l0=3.0 * np.sqrt(self.dim) * self.box ** 2, l1=3.0 / self.box
        )
        self.f_inf = 0.0

    def value_grad_many(self, X):
        x2 = X * X
        return 0.25 * np.einsum("sd,sd->s", x2, x2), x2 * X


class ExpSum(_GaussianNoiseOracle):
    """f(x) = sum_i exp(x_i).  Locally the smoothness slope in |grad_i| is 1.

    The (l0, l1) pair is documented as approximate: it is the infinitesimal
    limit, valid for displacements small relative to 1.
    """

    name = "exp_sum"

    def __init__(self, dim=1, sigma0=0.0, sigma1=0.0):
        super().__init__(dim, sigma0, sigma1)
        self.box = None  # the constants are a local statement, not a box bound
        self.smooth = SmoothnessModel(l0=0.0, l1=1.0, exact=False)
        self.f_inf = 0.0

    def value_grad_many(self, X):
        E = np.exp(X)
        return np.sum(E, axis=1), E


class Quadratic(_GaussianNoiseOracle):
    """f(x) = 0.5 * sum_i a_i x_i^2, the exact L-smooth baseline (l1 = 0)."""

    name = "quadratic"

    def __init__(self, a=(1.0,), sigma0=0.0, sigma1=0.0):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 1 or np.any(a <= 0):
            raise ValueError("curvatures a must be a vector of positives")
        super().__init__(a.size, sigma0, sigma1)
        self.a = a
        self.smooth = SmoothnessModel(l0=float(np.sqrt(a.size) * np.max(a)), l1=0.0)
        self.f_inf = 0.0

    def value_grad_many(self, X):
        return 0.5 * np.sum(self.a * X ** 2, axis=1), self.a * X


class GaussianLinreg(ObjectiveOracle):
    """Scalar least squares f(w) = w^2 realized through samples z ~ N(0, 1).

    The estimate g = 2 z^2 w is unbiased with E[g^2] = 3 (f'(w))^2 exactly,
    i.e. d0 = 0 (strong growth) and d1 = 3.
    """

    name = "gaussian_linreg"
    dim = 1

    def __init__(self):
        self.noise = NoiseModel(d0=0.0, d1=3.0)
        self.smooth = SmoothnessModel(l0=2.0, l1=0.0)
        self.f_inf = 0.0
        self.box = None

    def value_grad_many(self, X):
        return X[:, 0] ** 2, 2.0 * X

    def raw_draws(self, rng, k):
        return rng.standard_normal((k, 1))

    def noisy_grad(self, X, G, raw):
        return G * raw ** 2


class LogisticToy(ObjectiveOracle):
    """Finite-sum logistic regression on a fixed seeded synthetic dataset.

    The full-batch loss and gradient are deterministic; stochasticity comes
    from minibatch sampling with replacement.  d0 bounds the per-coordinate
    second moment via the per-sample gradient magnitudes, so the affine
    envelope holds with d1 = 1.
    """

    name = "logistic_toy"

    def __init__(self, n_samples=200, n_features=10, batch_size=16, dataset_seed=20240501):
        if n_samples < 2 or n_features < 1 or batch_size < 1:
            raise ValueError("invalid dataset sizes")
        self.dim = int(n_features)
        self.n_samples = int(n_samples)
        self.batch_size = int(batch_size)
        data_rng = np.random.default_rng(dataset_seed)
        self.features = data_rng.standard_normal((self.n_samples, self.dim))
        w_true = data_rng.standard_normal(self.dim)
        logits = self.features @ w_true
        probs = 1.0 / (1.0 + np.exp(-logits))
        self.labels = np.where(data_rng.random(self.n_samples) < probs, 1.0, -1.0)
        d0 = float(np.max(np.max(self.features ** 2, axis=0)))
        self.noise = NoiseModel(d0=d0, d1=1.0)
        l_coord = np.max(
            0.25
            * np.mean(np.abs(self.features) * np.linalg.norm(self.features, axis=1)[:, None], axis=0)
        )
        self.smooth = SmoothnessModel(l0=float(np.sqrt(self.dim) * l_coord), l1=0.0)
        self.f_inf = 0.0
        self.box = None

    def _margin_grad(self, Xb, yb, W):
        # Xb: (S, b, p), yb: (S, b), W: (S, p)
        z = np.einsum("sbp,sp->sb", Xb, W)
        coef = -yb / (1.0 + np.exp(yb * z))
        return np.einsum("sb,sbp->sp", coef, Xb) / Xb.shape[1]

    def value_grad_many(self, X):
        z = X @ self.features.T  # (S, n)
        yz = self.labels * z
        F = np.mean(np.logaddexp(0.0, -yz), axis=1)
        coef = -self.labels / (1.0 + np.exp(yz))
        G = (coef @ self.features) / self.n_samples
        return F, G

    def raw_draws(self, rng, k):
        return rng.integers(0, self.n_samples, size=(k, self.batch_size))

    def noisy_grad(self, X, G, raw):
        if raw.shape[0] != X.shape[0]:
            raise ValueError("minibatch draws do not match batch rows")
        Xb = self.features[raw]
        yb = self.labels[raw]
        return self._margin_grad(Xb, yb, X)


_CATALOG = {
    "quartic": Quartic,
    "exp_sum": ExpSum,
    "gaussian_linreg": GaussianLinreg,
    "quadratic": Quadratic,
    "logistic_toy": LogisticToy,
}


def make_objective(spec: ObjectiveSpec | str, **params) -> ObjectiveOracle:
    """Instantiate a catalog oracle from a spec or from name + keyword params."""
    if isinstance(spec, str):
        spec = ObjectiveSpec(spec, params)
    elif params:
        raise TypeError("pass parameters inside the ObjectiveSpec")
    try:
        cls = _CATALOG[spec.name]
    except KeyError:
        raise ValueError(
            f"unknown objective {spec.name!r}; available: {sorted(_CATALOG)}"
        ) from None
    try:
        return cls(**spec.params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for objective {spec.name!r}: {exc}") from None
