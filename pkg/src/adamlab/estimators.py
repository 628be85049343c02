"""Empirical recovery of smoothness and noise constants from trajectories.

Two estimators mirror how the analytic constants are defined:

* coordinate smoothness: probe the exact gradient along the segment between
  consecutive iterates at a grid of fractions gamma and take, per coordinate,
  the largest difference quotient;
* affine noise: at a spread of points, average squared gradient samples and
  fit E[g_i^2] = d0 + d1 (grad_i f)^2 with nonnegative coefficients, both as
  a least-squares line and as an upper 0.95-quantile envelope (the target is
  an inequality, not a regression line).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.optimize import linprog, nnls

from .oracles import ObjectiveOracle

MIN_DISPLACEMENT = 1e-12


class DegenerateDisplacement(ValueError):
    """The probe segment is too short to measure a difference quotient."""


class FitError(ValueError):
    """Not enough usable samples for the requested fit."""


@dataclasses.dataclass(frozen=True)
class SmoothnessSample:
    t: int
    i: int
    grad_abs: float
    local_l: float

    def __post_init__(self):
        if self.grad_abs < 0 or self.local_l < 0:
            raise ValueError("samples carry magnitudes, not signed values")


@dataclasses.dataclass(frozen=True)
class AffineFit:
    d0_hat: float
    d1_hat: float
    residual: float
    n_points: int
    rank_deficient: bool = False


@dataclasses.dataclass(frozen=True)
class CoordinateFit:
    """Least-squares and envelope lines for one coordinate's smoothness samples."""

    l0_hat: float
    l1_hat: float
    l0_env: float
    l1_env: float
    residual: float
    n_samples: int


DEFAULT_GAMMAS = (0.125, 0.25, 0.5, 1.0)


def estimate_coordinate_smoothness(
    oracle: ObjectiveOracle, x_t, x_next, gammas=DEFAULT_GAMMAS
) -> np.ndarray:
    """Per-coordinate max difference quotient of the gradient along a segment."""
    x_t = np.asarray(x_t, dtype=np.float64)
    x_next = np.asarray(x_next, dtype=np.float64)
    gammas = np.asarray(gammas, dtype=np.float64)
    if np.any(gammas <= 0) or np.any(gammas > 1):
        raise ValueError("every gamma must lie in (0, 1]")
    delta = x_next - x_t
    dist = float(np.linalg.norm(delta))
    if dist <= MIN_DISPLACEMENT:
        raise DegenerateDisplacement(f"displacement {dist} below {MIN_DISPLACEMENT}")
    _, g_ref = oracle.eval(x_t)
    probes = x_t[None, :] + gammas[:, None] * delta[None, :]
    _, G = oracle.value_grad_many(probes)
    usable = gammas * dist > MIN_DISPLACEMENT
    if not usable.any():
        raise DegenerateDisplacement("all probe offsets below the displacement guard")
    quotients = np.abs(G[usable] - g_ref[None, :]) / (gammas[usable, None] * dist)
    return np.max(quotients, axis=0)


def collect_smoothness_samples(
    trajectory, oracle: ObjectiveOracle, gammas=DEFAULT_GAMMAS, pool_gammas: bool = False
) -> tuple[list[SmoothnessSample], int]:
    """SmoothnessSamples from every consecutive iterate pair of a trajectory.

    Degenerate steps are skipped and counted.  With ``pool_gammas`` each probe
    fraction contributes its own sample instead of the per-step max.
    """
    samples: list[SmoothnessSample] = []
    skipped = 0
    X = trajectory.x
    _, G = oracle.value_grad_many(X[:-1])
    for t in range(X.shape[0] - 1):
        try:
            if pool_gammas:
                rows = [
                    estimate_coordinate_smoothness(oracle, X[t], X[t + 1], [g])
                    for g in gammas
                ]
            else:
                rows = [estimate_coordinate_smoothness(oracle, X[t], X[t + 1], gammas)]
        except DegenerateDisplacement:
            skipped += 1
            continue
        for local in rows:
            for i in range(local.size):
                samples.append(
                    SmoothnessSample(
                        t=t + 1, i=i, grad_abs=float(abs(G[t, i])), local_l=float(local[i])
                    )
                )
    return samples, skipped


def _quantile_line(A: np.ndarray, y: np.ndarray, q: float) -> np.ndarray:
    """Nonnegative coefficients minimizing the pinball loss at quantile q."""
    n, p = A.shape
    # variables: theta (p) >= 0, u+ (n) >= 0, u- (n) >= 0 with y = A theta + u+ - u-
    c = np.concatenate([np.zeros(p), np.full(n, q), np.full(n, 1.0 - q)])
    a_eq = np.hstack([A, np.eye(n), -np.eye(n)])
    res = linprog(c, A_eq=a_eq, b_eq=y, bounds=[(0, None)] * (p + 2 * n), method="highs")
    if not res.success:
        raise FitError(f"quantile fit failed: {res.message}")
    return res.x[:p]


def fit_l0_l1(
    samples: list[SmoothnessSample],
    dim: int | None = None,
    min_samples: int = 10,
    envelope_q: float = 0.95,
) -> dict[int, CoordinateFit]:
    """Per-coordinate nonnegative fits local_l = l0/sqrt(d) + l1 * |grad_i|.

    ``dim`` defaults to the largest coordinate index seen plus one.
    """
    by_coord: dict[int, list[SmoothnessSample]] = {}
    for s in samples:
        by_coord.setdefault(s.i, []).append(s)
    if not by_coord:
        raise FitError("no samples to fit")
    if dim is None:
        dim = max(by_coord) + 1
    out: dict[int, CoordinateFit] = {}
    root_d = math.sqrt(dim)
    for i, rows in sorted(by_coord.items()):
        if len(rows) < min_samples:
            raise FitError(f"coordinate {i}: {len(rows)} samples < {min_samples}")
        grad_abs = np.array([r.grad_abs for r in rows])
        local = np.array([r.local_l for r in rows])
        if float(np.ptp(grad_abs)) < 1e-12:
            raise FitError(f"coordinate {i}: gradient magnitudes are degenerate")
        A = np.column_stack([np.full(len(rows), 1.0 / root_d), grad_abs])
        coef, rnorm = nnls(A, local)
        env = _quantile_line(A, local, envelope_q)
        out[i] = CoordinateFit(
            l0_hat=float(coef[0]),
            l1_hat=float(coef[1]),
            l0_env=float(env[0]),
            l1_env=float(env[1]),
            residual=float(rnorm / math.sqrt(len(rows))),
            n_samples=len(rows),
        )
    return out


def estimate_affine_noise(
    oracle: ObjectiveOracle,
    points,
    n_samples: int,
    rng: np.random.Generator,
    pooled: bool = False,
) -> list[AffineFit] | AffineFit:
    """Fit E[g_i^2] = d0 + d1 (grad_i f)^2 from sampled gradients.

    Returns one AffineFit per coordinate, or a single fit over all
    coordinates when ``pooled``.  Fits with no spread in the squared
    gradient are flagged rank-deficient rather than rejected.
    """
    if n_samples < 100:
        raise FitError("n_samples must be at least 100")
    points = [np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in points]
    if not points:
        raise FitError("need at least one evaluation point")
    second_moment = np.empty((len(points), oracle.dim))
    grad_sq = np.empty((len(points), oracle.dim))
    for k, p in enumerate(points):
        _, grad = oracle.eval(p)
        draws = oracle.sample_n(p, rng, n_samples)
        second_moment[k] = np.mean(draws ** 2, axis=0)
        grad_sq[k] = grad ** 2

    def fit(y: np.ndarray, z: np.ndarray) -> AffineFit:
        deficient = float(np.ptp(z)) < 1e-12 or y.size < 2
        A = np.column_stack([np.ones_like(z), z])
        coef, rnorm = nnls(A, y)
        return AffineFit(
            d0_hat=float(coef[0]),
            d1_hat=float(coef[1]),
            residual=float(rnorm / math.sqrt(y.size)),
            n_points=int(y.size),
            rank_deficient=deficient,
        )

    if pooled:
        return fit(second_moment.ravel(), grad_sq.ravel())
    return [fit(second_moment[:, i], grad_sq[:, i]) for i in range(oracle.dim)]
