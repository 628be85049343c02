"""Executable forms of the deterministic inequalities behind the analysis.

Three families live here:

* scalar-sequence bounds on the exponential-average pair
  a_t = beta2 a_{t-1} + (1-beta2) c_t^2,  b_t = beta1 b_{t-1} + (1-beta1) c_t;
* pathwise trajectory checks (telescoping sums, the potential-function
  increment decomposition, the surrogate split of the first-order term);
* Monte-Carlo diagnostics for the statements that only hold in conditional
  expectation.

Every check returns a BoundCheck rather than asserting, so callers decide
whether a violation is fatal.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
from scipy.signal import lfilter

RTOL = 1e-12
ATOL = 1e-12


def bound_holds(lhs: float, rhs: float, rtol: float = RTOL, atol: float = ATOL) -> bool:
    """lhs <= rhs up to rounding slack at near-tight cases."""
    return lhs <= rhs * (1.0 + rtol) + atol


@dataclasses.dataclass(frozen=True)
class SequenceCase:
    """One randomized instance of the scalar-sequence recurrences."""

    c: np.ndarray
    beta1: float
    beta2: float
    a0: float
    b0: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.float64))
        if self.c.ndim != 1 or self.c.size < 1:
            raise ValueError("c must be a nonempty 1-d sequence")
        if np.any(self.c < 0):
            raise ValueError("c must be nonnegative")
        if not (self.a0 > 0):
            raise ValueError("a0 must be positive")
        if self.zeta < 0:
            raise ValueError("zeta must be nonnegative")

    def sequences(self) -> tuple[np.ndarray, np.ndarray]:
        """(a_t, b_t) for t = 1..T."""
        a = lfilter([1.0 - self.beta2], [1.0, -self.beta2], self.c ** 2, zi=[self.beta2 * self.a0])[0]
        b = lfilter([1.0 - self.beta1], [1.0, -self.beta1], self.c, zi=[self.beta1 * self.b0])[0]
        return a, b


@dataclasses.dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    slack: float
    holds: bool
    label: str = ""

    @classmethod
    def compare(cls, lhs: float, rhs: float, label: str = "") -> "BoundCheck":
        lhs = float(lhs)
        rhs = float(rhs)
        return cls(lhs=lhs, rhs=rhs, slack=rhs - lhs, holds=bound_holds(lhs, rhs), label=label)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def check_momentum_ratio(case: SequenceCase) -> BoundCheck:
    """max_t b_t / sqrt(a_t + zeta) against its closed-form ceiling."""
    _require(0.0 <= case.beta1 and case.beta1 ** 2 < case.beta2 < 1.0,
             "requires beta1^2 < beta2 < 1")
    a, b = case.sequences()
    lhs = float(np.max(b / np.sqrt(a + case.zeta)))
    rhs = (1.0 - case.beta1) / (
        math.sqrt(1.0 - case.beta2) * math.sqrt(1.0 - case.beta1 ** 2 / case.beta2)
    )
    return BoundCheck.compare(lhs, rhs, "momentum_ratio")


def check_sum_ratio_log(case: SequenceCase, flip_exponent: bool = False) -> BoundCheck:
    """sum_t b_t^2 / a_t against the logarithmic closed form.

    ``flip_exponent`` deliberately mis-evaluates the prefactor; it exists as
    a negative control for the verification command.
    """
    _require(0.0 <= case.beta1 and case.beta1 ** 2 < case.beta2 < 1.0,
             "requires beta1^2 < beta2 < 1")
    a, b = case.sequences()
    lhs = float(np.sum(b ** 2 / a))
    prefactor = (1.0 - case.beta1) ** 2 / (
        (1.0 - case.beta1 / math.sqrt(case.beta2)) ** 2 * (1.0 - case.beta2)
    )
    # the injected bug evaluates log(beta2 ** -1), wrecking the bound's sign
    log_beta2 = math.log(1.0 / case.beta2) if flip_exponent else math.log(case.beta2)
    rhs = prefactor * (math.log(a[-1] / case.a0) - case.c.size * log_beta2)
    return BoundCheck.compare(lhs, rhs, "sum_ratio_log")


def check_sum_ratio_sqrt(case: SequenceCase) -> BoundCheck:
    """sum_t b_t^2 / sqrt(a_t) against the square-root closed form."""
    _require(0.0 <= case.beta1 and case.beta1 ** 4 < case.beta2 < 1.0,
             "requires beta1^4 < beta2 < 1")
    a, b = case.sequences()
    lhs = float(np.sum(b ** 2 / np.sqrt(a)))
    sqrt_a_prev = np.sqrt(np.concatenate(([case.a0], a[:-1])))
    prefactor = (1.0 - case.beta1) ** 2 / (1.0 - case.beta1 / case.beta2 ** 0.25) ** 2
    rhs = prefactor * (
        2.0 / (1.0 - case.beta2) * (math.sqrt(a[-1]) - math.sqrt(case.a0))
        + 2.0 * float(np.sum(sqrt_a_prev))
    )
    return BoundCheck.compare(lhs, rhs, "sum_ratio_sqrt")


def random_sequence_cases(n_cases, rng, t_max=512, c_max=10.0, need_beta1_quartic=False):
    """Sample valid SequenceCase instances for the property suites."""
    cases = []
    for _ in range(n_cases):
        t = int(rng.integers(1, t_max + 1))
        beta2 = float(rng.uniform(0.05, 0.999))
        root = beta2 ** (0.25 if need_beta1_quartic else 0.5)
        beta1 = float(rng.uniform(0.0, root * 0.999))
        cases.append(
            SequenceCase(
                c=rng.uniform(0.0, c_max, size=t),
                beta1=beta1,
                beta2=beta2,
                a0=float(rng.uniform(1e-12, 1.0)),
                zeta=float(rng.uniform(0.0, 2.0)),
            )
        )
    return cases


# ---------------------------------------------------------------------------
# Pathwise trajectory checks
# ---------------------------------------------------------------------------


def telescoping_lhs(v_hist: np.ndarray, v0: np.ndarray, beta2: float, zeta: float) -> np.ndarray:
    """Per-coordinate sum of 1/sqrt(beta2 v_{t-1} + zeta) - 1/sqrt(v_t + zeta)."""
    v_prev = np.vstack([v0[None, :], v_hist[:-1]])
    summand = 1.0 / np.sqrt(beta2 * v_prev + zeta) - 1.0 / np.sqrt(v_hist + zeta)
    return np.sum(summand, axis=0)


def check_telescoping(trajectory, config, i: int | None = None) -> BoundCheck:
    """Pathwise telescoping inequality; worst coordinate when i is None."""
    if trajectory.v is None or trajectory.v0 is None:
        raise ValueError("trajectory does not carry the second-moment log")
    lhs_all = telescoping_lhs(trajectory.v, trajectory.v0, config.beta2, config.zeta)
    lhs = float(lhs_all[i]) if i is not None else float(np.max(lhs_all))
    t = trajectory.v.shape[0]
    rhs = 1.0 / math.sqrt(config.zeta) + t * (1.0 - math.sqrt(config.beta2)) / math.sqrt(config.zeta)
    return BoundCheck.compare(lhs, rhs, "telescoping")


def descent_residual(trajectory, oracle, smooth) -> np.ndarray:
    """Pathwise slack of the generalized descent inequality, one value per step.

    Nonnegative residuals mean the inequality held on that step.  Leaving
    the box on which the constants are documented is reported as a warning,
    not an error; the residuals are still computed.
    """
    X = trajectory.x
    box = getattr(oracle, "box", None)
    if box is not None and float(np.max(np.abs(X))) > box:
        warnings.warn(
            "trajectory leaves the box on which the smoothness constants are documented",
            RuntimeWarning,
        )
    F, G = oracle.value_grad_many(X)
    dx = X[1:] - X[:-1]
    dnorm = np.linalg.norm(dx, axis=1)
    l0_term = smooth.l0 / (2.0 * math.sqrt(X.shape[1])) * dnorm * np.sum(np.abs(dx), axis=1)
    l1_term = 0.5 * smooth.l1 * dnorm * np.sum(np.abs(G[:-1]) * np.abs(dx), axis=1)
    first_order = np.einsum("td,td->t", G[:-1], -dx)
    return (F[:-1] - F[1:]) + l0_term + l1_term - first_order


def potential_iterates(x_hist: np.ndarray, beta1: float, beta2: float) -> np.ndarray:
    """u_t = (x_t - r x_{t-1}) / (1 - r) with r = beta1/sqrt(beta2), x_0 = x_1."""
    r = beta1 / math.sqrt(beta2)
    if r >= 1.0:
        raise ValueError("potential iterates require beta1 < sqrt(beta2)")
    xp = np.vstack([x_hist[0][None, :], x_hist])
    return (xp[1:] - r * xp[:-1]) / (1.0 - r)


def potential_sequence(trajectory, config, tol: float = 1e-10) -> np.ndarray:
    """Momentum-corrected iterates u_1..u_{T+1} with the increment identity verified.

    Each increment u_{t+1} - u_t is recomputed as the sum of the main
    gradient term, the surrogate-denominator error term and the zeta-mismatch
    term; a relative mismatch beyond ``tol`` raises.
    """
    if trajectory.g is None or trajectory.m is None or trajectory.v is None:
        raise ValueError("trajectory does not carry the per-step g/m/v logs")
    beta1, beta2, zeta, eta = config.beta1, config.beta2, config.zeta, config.eta
    u = potential_iterates(trajectory.x, beta1, beta2)
    c1 = 1.0 - beta1 / math.sqrt(beta2)

    v = trajectory.v
    v_prev = np.vstack([trajectory.v0[None, :], v[:-1]])
    m_prev = np.vstack([np.zeros_like(trajectory.m[0])[None, :], trajectory.m[:-1]])
    surr = np.sqrt(beta2 * v_prev + zeta)

    term_main = -eta * (1.0 - beta1) * trajectory.g / surr / c1
    term_surrogate = (-eta * trajectory.m / np.sqrt(v + zeta) + eta * trajectory.m / surr) / c1
    term_zeta = (
        eta * beta1 * m_prev / np.sqrt(beta2 * v_prev + beta2 * zeta)
        - eta * beta1 * m_prev / surr
    ) / c1

    du = u[1:] - u[:-1]
    total = term_main + term_surrogate + term_zeta
    scale = np.max(np.abs(term_main) + np.abs(term_surrogate) + np.abs(term_zeta) + np.abs(du))
    resid = np.max(np.abs(total - du))
    rel = 0.0 if scale == 0.0 else resid / scale
    if rel > tol:
        raise ArithmeticError(
            f"potential increment decomposition residual {rel:.3e} exceeds {tol:.1e}"
        )
    return u


def surrogate_decomposition(trajectory, oracle, t: int) -> tuple[float, float]:
    """Split of the first-order inner product at step t (1-indexed).

    Returns (first_a, first_b): the surrogate-denominator part and the
    denominator-swap error part, both pathwise samples.
    """
    if trajectory.g is None or trajectory.v is None:
        raise ValueError("trajectory does not carry the per-step g/v logs")
    if not 1 <= t <= trajectory.g.shape[0]:
        raise IndexError(f"step {t} outside 1..{trajectory.g.shape[0]}")
    config = trajectory.config
    x_t = trajectory.x[t - 1]
    g_t = trajectory.g[t - 1]
    v_t = trajectory.v[t - 1]
    v_prev = trajectory.v0 if t == 1 else trajectory.v[t - 2]
    _, grad = oracle.eval(x_t)
    surr = np.sqrt(config.beta2 * v_prev + config.zeta)
    first_a = float(np.dot(grad, config.eta * g_t / surr))
    first_b = float(np.dot(grad, config.eta * g_t / np.sqrt(v_t + config.zeta) - config.eta * g_t / surr))
    return first_a, first_b


@dataclasses.dataclass(frozen=True)
class McBoundReport:
    """Monte-Carlo estimate of an expectation-form inequality."""

    lhs_mean: float
    rhs_mean: float
    slack: float
    slack_se: float
    n_samples: int


def mc_first_order_b_bound(
    oracle, config, x_t, x_prev, v_prev, n_samples, rng, alpha0=1.0, alpha1=7.0
) -> McBoundReport:
    """Estimate the surrogate-error lower bound at a frozen state.

    Replays ``n_samples`` gradient draws at x_t on top of the pre-step second
    moment ``v_prev`` and reports the slack of
    E[first_b] >= -(closed-form bound); positive slack means the bound held.
    The alpha knobs default to the values the schedule analysis fixes.
    """
    d = oracle.dim
    _, grad_t = oracle.eval(x_t)
    _, grad_prev = oracle.eval(x_prev)
    d0, d1 = oracle.noise.d0, oracle.noise.d1
    l0, l1 = oracle.smooth.l0, oracle.smooth.l1
    eta, b2, zeta = config.eta, config.beta2, config.zeta

    g = oracle.sample_n(x_t, rng, n_samples)
    v_next = b2 * v_prev + (1.0 - b2) * g ** 2
    surr = np.sqrt(b2 * v_prev + zeta)
    inv_gap = 1.0 / surr - 1.0 / np.sqrt(v_next + zeta)  # (n, d)

    first_b = np.sum(grad_t * (eta * g / np.sqrt(v_next + zeta) - eta * g / surr), axis=1)

    # D1-multiplied form of the bracketed Young-split terms; identical for
    # d1 > 0 and well defined at d1 = 0.
    static = (
        eta * grad_t ** 2 / (2.0 * alpha0 * surr)
        + eta * alpha0 / (2.0 * surr)
        * (
            grad_t ** 2 / alpha1
            + alpha1 * d * d1 ** 2 * l0 ** 2 * eta ** 2 / (1.0 - b2)
            + 2.0 * math.sqrt(d) * eta * l1 * d1 * grad_t ** 2 / math.sqrt(1.0 - b2)
        )
    )
    stochastic = (
        eta * alpha0 * d0 / 2.0 * inv_gap
        + eta * alpha0 * d1 / 2.0
        * (grad_prev ** 2 / surr - grad_t ** 2 / np.sqrt(v_next + zeta))
    )
    rhs = np.sum(static) + np.sum(stochastic, axis=1)

    slack_samples = first_b + rhs
    return McBoundReport(
        lhs_mean=float(np.mean(first_b)),
        rhs_mean=float(np.mean(rhs)),
        slack=float(np.mean(slack_samples)),
        slack_se=float(np.std(slack_samples, ddof=1) / math.sqrt(n_samples)),
        n_samples=n_samples,
    )
