"""Hyperparameter schedules that certify an epsilon-stationary point.

Given problem constants (dimension, smoothness, noise envelope, initial gap)
and a target epsilon, these routines emit (beta2, eta, T) together with every
intermediate constant, for both the momentum-free schedule and the momentum
schedule.  Constraint branches whose denominators vanish impose no ceiling
and are treated as +inf (for step-size/beta2 ceilings) or no floor, 0 (for
iteration-count floors).
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .oracles import NoiseModel, ObjectiveOracle, SmoothnessModel


class ScheduleError(ValueError):
    """The schedule formulas are not satisfiable for these inputs."""


def _ceiling(num: float, den: float) -> float:
    """num / den as an upper-bound branch; vacuous denominators give +inf."""
    if not (den > 0.0) or not math.isfinite(den):
        return math.inf
    return num / den


def _floor(value: float) -> float:
    """A lower-bound branch; vacuous values impose no floor."""
    if not math.isfinite(value):
        return 0.0
    return value


@dataclasses.dataclass(frozen=True)
class ProblemConstants:
    """Everything the schedules need to know about one optimization problem."""

    d: int
    smooth: SmoothnessModel
    noise: NoiseModel
    zeta: float
    f1: float
    grad1_sq: float
    f_star: float
    v0_norm: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        if not (self.zeta > 0):
            raise ValueError("zeta must be positive")
        if self.grad1_sq < 0 or self.v0_norm < 0:
            raise ValueError("grad1_sq and v0_norm must be nonnegative")
        for name in ("f1", "f_star"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.f1 < self.f_star:
            raise ValueError("f1 must be at least the objective lower bound")

    @property
    def l0(self):
        return self.smooth.l0

    @property
    def l1(self):
        return self.smooth.l1

    @property
    def d0(self):
        return self.noise.d0

    @property
    def d1(self):
        return self.noise.d1

    @property
    def c(self) -> float:
        """sqrt(zeta) + d * sqrt(d0 + ||v0||)."""
        return math.sqrt(self.zeta) + self.d * math.sqrt(self.d0 + self.v0_norm)


def problem_constants(oracle: ObjectiveOracle, x1, zeta: float, v0=None) -> ProblemConstants:
    """Assemble ProblemConstants for a run of ``oracle`` started at x1."""
    x1 = np.asarray(x1, dtype=np.float64)
    f1, grad1 = oracle.eval(x1)
    if v0 is None:
        v0 = np.full(oracle.dim, zeta)
    else:
        v0 = np.asarray(v0, dtype=np.float64)
    return ProblemConstants(
        d=oracle.dim,
        smooth=oracle.smooth,
        noise=oracle.noise,
        zeta=zeta,
        f1=f1,
        grad1_sq=float(np.dot(grad1, grad1)),
        f_star=oracle.f_inf,
        v0_norm=float(np.linalg.norm(v0)),
    )


@dataclasses.dataclass(frozen=True)
class ScheduleResult:
    optimizer: str
    eps: float
    beta1: float
    beta2: float
    eta: float
    t_min: int
    predicted_bound: float
    in_regime: bool
    constants: dict[str, float]


# ---------------------------------------------------------------------------
# Momentum-free schedule
# ---------------------------------------------------------------------------


def _rmsprop_derived(eps: float, pc: ProblemConstants, eta: float) -> dict[str, float]:
    """All schedule constants as functions of (eps, problem, eta)."""
    d, l0, l1, d0, d1, zeta = pc.d, pc.l0, pc.l1, pc.d0, pc.d1, pc.zeta
    sd = math.sqrt(d)
    alpha0 = 1.0
    lam1 = _ceiling(1.0, max(14.0 * l1 * sd * d1, 7.0 * l1 * math.sqrt(d * d1)))
    lam2 = min(
        _ceiling(zeta, 35.0 * l0 * d * d0),
        _ceiling(math.sqrt(zeta), 35.0 * l1 ** 2 * d ** 1.5 * d0),
    )
    lam3 = _ceiling(zeta ** 0.25, 7.0 * d1 * l0 * d * math.sqrt(5.0))
    delta = (
        pc.f1
        - pc.f_star
        + eta * alpha0 * d * d0 / (2.0 * math.sqrt(zeta))
        + eta * alpha0 * d1 * pc.grad1_sq / (2.0 * math.sqrt(zeta))
    )
    return {
        "c": pc.c,
        "alpha0": alpha0,
        "Lambda1": lam1,
        "Lambda2": lam2,
        "Lambda3": lam3,
        "Delta": delta,
    }


def rmsprop_schedule(eps: float, pc: ProblemConstants, eta_override: float | None = None) -> ScheduleResult:
    """Momentum-free schedule: beta2, the largest admissible eta, and T.

    Out-of-regime targets (eps above the smallness threshold) are computed
    anyway and flagged through ``in_regime``.
    """
    if not (eps > 0):
        raise ScheduleError("eps must be positive")
    d, l0, d0, d1, zeta = pc.d, pc.l0, pc.d0, pc.d1, pc.zeta

    one_minus_beta2 = min(
        _ceiling(1.0, 7.0 * d1),
        _ceiling(math.sqrt(zeta) * eps ** 2, 35.0 * d * d0),
        0.5,
    )
    if not (one_minus_beta2 > 0):
        raise ScheduleError("degenerate problem constants: beta2 is not defined")
    beta2 = 1.0 - one_minus_beta2

    base = _rmsprop_derived(eps, pc, eta=0.0)
    eta_ceiling = min(
        _ceiling(math.sqrt(zeta), 7.0 * l0 * d1),
        base["Lambda1"] * math.sqrt(one_minus_beta2),
        one_minus_beta2 / (7.0 * math.sqrt(d)),
        base["Lambda2"] * eps ** 2,
        base["Lambda3"] * eps * math.sqrt(one_minus_beta2),
    )
    eta = eta_ceiling
    if eta_override is not None:
        if eta_override > eta_ceiling:
            raise ScheduleError(f"eta override {eta_override} exceeds the ceiling {eta_ceiling}")
        eta = eta_override

    constants = _rmsprop_derived(eps, pc, eta)
    constants["one_minus_beta2"] = one_minus_beta2
    constants["eta_ceiling"] = eta_ceiling
    t_min = max(1, math.ceil(70.0 * constants["Delta"] / (eta * eps ** 2)))
    bound = (2.0 * d * math.sqrt(35.0 * d0 * d1) / zeta ** 0.25 + math.sqrt(pc.c)) * eps
    eps_threshold = _ceiling(math.sqrt(5.0 * d * d0), math.sqrt(d1) * zeta ** 0.25)
    return ScheduleResult(
        optimizer="rmsprop",
        eps=eps,
        beta1=0.0,
        beta2=beta2,
        eta=eta,
        t_min=t_min,
        predicted_bound=bound,
        in_regime=eps <= eps_threshold,
        constants=constants,
    )


# ---------------------------------------------------------------------------
# Momentum schedule
# ---------------------------------------------------------------------------


def _adam_core_constants(beta1: float, beta2: float, pc: ProblemConstants) -> dict[str, float]:
    """Constants that depend only on (beta1, beta2) and the problem."""
    if beta1 ** 2 >= beta2:
        raise ScheduleError(f"beta1^2={beta1 ** 2} must stay below beta2={beta2}")
    d, l0, l1, d0, d1, zeta = pc.d, pc.l0, pc.l1, pc.d0, pc.d1, pc.zeta
    sd = math.sqrt(d)
    c1 = 1.0 - beta1 / math.sqrt(beta2)
    c2 = math.sqrt(1.0 - beta1 ** 2 / beta2)
    q = 1.0 - beta1 / beta2 ** 0.25  # quartic-root analogue of c1
    one_minus_b1 = 1.0 - beta1

    alpha0 = 21.0 / (2.0 * c2)
    alpha1 = 21.0 * alpha0 / (2.0 * c2)
    alpha3 = 7.0 * beta1 * math.sqrt(zeta) / (2.0 * c2)
    alpha4 = 14.0 * l1 * sd * (2.0 - c1) ** 2 / (c1 * one_minus_b1)

    c3 = (
        2.0 * (1.0 - c1) ** 2 * sd * l0 / c1 ** 2
        + (2.0 - c1) * sd * l0 / c1 ** 2
        + sd * l0 * ((1.0 - c1) ** 2 + 1.0) / c1 ** 2
    )
    c4 = (
        alpha4 * one_minus_b1 ** 2 * d * l1 * ((1.0 - c1) + (1.0 - c1) ** 2)
        / (2.0 * c1 ** 2 * c2 ** 2)
        + sd * l1 * (2.0 + 2.0 * (2.0 - c1) ** 2) / c1 ** 2
        * alpha4 * one_minus_b1 ** 2 / (2.0 * c2 ** 2)
    )
    c5 = min(
        _ceiling(c1, 112.0 * c3 * one_minus_b1 * d * d1),
        _ceiling(q, 168.0 * d1 * c1 * c4 * one_minus_b1 * d),
    )
    sqrt_dv = math.sqrt(d0 + pc.v0_norm)
    c6 = min(
        _ceiling(c2 * math.sqrt(zeta), 21.0 * alpha0 * d * d0),
        _ceiling(
            c2 ** 3 * math.sqrt(zeta),
            21.0 * alpha0 * alpha1 * d1 ** 2 * l0 ** 2 * one_minus_b1 ** 2 * d ** 2 * c5 ** 2,
        ),
        _ceiling(c2, 21.0 * alpha3 * d * beta1),
        _ceiling(c1, 84.0 * c3 * c5 * d * one_minus_b1),
        _ceiling(q ** 2, 84.0 * c1 * c4 * c5 ** 2 * one_minus_b1 * d * sqrt_dv),
        _ceiling(c1 ** 2, 784.0 * c3 ** 2 * c5 ** 2 * one_minus_b1 ** 2 * d * d1),
        _ceiling(q ** 4, 7056.0 * c1 ** 2 * c4 ** 2 * c5 ** 4 * d * d1),
    )
    lam4 = min(
        _ceiling(c2 ** 2, 21.0 * alpha0 * sd * d1 * l1 * one_minus_b1),
        _ceiling(c1 * c2, sd * l1 * (1.0 - c1) * one_minus_b1),
    )
    # Uniform-v0 reading of the per-coordinate log sum.
    sum_log_v0 = d * math.log(pc.v0_norm / sd) if pc.v0_norm > 0 else -math.inf
    lam5 = _floor(126.0 * c3 * c5 * one_minus_b1 / c1 * (2.0 * d * sqrt_dv - sum_log_v0))
    lam6 = _floor(252.0 * c5 ** 2 * c1 * c4 * one_minus_b1 * d / q ** 2 * sqrt_dv)
    return {
        "c": pc.c,
        "C1": c1,
        "C2": c2,
        "alpha0": alpha0,
        "alpha1": alpha1,
        "alpha3": alpha3,
        "alpha4": alpha4,
        "C3": c3,
        "C4": c4,
        "C5": c5,
        "C6": c6,
        "Lambda4": lam4,
        "Lambda5": lam5,
        "Lambda6": lam6,
    }


def _adam_one_minus_beta2(eps: float, consts: dict[str, float], d1: float) -> float:
    return min(
        _ceiling(2.0 * consts["C2"], 7.0 * consts["alpha0"] * d1),
        consts["C6"] * eps ** 2,
        0.5,
    )


def adam_schedule(
    eps: float,
    beta1: float,
    pc: ProblemConstants,
    eta_override: float | None = None,
    max_iter: int = 100,
    fp_tol: float = 1e-14,
) -> ScheduleResult:
    """Momentum schedule: resolves the beta2 fixed point, then eta and T.

    beta2 feeds the constants that define beta2's own ceiling, so it is
    resolved by damped fixed-point iteration; the final constants are
    re-derived from the converged beta2 so that re-evaluating every formula
    from the emitted hyperparameters reproduces them exactly.
    """
    if not (eps > 0):
        raise ScheduleError("eps must be positive")
    if not (0.0 <= beta1 < 1.0):
        raise ScheduleError("the momentum schedule needs beta1 in [0, 1)")
    d, d1 = pc.d, pc.d1

    c2_seed = math.sqrt(1.0 - beta1 ** 2)
    alpha0_seed = 21.0 / (2.0 * c2_seed)
    one_minus_beta2 = min(_ceiling(2.0 * c2_seed, 7.0 * alpha0_seed * d1), eps ** 2, 0.5)
    beta2 = 1.0 - one_minus_beta2

    prev_delta = 0.0
    converged = False
    polish_left = 8
    for _ in range(max_iter):
        consts = _adam_core_constants(beta1, beta2, pc)
        beta2_new = 1.0 - _adam_one_minus_beta2(eps, consts, d1)
        delta = beta2_new - beta2
        if delta == 0.0:
            converged = True
            break
        if not converged and prev_delta * delta < 0:
            beta2_new = 0.5 * (beta2 + beta2_new)  # damp oscillation
        prev_delta = delta
        beta2 = beta2_new
        if abs(delta) < fp_tol:
            converged = True
            polish_left -= 1  # chase the exact fixed point a little longer
            if polish_left <= 0:
                break
    if not converged:
        raise ScheduleError("beta2 fixed point did not converge")
    if beta1 > math.sqrt(beta2):
        raise ScheduleError(f"resolved beta2={beta2} violates beta1 <= sqrt(beta2)")
    if beta2 <= 0.5:
        raise ScheduleError(f"resolved beta2={beta2} is at or below 1/2")

    consts = _adam_core_constants(beta1, beta2, pc)
    one_minus_beta2 = 1.0 - beta2
    eta_ceiling = min(
        consts["Lambda4"] * math.sqrt(one_minus_beta2),
        consts["C5"] * one_minus_beta2,
    )
    if not math.isfinite(eta_ceiling):
        # Every ceiling was vacuous (no curvature/noise coupling); fall back
        # to the always-finite momentum-free ceiling of the same eps order.
        eta_ceiling = one_minus_beta2 / (7.0 * math.sqrt(d))
    eta = eta_ceiling
    if eta_override is not None:
        if eta_override > eta_ceiling:
            raise ScheduleError(f"eta override {eta_override} exceeds the ceiling {eta_ceiling}")
        eta = eta_override

    derived = _adam_derived(eps, beta1, beta2, pc, eta)
    derived["eta_ceiling"] = eta_ceiling
    t_min = max(
        1,
        math.ceil(
            max(
                126.0 * consts["C1"] * derived["DeltaPrime"] / (eta * (1.0 - beta1) * eps ** 2),
                consts["Lambda5"] / eps ** 2,
                consts["Lambda6"] / eps ** 2,
            )
        ),
    )
    bound = (
        2.0 * pc.c
        + math.sqrt(2.0 * pc.c)
        + 4.0 * math.sqrt(d * d1) / math.sqrt(consts["C6"])
    ) * eps
    eps_threshold = _ceiling(
        math.sqrt(2.0 * consts["C2"]), math.sqrt(7.0 * consts["alpha0"] * consts["C6"] * d1)
    )
    return ScheduleResult(
        optimizer="adam",
        eps=eps,
        beta1=beta1,
        beta2=beta2,
        eta=eta,
        t_min=t_min,
        predicted_bound=bound,
        in_regime=eps <= eps_threshold,
        constants=derived,
    )


def _adam_derived(eps, beta1, beta2, pc, eta) -> dict[str, float]:
    """Every momentum-schedule constant from the emitted hyperparameters."""
    consts = _adam_core_constants(beta1, beta2, pc)
    c1, c2 = consts["C1"], consts["C2"]
    delta_prime = (
        pc.f1
        - pc.f_star
        + eta * consts["alpha0"] * pc.d * pc.d0 * (1.0 - beta1) / (2.0 * c1 * c2 * math.sqrt(pc.zeta))
        + eta * consts["alpha0"] * pc.d1 * (1.0 - beta1) * pc.grad1_sq
        / (2.0 * c1 * c2 * math.sqrt(pc.zeta))
    )
    out = dict(consts)
    out["DeltaPrime"] = delta_prime
    out["one_minus_beta2"] = 1.0 - beta2
    return out


def recompute_constants(result: ScheduleResult, pc: ProblemConstants) -> dict[str, float]:
    """Re-derive the constants map from the emitted hyperparameters.

    Used as the self-consistency oracle: the returned map must agree
    bit-for-bit with ``result.constants`` (the eta ceiling included, unless
    eta was overridden below it).
    """
    if result.optimizer == "rmsprop":
        out = _rmsprop_derived(result.eps, pc, result.eta)
        one_minus_beta2 = min(
            _ceiling(1.0, 7.0 * pc.d1),
            _ceiling(math.sqrt(pc.zeta) * result.eps ** 2, 35.0 * pc.d * pc.d0),
            0.5,
        )
        out["one_minus_beta2"] = one_minus_beta2
        out["eta_ceiling"] = min(
            _ceiling(math.sqrt(pc.zeta), 7.0 * pc.l0 * pc.d1),
            out["Lambda1"] * math.sqrt(one_minus_beta2),
            one_minus_beta2 / (7.0 * math.sqrt(pc.d)),
            out["Lambda2"] * result.eps ** 2,
            out["Lambda3"] * result.eps * math.sqrt(one_minus_beta2),
        )
        return out
    out = _adam_derived(result.eps, result.beta1, result.beta2, pc, result.eta)
    one_minus_beta2 = 1.0 - result.beta2
    out["eta_ceiling"] = min(
        out["Lambda4"] * math.sqrt(one_minus_beta2),
        out["C5"] * one_minus_beta2,
    )
    if not math.isfinite(out["eta_ceiling"]):
        out["eta_ceiling"] = one_minus_beta2 / (7.0 * math.sqrt(pc.d))
    return out


def target_bound(result: ScheduleResult, which: str) -> float:
    """Predicted average-gradient-norm ceiling of the matching schedule."""
    if which not in ("rmsprop", "adam"):
        raise ValueError(f"unknown optimizer kind {which!r}")
    if result.optimizer != which:
        raise ValueError(f"schedule was computed for {result.optimizer!r}, not {which!r}")
    return result.predicted_bound
