"""Modified-stepsize Adam and RMSProp steps with per-step diagnostics.

The modified variant divides by sqrt(v + zeta); the original variant divides
by sqrt(v) + lambda.  RMSProp is Adam with beta1 = 0 and shares the exact
same code path, so the two are bitwise interchangeable.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np


class Variant(enum.Enum):
    MODIFIED = "modified"
    ORIGINAL = "original"


class InvariantViolation(AssertionError):
    """A per-step invariant failed while strict checking was enabled."""


def _tolerant_le(lhs, rhs, rtol=1e-12, atol=1e-12):
    return lhs <= rhs * (1.0 + rtol) + atol


@dataclasses.dataclass(frozen=True)
class OptimizerConfig:
    """Hyperparameters for one optimizer instance.

    ``lam`` is only used by the original variant; ``zeta`` is always required
    (the modified stepsize and all diagnostics are defined through it).
    """

    eta: float
    beta1: float = 0.0
    beta2: float = 0.999
    zeta: float = 1e-8
    variant: Variant = Variant.MODIFIED
    lam: float = 0.0
    strict: bool = False

    def __post_init__(self):
        if not (self.eta > 0):
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not (self.zeta > 0):
            raise ValueError(f"zeta must be positive, got {self.zeta}")
        if not (0.0 <= self.beta1 < 1.0):
            raise ValueError(f"beta1 must lie in [0, 1), got {self.beta1}")
        if not (0.0 < self.beta2 < 1.0):
            raise ValueError(f"beta2 must lie in (0, 1), got {self.beta2}")
        if self.lam < 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")

    @property
    def momentum_bound_defined(self) -> bool:
        """True when beta1^2 < beta2, i.e. the momentum-ratio bound applies."""
        return self.beta1 ** 2 < self.beta2


@dataclasses.dataclass
class OptimizerState:
    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @property
    def dim(self) -> int:
        return self.x.shape[-1]

    def copy(self) -> "OptimizerState":
        return OptimizerState(self.x.copy(), self.m.copy(), self.v.copy(), self.t)


@dataclasses.dataclass(frozen=True)
class StepReport:
    displacement_inf_norm: float
    momentum_ratio_max: float
    gradient_ratio_max: float


def init_state(config: OptimizerConfig, x0, v0=None) -> OptimizerState:
    """Build the t = 0 state: x = x0, m = 0, v = v0 (default: zeta per coordinate)."""
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim != 1:
        raise ValueError("x0 must be a 1-d vector")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    if v0 is None:
        v0 = np.full_like(x0, config.zeta)
    else:
        v0 = np.asarray(v0, dtype=np.float64)
        if v0.shape != x0.shape:
            raise ValueError("v0 must have the same shape as x0")
        if not np.all(np.isfinite(v0)) or np.any(v0 <= 0):
            raise ValueError("v0 entries must be positive and finite")
    return OptimizerState(x=x0.copy(), m=np.zeros_like(x0), v=v0.copy(), t=0)


def momentum_ratio_bound(config: OptimizerConfig) -> float:
    """Worst-case |m_i| / sqrt(v_i + zeta), valid whenever beta1^2 < beta2 and m0 = 0."""
    if not config.momentum_bound_defined:
        raise ValueError(
            f"momentum ratio bound undefined: beta1^2={config.beta1 ** 2} >= beta2={config.beta2}"
        )
    return (1.0 - config.beta1) / (
        math.sqrt(1.0 - config.beta2) * math.sqrt(1.0 - config.beta1 ** 2 / config.beta2)
    )


def gradient_ratio_bound(config: OptimizerConfig) -> float:
    """Worst-case |g_i| / sqrt(v_i + zeta) right after v is updated with g."""
    return 1.0 / math.sqrt(1.0 - config.beta2)


def surrogate_denominator(state: OptimizerState, config: OptimizerConfig) -> np.ndarray:
    """sqrt(beta2 * v + zeta) from the pre-step second moment."""
    return np.sqrt(config.beta2 * state.v + config.zeta)


def adam_step(state: OptimizerState, config: OptimizerConfig, g) -> StepReport:
    """Advance the state by one step using gradient estimate g.

    Mutates ``state`` in place and returns diagnostics computed from the
    post-update state.  Strict configs additionally assert the per-step
    ratio and displacement invariants.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.shape != state.x.shape:
        raise ValueError(f"gradient shape {g.shape} does not match state dim {state.x.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient must be finite")

    b1, b2 = config.beta1, config.beta2
    state.m = b1 * state.m + (1.0 - b1) * g
    state.v = b2 * state.v + (1.0 - b2) * (g * g)
    if config.variant is Variant.MODIFIED:
        step = config.eta * state.m / np.sqrt(state.v + config.zeta)
    else:
        step = config.eta * state.m / (np.sqrt(state.v) + config.lam)
    state.x = state.x - step
    state.t += 1

    denom = np.sqrt(state.v + config.zeta)
    report = StepReport(
        displacement_inf_norm=float(np.max(np.abs(step))) if step.size else 0.0,
        momentum_ratio_max=float(np.max(np.abs(state.m) / denom)),
        gradient_ratio_max=float(np.max(np.abs(g) / denom)),
    )
    if config.strict:
        _assert_step_invariants(report, config)
    return report


def rmsprop_step(state: OptimizerState, config: OptimizerConfig, g) -> StepReport:
    """Adam step with beta1 forced to zero (same code path, bitwise identical)."""
    return adam_step(state, dataclasses.replace(config, beta1=0.0), g)


def _assert_step_invariants(report: StepReport, config: OptimizerConfig) -> None:
    g_bound = gradient_ratio_bound(config)
    if not _tolerant_le(report.gradient_ratio_max, g_bound):
        raise InvariantViolation(
            f"gradient ratio {report.gradient_ratio_max} exceeds {g_bound}"
        )
    if config.momentum_bound_defined:
        m_bound = momentum_ratio_bound(config)
        if not _tolerant_le(report.momentum_ratio_max, m_bound):
            raise InvariantViolation(
                f"momentum ratio {report.momentum_ratio_max} exceeds {m_bound}"
            )
        if config.variant is Variant.MODIFIED and not _tolerant_le(
            report.displacement_inf_norm, config.eta * m_bound
        ):
            raise InvariantViolation(
                f"displacement {report.displacement_inf_norm} exceeds eta * {m_bound}"
            )
