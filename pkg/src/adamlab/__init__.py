"""Modified-stepsize Adam/RMSProp with a numerical verification harness."""

from .optim import (
    InvariantViolation,
    OptimizerConfig,
    OptimizerState,
    StepReport,
    Variant,
    adam_step,
    gradient_ratio_bound,
    init_state,
    momentum_ratio_bound,
    rmsprop_step,
    surrogate_denominator,
)
from .oracles import (
    NoiseModel,
    ObjectiveOracle,
    ObjectiveSpec,
    SmoothnessModel,
    make_objective,
    noise_envelope,
)
from .lemmas import (
    BoundCheck,
    SequenceCase,
    check_momentum_ratio,
    check_sum_ratio_log,
    check_sum_ratio_sqrt,
    check_telescoping,
    descent_residual,
    potential_sequence,
    surrogate_decomposition,
)
from .schedule import (
    ProblemConstants,
    ScheduleResult,
    adam_schedule,
    problem_constants,
    recompute_constants,
    rmsprop_schedule,
    target_bound,
)
from .estimators import (
    AffineFit,
    CoordinateFit,
    SmoothnessSample,
    estimate_affine_noise,
    estimate_coordinate_smoothness,
    fit_l0_l1,
)
from .harness import (
    DivergenceError,
    TrajectoryRecord,
    TrajectoryStats,
    monte_carlo_convergence,
    parity_study,
    run_batch,
    run_trajectory,
    scaling_study,
    trajectory_stream,
)

__version__ = "0.1.0"
