"""Seeded trajectory runner and the Monte-Carlo studies built on it.

Trajectories are data-parallel across seeds: the engine advances all seeds
of a study in lockstep on (n_seeds, dim) arrays while drawing each seed's
noise from its own generator stream, so a batched run is bit-identical to
running each seed alone.  Pathwise checks (ratio ceilings, displacement,
telescoping sums, the time-average Cauchy-Schwarz relation) are accumulated
online, which keeps memory flat for long horizons.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .optim import InvariantViolation, OptimizerConfig, Variant, gradient_ratio_bound, momentum_ratio_bound
from .oracles import ObjectiveOracle, ObjectiveSpec
from .schedule import ScheduleResult, adam_schedule, problem_constants, rmsprop_schedule

DIVERGENCE_LIMIT = 1e12
FULL_LOG_LIMIT = 100_000
_CHUNK = 2048


class DivergenceError(RuntimeError):
    """Too many trajectories diverged for the study to be meaningful."""


def trajectory_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for trajectory ``index`` under one master seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


@dataclasses.dataclass
class TrajectoryStats:
    """Online aggregates of one trajectory; everything the studies consume."""

    steps: int
    diverged: bool
    avg_grad_norm: float
    avg_f: float
    final_f: float
    avg_surrogate_norm: float
    avg_grad_sq_over_surr: float
    max_momentum_ratio: float
    max_gradient_ratio: float
    max_displacement: float
    telescoping_lhs_max: float
    telescoping_rhs: float
    threshold_step: int
    curve_t: np.ndarray | None = None
    curve_avg_grad: np.ndarray | None = None


@dataclasses.dataclass
class TrajectoryRecord:
    """Per-step log of one trajectory (full when T <= FULL_LOG_LIMIT)."""

    oracle_name: str
    config: OptimizerConfig
    seed_key: tuple
    v0: np.ndarray
    x: np.ndarray                 # (T+1, d) iterates x_1 .. x_{T+1}
    g: np.ndarray | None          # (T, d)
    m: np.ndarray | None
    v: np.ndarray | None
    f: np.ndarray                 # (T,) objective at the pre-step iterate
    grad_norm: np.ndarray         # (T,)
    surrogate_norm: np.ndarray    # (T,) sqrt(beta2 ||v_{t-1}|| + zeta)
    displacement: np.ndarray      # (T,) max_i |x_{t+1,i} - x_{t,i}|
    momentum_ratio: np.ndarray    # (T,) max_i |m_{t,i}| / sqrt(v_{t,i} + zeta)
    gradient_ratio: np.ndarray    # (T,) max_i |g_{t,i}| / sqrt(v_{t,i} + zeta)
    stats: TrajectoryStats


def _as_matrix(x0, n_rows: int) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.ndim == 1:
        return np.tile(x0, (n_rows, 1))
    if x0.shape[0] != n_rows:
        raise ValueError("x0 rows do not match the number of seeds")
    return x0.copy()


def run_batch(
    oracle: ObjectiveOracle,
    config: OptimizerConfig,
    x0,
    n_steps: int,
    streams,
    v0=None,
    bound: float | None = None,
    record: bool = False,
    curve_points: int = 0,
):
    """Advance every stream's trajectory for n_steps and aggregate online.

    Returns (stats_list, records); records is None unless ``record``.
    Divergent rows (non-finite iterate or |x_i| > 1e12) freeze where they
    stopped, keeping their aggregates at the truncation point.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    n_seeds = len(streams)
    d = oracle.dim
    X = _as_matrix(x0, n_seeds)
    if X.shape[1] != d:
        raise ValueError(f"x0 dimension {X.shape[1]} does not match oracle dim {d}")
    if not np.all(np.isfinite(X)):
        raise ValueError("x0 must be finite")
    if v0 is None:
        V = np.full((n_seeds, d), config.zeta)
    else:
        V = _as_matrix(v0, n_seeds)
        if np.any(V <= 0):
            raise ValueError("v0 entries must be positive")
    v0_row = V[0].copy()
    M = np.zeros((n_seeds, d))

    if record and n_steps > FULL_LOG_LIMIT:
        raise ValueError(
            f"full per-step logging is capped at {FULL_LOG_LIMIT} steps; "
            "use the aggregate path for longer horizons"
        )

    b1, b2 = config.beta1, config.beta2
    zeta, eta, lam = config.zeta, config.eta, config.lam
    one_m_b1, one_m_b2 = 1.0 - b1, 1.0 - b2
    modified = config.variant is Variant.MODIFIED
    g_bound = gradient_ratio_bound(config)
    m_bound = momentum_ratio_bound(config) if config.momentum_bound_defined else math.inf

    sum_gn = np.zeros(n_seeds)
    sum_f = np.zeros(n_seeds)
    sum_w = np.zeros(n_seeds)
    sum_gn2_over_w = np.zeros(n_seeds)
    max_mratio = np.zeros(n_seeds)
    max_gratio = np.zeros(n_seeds)
    max_disp = np.zeros(n_seeds)
    tele = np.zeros((n_seeds, d))
    threshold_step = np.full(n_seeds, -1, dtype=np.int64)
    steps_done = np.zeros(n_seeds, dtype=np.int64)
    alive = np.ones(n_seeds, dtype=bool)

    curve_idx = None
    if curve_points > 0:
        curve_idx = np.unique(np.linspace(1, n_steps, min(curve_points, n_steps)).astype(np.int64))
        curve_vals = np.full((n_seeds, curve_idx.size), np.nan)
        curve_mark = np.zeros(n_steps + 1, dtype=bool)
        curve_mark[curve_idx] = True
        curve_pos = np.cumsum(curve_mark) - 1

    if record:
        rec_x = np.empty((n_steps + 1, n_seeds, d))
        rec_x[0] = X
        rec_g = np.empty((n_steps, n_seeds, d))
        rec_m = np.empty((n_steps, n_seeds, d))
        rec_v = np.empty((n_steps, n_seeds, d))
        rec_f = np.empty((n_steps, n_seeds))
        rec_gn = np.empty((n_steps, n_seeds))
        rec_w = np.empty((n_steps, n_seeds))
        rec_disp = np.empty((n_steps, n_seeds))
        rec_mratio = np.empty((n_steps, n_seeds))
        rec_gratio = np.empty((n_steps, n_seeds))

    t = 0
    all_alive = True
    threshold_pending = bound is not None
    tol_m = m_bound * (1 + 1e-12) + 1e-12
    tol_g = g_bound * (1 + 1e-12) + 1e-12
    while t < n_steps:
        k = min(_CHUNK, n_steps - t)
        raws = [oracle.raw_draws(stream, k) for stream in streams]
        raw_all = None if raws[0] is None else np.stack(raws, axis=0)
        # chunk-local partial sums keep the accumulation error O(sqrt-ish)
        # instead of O(T) ulps over long horizons
        c_gn = np.zeros(n_seeds)
        c_f = np.zeros(n_seeds)
        c_w = np.zeros(n_seeds)
        c_gn2 = np.zeros(n_seeds)
        c_tele = np.zeros((n_seeds, d))
        for j in range(k):
            t += 1
            F, G = oracle.value_grad_many(X)
            g = G if raw_all is None else oracle.noisy_grad(X, G, raw_all[:, j])
            gn = np.sqrt(np.einsum("sd,sd->s", G, G))
            w = np.sqrt(b2 * np.sqrt(np.einsum("sd,sd->s", V, V)) + zeta)

            M = b1 * M + one_m_b1 * g
            bv = b2 * V
            V = bv + one_m_b2 * (g * g)
            surr_inv = 1.0 / np.sqrt(bv + zeta)
            denom = np.sqrt(V + zeta)
            denom_inv = 1.0 / denom
            tele_step = surr_inv - denom_inv
            if modified:
                step = (eta * M) / denom
                disp = np.max(np.abs(step), axis=1)
                mratio = disp / eta
            else:
                step = (eta * M) / (np.sqrt(V) + lam)
                disp = np.max(np.abs(step), axis=1)
                mratio = np.max(np.abs(M) * denom_inv, axis=1)
            X = X - step
            gratio = np.max(np.abs(g) * denom_inv, axis=1)

            xmax = float(np.max(np.abs(X)))
            healthy = math.isfinite(xmax) and xmax <= DIVERGENCE_LIMIT
            if all_alive and healthy:
                c_gn += gn
                c_f += F
                c_w += w
                c_gn2 += gn * gn / w
                np.maximum(max_mratio, mratio, out=max_mratio)
                np.maximum(max_gratio, gratio, out=max_gratio)
                np.maximum(max_disp, disp, out=max_disp)
                c_tele += tele_step
                if threshold_pending:
                    hit = (threshold_step < 0) & ((sum_gn + c_gn) / t <= bound)
                    threshold_step[hit] = t
                    threshold_pending = bool(np.any(threshold_step < 0))
                if curve_idx is not None and curve_mark[t]:
                    curve_vals[:, curve_pos[t]] = (sum_gn + c_gn) / t
            else:
                if all_alive:  # first divergence: settle bookkeeping
                    steps_done[:] = t - 1
                    all_alive = False
                with np.errstate(invalid="ignore", over="ignore"):
                    live = alive & np.isfinite(F) & (
                        np.max(np.abs(X), axis=1) <= DIVERGENCE_LIMIT
                    )
                    c_gn[live] += gn[live]
                    c_f[live] += F[live]
                    c_w[live] += w[live]
                    c_gn2[live] += (gn[live] ** 2) / w[live]
                    np.maximum(max_mratio, np.where(live, mratio, 0.0), out=max_mratio)
                    np.maximum(max_gratio, np.where(live, gratio, 0.0), out=max_gratio)
                    np.maximum(max_disp, np.where(live, disp, 0.0), out=max_disp)
                    c_tele[live] += tele_step[live]
                    steps_done[live] = t
                    if bound is not None:
                        hit = live & (threshold_step < 0) & ((sum_gn + c_gn) / t <= bound)
                        threshold_step[hit] = t
                    if curve_idx is not None and curve_mark[t]:
                        curve_vals[live, curve_pos[t]] = (sum_gn[live] + c_gn[live]) / t
                    alive = live

            if config.strict:
                if float(np.max(mratio)) > tol_m:
                    raise InvariantViolation(f"momentum ratio ceiling broken at step {t}")
                if float(np.max(gratio)) > tol_g:
                    raise InvariantViolation(f"gradient ratio ceiling broken at step {t}")

            if record:
                rec_x[t] = X
                rec_g[t - 1] = g
                rec_m[t - 1] = M
                rec_v[t - 1] = V
                rec_f[t - 1] = F
                rec_gn[t - 1] = gn
                rec_w[t - 1] = w
                rec_disp[t - 1] = disp
                rec_mratio[t - 1] = np.max(np.abs(M) * denom_inv, axis=1)
                rec_gratio[t - 1] = gratio

        sum_gn += c_gn
        sum_f += c_f
        sum_w += c_w
        sum_gn2_over_w += c_gn2
        tele += c_tele
        if not all_alive and not alive.any() and not record:
            break
    if all_alive:
        steps_done[:] = t

    F_final, _ = oracle.value_grad_many(X)
    tele_rhs = (1.0 + steps_done * (1.0 - math.sqrt(b2))) / math.sqrt(zeta)

    stats = []
    for s in range(n_seeds):
        n = max(int(steps_done[s]), 1)
        stats.append(
            TrajectoryStats(
                steps=int(steps_done[s]),
                diverged=not bool(alive[s]),
                avg_grad_norm=float(sum_gn[s] / n),
                avg_f=float(sum_f[s] / n),
                final_f=float(F_final[s]),
                avg_surrogate_norm=float(sum_w[s] / n),
                avg_grad_sq_over_surr=float(sum_gn2_over_w[s] / n),
                max_momentum_ratio=float(max_mratio[s]),
                max_gradient_ratio=float(max_gratio[s]),
                max_displacement=float(max_disp[s]),
                telescoping_lhs_max=float(np.max(tele[s])),
                telescoping_rhs=float(tele_rhs[s]),
                threshold_step=int(threshold_step[s]),
                curve_t=None if curve_idx is None else curve_idx.copy(),
                curve_avg_grad=None if curve_idx is None else curve_vals[s].copy(),
            )
        )

    records = None
    if record:
        records = []
        for s in range(n_seeds):
            records.append(
                TrajectoryRecord(
                    oracle_name=oracle.name,
                    config=config,
                    seed_key=(s,),
                    v0=v0_row.copy(),
                    x=rec_x[:, s].copy(),
                    g=rec_g[:, s].copy(),
                    m=rec_m[:, s].copy(),
                    v=rec_v[:, s].copy(),
                    f=rec_f[:, s].copy(),
                    grad_norm=rec_gn[:, s].copy(),
                    surrogate_norm=rec_w[:, s].copy(),
                    displacement=rec_disp[:, s].copy(),
                    momentum_ratio=rec_mratio[:, s].copy(),
                    gradient_ratio=rec_gratio[:, s].copy(),
                    stats=stats[s],
                )
            )
    return stats, records


def run_trajectory(
    oracle: ObjectiveOracle,
    config: OptimizerConfig,
    x0,
    n_steps: int,
    seed,
    v0=None,
) -> TrajectoryRecord:
    """One fully logged trajectory; ``seed`` is an int or a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        stream = np.random.default_rng(seed)
    else:
        stream = np.random.default_rng(np.random.SeedSequence(int(seed)))
    stats, records = run_batch(
        oracle, config, np.atleast_2d(np.asarray(x0, dtype=np.float64)),
        n_steps, [stream], v0=None if v0 is None else np.atleast_2d(v0),
        record=True,
    )
    rec = records[0]
    rec.seed_key = (seed,) if not isinstance(seed, tuple) else seed
    return rec


# ---------------------------------------------------------------------------
# Studies
# ---------------------------------------------------------------------------


@dataclasses.dataclass
class ConvergenceStudy:
    """One epsilon row of the convergence verification."""

    oracle_spec: ObjectiveSpec
    optimizer: str
    eps: float
    master_seed: int
    seeds: list[int]
    schedule: ScheduleResult
    t_used: int
    per_seed: list[TrajectoryStats]
    avg_grad_norm_mean: float
    avg_grad_norm_se: float
    stage2_lhs_mean: float
    stage2_rhs: float
    stage2_margin_se: float
    predicted_bound: float
    bound_ok: bool
    stage2_ok: bool
    stage2_pathwise_violations: int
    holder_ok: bool
    n_diverged: int
    invariant_failures: list[str]


def default_x0(oracle: ObjectiveOracle) -> np.ndarray:
    """Study starting point: origin for the data-fit objective, else 0.15 * ones."""
    if oracle.name == "logistic_toy":
        return np.zeros(oracle.dim)
    return np.full(oracle.dim, 0.15)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


def _check_pathwise(stats: TrajectoryStats, config: OptimizerConfig, seed: int) -> list[str]:
    failures = []
    tol = lambda rhs: rhs * (1 + 1e-12) + 1e-12
    if stats.max_gradient_ratio > tol(gradient_ratio_bound(config)):
        failures.append(f"seed {seed}: gradient ratio {stats.max_gradient_ratio}")
    if config.momentum_bound_defined:
        m_bound = momentum_ratio_bound(config)
        if stats.max_momentum_ratio > tol(m_bound):
            failures.append(f"seed {seed}: momentum ratio {stats.max_momentum_ratio}")
        if stats.max_displacement > tol(config.eta * m_bound):
            failures.append(f"seed {seed}: displacement {stats.max_displacement}")
    if stats.telescoping_lhs_max > tol(stats.telescoping_rhs):
        failures.append(f"seed {seed}: telescoping {stats.telescoping_lhs_max}")
    lhs = stats.avg_grad_norm ** 2
    rhs = stats.avg_grad_sq_over_surr * stats.avg_surrogate_norm
    if lhs > tol(rhs):
        failures.append(f"seed {seed}: time-average Cauchy-Schwarz {lhs} > {rhs}")
    return failures


def monte_carlo_convergence(
    oracle: ObjectiveOracle,
    eps: float,
    optimizer: str,
    beta1: float,
    seeds,
    master_seed: int = 0,
    zeta: float = 1.0,
    x0=None,
    max_steps: int | None = None,
    eta_override: float | None = None,
    strict: bool = False,
    curve_points: int = 400,
    raise_on_violation: bool = True,
) -> ConvergenceStudy:
    """Run the scheduled optimizer over the given seeds and test the bounds.

    The schedule's own T can be astronomically large at desk scale; pass
    ``max_steps`` to truncate (the bound check then reads the average over
    the steps actually run).
    """
    seeds = list(seeds)
    if len(seeds) < 1:
        raise ValueError("need at least one seed")
    x0 = default_x0(oracle) if x0 is None else np.asarray(x0, dtype=np.float64)
    v0 = np.full(oracle.dim, zeta)
    pc = problem_constants(oracle, x0, zeta, v0)
    if optimizer == "rmsprop":
        sched = rmsprop_schedule(eps, pc, eta_override)
    elif optimizer == "adam":
        sched = adam_schedule(eps, beta1, pc, eta_override)
    else:
        raise ValueError(f"unknown optimizer {optimizer!r}")
    config = OptimizerConfig(
        eta=sched.eta, beta1=sched.beta1, beta2=sched.beta2, zeta=zeta,
        variant=Variant.MODIFIED, strict=strict,
    )
    t_used = sched.t_min if max_steps is None else min(sched.t_min, max_steps)
    streams = [trajectory_stream(master_seed, s) for s in seeds]
    stats, _ = run_batch(
        oracle, config, x0, t_used, streams, v0=v0,
        bound=sched.predicted_bound, curve_points=curve_points,
    )

    failures = []
    for seed, st in zip(seeds, stats):
        failures.extend(_check_pathwise(st, config, seed))
    n_diverged = sum(st.diverged for st in stats)
    if n_diverged > 0.10 * len(seeds):
        raise DivergenceError(f"{n_diverged}/{len(seeds)} trajectories diverged")

    grad_means = np.array([st.avg_grad_norm for st in stats])
    stage2_lhs = np.array([st.avg_surrogate_norm for st in stats])
    mean_gn, se_gn = _mean_se(grad_means)
    coef = 2.0 * math.sqrt(oracle.dim * oracle.noise.d1) / math.sqrt(1.0 - sched.beta2)
    margin = stage2_lhs - coef * grad_means
    margin_mean, margin_se = _mean_se(margin)
    stage2_rhs = pc.c + coef * mean_gn
    stage2_ok = margin_mean <= pc.c + 2.0 * margin_se
    # the statement is an expectation: per-seed violations are legal, counted
    stage2_violations = int(np.sum(margin > pc.c))

    study = ConvergenceStudy(
        oracle_spec=ObjectiveSpec(oracle.name, {}),
        optimizer=optimizer,
        eps=eps,
        master_seed=master_seed,
        seeds=seeds,
        schedule=sched,
        t_used=t_used,
        per_seed=stats,
        avg_grad_norm_mean=mean_gn,
        avg_grad_norm_se=se_gn,
        stage2_lhs_mean=float(np.mean(stage2_lhs)),
        stage2_rhs=stage2_rhs,
        stage2_margin_se=margin_se,
        predicted_bound=sched.predicted_bound,
        bound_ok=mean_gn <= sched.predicted_bound,
        stage2_ok=stage2_ok,
        stage2_pathwise_violations=stage2_violations,
        holder_ok=not any("Cauchy" in f for f in failures),
        n_diverged=n_diverged,
        invariant_failures=failures,
    )
    if failures and raise_on_violation:
        raise InvariantViolation("; ".join(failures))
    return study


@dataclasses.dataclass
class ScalingStudy:
    rows: list[ConvergenceStudy]
    schedule_slope: float
    empirical_slope: float
    threshold_censored: int


def scaling_study(
    oracle: ObjectiveOracle,
    eps_list,
    optimizer: str,
    beta1: float,
    seeds,
    master_seed: int = 0,
    zeta: float = 1.0,
    x0=None,
    max_steps: int | None = 400_000,
    jobs: int = 1,
) -> ScalingStudy:
    """t_min and iterations-to-threshold across a strictly decreasing eps grid."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise ValueError("eps_list must contain at least three values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")

    args = [
        (oracle, eps, optimizer, beta1, list(seeds), master_seed, zeta, x0, max_steps)
        for eps in eps_list
    ]
    if jobs > 1:
        import concurrent.futures

        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scaling_row, args))
    else:
        rows = [_scaling_row(a) for a in args]

    inv_eps = np.log([1.0 / e for e in eps_list])
    t_min = np.log([row.schedule.t_min for row in rows])
    schedule_slope = float(np.polyfit(inv_eps, t_min, 1)[0])

    censored = 0
    thresholds = []
    for row in rows:
        vals = []
        for st in row.per_seed:
            if st.threshold_step > 0:
                vals.append(st.threshold_step)
            else:
                vals.append(st.steps)
                censored += 1
        thresholds.append(np.mean(vals))
    empirical_slope = float(np.polyfit(inv_eps, np.log(np.maximum(thresholds, 1.0)), 1)[0])
    return ScalingStudy(
        rows=rows,
        schedule_slope=schedule_slope,
        empirical_slope=empirical_slope,
        threshold_censored=censored,
    )


def _scaling_row(args) -> ConvergenceStudy:
    oracle, eps, optimizer, beta1, seeds, master_seed, zeta, x0, max_steps = args
    return monte_carlo_convergence(
        oracle, eps, optimizer, beta1, seeds, master_seed=master_seed,
        zeta=zeta, x0=x0, max_steps=max_steps,
    )


@dataclasses.dataclass
class ParityStudy:
    eta: float
    beta1: float
    beta2: float
    lam: float
    zeta: float
    n_steps: int
    seeds: list[int]
    final_loss_modified: float
    final_loss_modified_se: float
    final_loss_original: float
    final_loss_original_se: float
    area_modified: float
    area_original: float
    relative_gap: float
    per_seed_final: list[tuple[float, float]]
    invariant_failures: list[str]


def parity_study(
    oracle: ObjectiveOracle,
    eta: float,
    beta1: float,
    beta2: float,
    lam: float,
    n_steps: int,
    seeds,
    master_seed: int = 0,
    zeta: float | None = None,
    x0=None,
) -> ParityStudy:
    """Matched-stream comparison of the modified and original stepsizes.

    The regularizers are paired as zeta = lam^2 (guarded away from zero) so
    the two denominators agree where the second moment vanishes.
    """
    seeds = list(seeds)
    if zeta is None:
        zeta = max(lam ** 2, 1e-16)
    x0 = default_x0(oracle) if x0 is None else np.asarray(x0, dtype=np.float64)

    results = {}
    failures = []
    n_diverged = 0
    for variant in (Variant.MODIFIED, Variant.ORIGINAL):
        config = OptimizerConfig(
            eta=eta, beta1=beta1, beta2=beta2, zeta=zeta, variant=variant, lam=lam
        )
        streams = [trajectory_stream(master_seed, s) for s in seeds]
        stats, _ = run_batch(oracle, config, x0, n_steps, streams)
        for seed, st in zip(seeds, stats):
            failures.extend(_check_pathwise(st, config, seed))
        n_diverged += sum(st.diverged for st in stats)
        results[variant] = stats
    if n_diverged > 0.10 * 2 * len(seeds):
        raise DivergenceError(f"{n_diverged}/{2 * len(seeds)} trajectories diverged")

    fin_m = np.array([st.final_f for st in results[Variant.MODIFIED]])
    fin_o = np.array([st.final_f for st in results[Variant.ORIGINAL]])
    mean_m, se_m = _mean_se(fin_m)
    mean_o, se_o = _mean_se(fin_o)
    area_m = float(np.mean([st.avg_f for st in results[Variant.MODIFIED]]))
    area_o = float(np.mean([st.avg_f for st in results[Variant.ORIGINAL]]))
    gap = abs(mean_m - mean_o) / max(abs(mean_o), 1e-300)
    if failures:
        raise InvariantViolation("; ".join(failures))
    return ParityStudy(
        eta=eta, beta1=beta1, beta2=beta2, lam=lam, zeta=zeta,
        n_steps=n_steps, seeds=seeds,
        final_loss_modified=mean_m, final_loss_modified_se=se_m,
        final_loss_original=mean_o, final_loss_original_se=se_o,
        area_modified=area_m, area_original=area_o,
        relative_gap=gap,
        per_seed_final=[(float(a), float(b)) for a, b in zip(fin_m, fin_o)],
        invariant_failures=failures,
    )
