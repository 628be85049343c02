"""Command-line entry point.

Commands: verify-lemmas, run, scale-study, estimate-smoothness,
estimate-noise, parity.  Every command is deterministic given its config
file and --seed; outputs are CSV tables plus presentation-only SVG plots.

Exit codes: 0 success, 1 assertion/bound violation, 2 config error,
3 runtime divergence failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import estimators, harness, lemmas, report
from .config import (
    ConfigError,
    NOISE_SCHEMA,
    PARITY_SCHEMA,
    RUN_SCHEMA,
    SCALE_SCHEMA,
    SMOOTHNESS_SCHEMA,
    VERIFY_SCHEMA,
    load_config,
    validate,
)
from .optim import InvariantViolation, OptimizerConfig
from .oracles import ObjectiveSpec, make_objective
from .schedule import ScheduleError

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3


def _oracle_from(cfg_oracle):
    return make_objective(ObjectiveSpec(cfg_oracle["name"], cfg_oracle["params"] or {}))


def _x0_from(cfg_x0, oracle):
    if cfg_x0 is None:
        return harness.default_x0(oracle)
    if isinstance(cfg_x0, (int, float)):
        return np.full(oracle.dim, float(cfg_x0))
    return np.asarray(cfg_x0, dtype=np.float64)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# verify-lemmas
# ---------------------------------------------------------------------------

_LEMMA_HEADER = ["suite", "case", "T", "beta1", "beta2", "a0", "zeta", "lhs", "rhs", "slack", "holds"]


def cmd_verify_lemmas(args) -> int:
    cfg = load_config(args.config, VERIFY_SCHEMA) if args.config else validate({}, VERIFY_SCHEMA)
    n_cases = args.cases if args.cases is not None else cfg["cases"]
    if n_cases < 1:
        raise ConfigError("cases must be at least 1")
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    rows, violations = [], []

    def record(suite, idx, check, case=None, t=None, beta1=None, beta2=None, a0=None, zeta=None):
        rows.append(
            [suite, idx, t, beta1, beta2, a0, zeta, check.lhs, check.rhs, check.slack, check.holds]
        )
        if not check.holds:
            violations.append((suite, idx, case, check))

    for suite, checker, quartic in (
        ("momentum_ratio", lemmas.check_momentum_ratio, False),
        ("sum_ratio_log", lemmas.check_sum_ratio_log, False),
        ("sum_ratio_sqrt", lemmas.check_sum_ratio_sqrt, True),
    ):
        cases = lemmas.random_sequence_cases(
            n_cases, rng, t_max=cfg["t_max"], c_max=cfg["c_max"], need_beta1_quartic=quartic
        )
        for idx, case in enumerate(cases):
            if suite == "sum_ratio_log" and args.inject_bug:
                check = lemmas.check_sum_ratio_log(case, flip_exponent=True)
            else:
                check = checker(case)
            record(suite, idx, check, case, case.c.size, case.beta1, case.beta2, case.a0, case.zeta)

    # telescoping on short synthetic trajectories, every coordinate
    oracle = make_objective("quartic", dim=3, sigma0=1.0, box=4.0)
    for idx in range(cfg["trajectories"]):
        beta1 = float(rng.choice([0.0, 0.5, 0.9]))
        beta2 = float(rng.uniform(0.5, 0.999))
        zeta = float(rng.uniform(1e-6, 1.0))
        config = OptimizerConfig(eta=float(rng.uniform(1e-3, 0.05)), beta1=beta1, beta2=beta2, zeta=zeta)
        rec = harness.run_trajectory(
            oracle, config, rng.uniform(-1, 1, size=3), 64, np.random.SeedSequence(args.seed, spawn_key=(idx,))
        )
        for i in range(3):
            check = lemmas.check_telescoping(rec, config, i)
            record("telescoping", idx * 3 + i, check, None, 64, beta1, beta2, None, zeta)

    out = _outdir(args)
    report.write_csv(out / "lemma_checks.csv", _LEMMA_HEADER, rows)
    if violations:
        lines = []
        for suite, idx, case, check in violations:
            lines.append(f"{suite}[{idx}]: lhs={check.lhs!r} rhs={check.rhs!r}")
            if case is not None:
                lines.append(
                    f"  replay: SequenceCase(c={case.c.tolist()!r}, beta1={case.beta1!r}, "
                    f"beta2={case.beta2!r}, a0={case.a0!r}, zeta={case.zeta!r})"
                )
        (out / "violations.txt").write_text("\n".join(lines) + "\n")
        print(f"verify-lemmas: {len(violations)} violated bound(s); see violations.txt", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"verify-lemmas: all {len(rows)} checks hold")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run / scale-study
# ---------------------------------------------------------------------------

_CONV_HEADER = [
    "row", "eps", "optimizer", "beta1", "beta2", "eta", "t_min", "t_used",
    "avg_grad_norm", "avg_grad_norm_se", "stage2_lhs", "stage2_rhs",
    "predicted_bound", "bound_ok", "stage2_ok", "holder_ok",
    "threshold_step", "diverged", "n_seeds",
]


def _convergence_rows(study) -> list[list]:
    rows = []
    for seed, st in zip(study.seeds, study.per_seed):
        rows.append([
            str(seed), study.eps, study.optimizer, study.schedule.beta1,
            study.schedule.beta2, study.schedule.eta, study.schedule.t_min,
            study.t_used, st.avg_grad_norm, None, st.avg_surrogate_norm, None,
            study.predicted_bound, None, None, None, st.threshold_step,
            st.diverged, None,
        ])
    rows.append([
        "mean", study.eps, study.optimizer, study.schedule.beta1,
        study.schedule.beta2, study.schedule.eta, study.schedule.t_min,
        study.t_used, study.avg_grad_norm_mean, study.avg_grad_norm_se,
        study.stage2_lhs_mean, study.stage2_rhs, study.predicted_bound,
        study.bound_ok, study.stage2_ok, study.holder_ok, None,
        study.n_diverged, len(study.seeds),
    ])
    return rows


def cmd_run(args) -> int:
    cfg = load_config(args.config, RUN_SCHEMA)
    oracle = _oracle_from(cfg["oracle"])
    x0 = _x0_from(cfg["x0"], oracle)
    study = harness.monte_carlo_convergence(
        oracle, cfg["eps"], cfg["optimizer"], cfg["beta1"],
        seeds=range(cfg["seeds"]), master_seed=args.seed, zeta=cfg["zeta"],
        x0=x0, max_steps=cfg["max_steps"], eta_override=cfg["eta"],
        strict=args.strict, curve_points=cfg["curve_points"],
    )
    out = _outdir(args)
    report.write_csv(out / "convergence.csv", _CONV_HEADER, _convergence_rows(study))
    sched_report = {
        "optimizer": study.optimizer, "eps": study.eps,
        "beta1": study.schedule.beta1, "beta2": study.schedule.beta2,
        "eta": study.schedule.eta, "t_min": study.schedule.t_min,
        "predicted_bound": study.predicted_bound, "in_regime": study.schedule.in_regime,
    }
    sched_report.update(study.schedule.constants)
    report.write_kv_report(out / "schedule.txt", sched_report)

    plot = report.SvgPlot(
        title=f"running avg gradient norm ({oracle.name}, eps={study.eps:g})",
        xlabel="step", ylabel="running avg ||grad f||", logy=True,
    )
    curves = np.array([st.curve_avg_grad for st in study.per_seed if st.curve_avg_grad is not None])
    if curves.size:
        ts = study.per_seed[0].curve_t
        with np.errstate(invalid="ignore"):
            mean_curve = np.nanmean(curves, axis=0)
        keep = np.isfinite(mean_curve)
        plot.add_line(ts[keep], mean_curve[keep], "mean over seeds")
    plot.add_hline(study.predicted_bound, "predicted bound")
    plot.write(out / "convergence.svg")

    print(
        f"run: eps={study.eps:g} mean avg ||grad||={study.avg_grad_norm_mean:.6g} "
        f"bound={study.predicted_bound:.6g} bound_ok={study.bound_ok} stage2_ok={study.stage2_ok}"
    )
    if not (study.bound_ok and study.stage2_ok and study.holder_ok):
        return EXIT_VIOLATION
    return EXIT_OK


_SCALE_HEADER = [
    "row", "eps", "beta2", "eta", "t_min", "t_used", "predicted_bound",
    "avg_grad_norm", "avg_grad_norm_se", "threshold_mean", "censored",
    "schedule_slope", "empirical_slope",
]


def cmd_scale_study(args) -> int:
    cfg = load_config(args.config, SCALE_SCHEMA)
    eps_list = [float(e) for e in cfg["eps_list"]]
    oracle = _oracle_from(cfg["oracle"])
    x0 = _x0_from(cfg["x0"], oracle)
    study = harness.scaling_study(
        oracle, eps_list, cfg["optimizer"], cfg["beta1"], seeds=range(cfg["seeds"]),
        master_seed=args.seed, zeta=cfg["zeta"], x0=x0,
        max_steps=cfg["max_steps"], jobs=args.jobs,
    )
    rows = []
    for row in study.rows:
        thresholds = [st.threshold_step if st.threshold_step > 0 else st.steps for st in row.per_seed]
        censored = sum(1 for st in row.per_seed if st.threshold_step <= 0)
        rows.append([
            f"eps={row.eps:g}", row.eps, row.schedule.beta2, row.schedule.eta,
            row.schedule.t_min, row.t_used, row.predicted_bound,
            row.avg_grad_norm_mean, row.avg_grad_norm_se,
            float(np.mean(thresholds)), censored, None, None,
        ])
    rows.append([
        "slope", None, None, None, None, None, None, None, None, None,
        study.threshold_censored, study.schedule_slope, study.empirical_slope,
    ])
    out = _outdir(args)
    report.write_csv(out / "scaling.csv", _SCALE_HEADER, rows)

    plot = report.SvgPlot(
        title="schedule iterations vs 1/eps", xlabel="1/eps", ylabel="iterations",
        logx=True, logy=True,
    )
    inv_eps = [1.0 / row.eps for row in study.rows]
    plot.add_line(inv_eps, [row.schedule.t_min for row in study.rows],
                  f"t_min (slope {study.schedule_slope:.3f})")
    thr = [
        np.mean([st.threshold_step if st.threshold_step > 0 else st.steps for st in row.per_seed])
        for row in study.rows
    ]
    plot.add_line(inv_eps, thr, f"iters-to-threshold (slope {study.empirical_slope:.3f})")
    plot.write(out / "scaling.svg")
    print(
        f"scale-study: schedule slope {study.schedule_slope:.4f}, "
        f"empirical slope {study.empirical_slope:.4f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def cmd_estimate_smoothness(args) -> int:
    cfg = load_config(args.config, SMOOTHNESS_SCHEMA)
    oracle = _oracle_from(cfg["oracle"])
    x0 = _x0_from(cfg["x0"], oracle)
    config = OptimizerConfig(
        eta=cfg["eta"], beta1=cfg["beta1"], beta2=cfg["beta2"], zeta=cfg["zeta"]
    )
    rec = harness.run_trajectory(oracle, config, x0, cfg["steps"], np.random.SeedSequence(args.seed))
    samples, skipped = estimators.collect_smoothness_samples(
        rec, oracle, gammas=cfg["gammas"], pool_gammas=cfg["pool_gammas"]
    )
    fits = estimators.fit_l0_l1(samples, oracle.dim)
    out = _outdir(args)
    report.write_csv(
        out / "smoothness_samples.csv",
        ["t", "i", "grad_abs", "local_l"],
        [[s.t, s.i, s.grad_abs, s.local_l] for s in samples],
    )
    report.write_csv(
        out / "smoothness_fit.csv",
        ["coordinate", "l0_hat", "l1_hat", "l0_env", "l1_env", "residual", "n_samples", "skipped_steps"],
        [[i, f.l0_hat, f.l1_hat, f.l0_env, f.l1_env, f.residual, f.n_samples, skipped] for i, f in fits.items()],
    )
    plot = report.SvgPlot(
        title=f"local smoothness vs gradient magnitude ({oracle.name})",
        xlabel="|grad_i f|", ylabel="estimated local L",
    )
    plot.add_scatter([s.grad_abs for s in samples], [s.local_l for s in samples], "probes")
    fit0 = fits[min(fits)]
    gmax = max(s.grad_abs for s in samples) or 1.0
    xs = [0.0, gmax]
    plot.add_line(xs, [fit0.l0_hat / np.sqrt(oracle.dim) + fit0.l1_hat * g for g in xs],
                  f"lsq slope {fit0.l1_hat:.3f}")
    plot.write(out / "smoothness.svg")
    print(f"estimate-smoothness: coordinate 0 slope {fit0.l1_hat:.4f} over {fit0.n_samples} samples")
    return EXIT_OK


def cmd_estimate_noise(args) -> int:
    cfg = load_config(args.config, NOISE_SCHEMA)
    oracle = _oracle_from(cfg["oracle"])
    points = [
        np.full(oracle.dim, float(p)) if isinstance(p, (int, float)) else np.asarray(p, dtype=np.float64)
        for p in cfg["points"]
    ]
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    fits = estimators.estimate_affine_noise(oracle, points, cfg["n_samples"], rng, pooled=cfg["pooled"])
    out = _outdir(args)
    fits_list = [("pooled", fits)] if cfg["pooled"] else list(enumerate(fits))
    report.write_csv(
        out / "noise_fit.csv",
        ["coordinate", "d0_hat", "d1_hat", "residual", "n_points", "rank_deficient"],
        [[i, f.d0_hat, f.d1_hat, f.residual, f.n_points, f.rank_deficient] for i, f in fits_list],
    )
    # scatter of gradient std vs gradient magnitude at each point, coordinate 0
    xs, ys = [], []
    rng2 = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(1,)))
    for p in points:
        _, grad = oracle.eval(p)
        draws = oracle.sample_n(p, rng2, cfg["n_samples"])
        xs.append(abs(float(grad[0])))
        ys.append(float(np.std(draws[:, 0])))
    plot = report.SvgPlot(
        title=f"gradient std vs gradient magnitude ({oracle.name})",
        xlabel="|grad_0 f|", ylabel="std of g_0",
    )
    plot.add_scatter(xs, ys, "sampled")
    plot.write(out / "noise.svg")
    first = fits_list[0][1]
    print(f"estimate-noise: d0_hat={first.d0_hat:.4g} d1_hat={first.d1_hat:.4g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parity
# ---------------------------------------------------------------------------

_PARITY_HEADER = [
    "row", "final_loss_modified", "final_loss_original",
    "area_modified", "area_original", "relative_gap",
]


def cmd_parity(args) -> int:
    cfg = load_config(args.config, PARITY_SCHEMA)
    oracle = _oracle_from(cfg["oracle"])
    x0 = _x0_from(cfg["x0"], oracle)
    study = harness.parity_study(
        oracle, cfg["eta"], cfg["beta1"], cfg["beta2"], cfg["lam"],
        cfg["steps"], seeds=range(cfg["seeds"]), master_seed=args.seed, x0=x0,
    )
    rows = [
        [str(seed), fm, fo, None, None, None]
        for seed, (fm, fo) in zip(study.seeds, study.per_seed_final)
    ]
    rows.append([
        "mean", study.final_loss_modified, study.final_loss_original,
        study.area_modified, study.area_original, study.relative_gap,
    ])
    out = _outdir(args)
    report.write_csv(out / "parity.csv", _PARITY_HEADER, rows)
    plot = report.SvgPlot(title="final loss per seed", xlabel="seed", ylabel="loss")
    plot.add_scatter(study.seeds, [fm for fm, _ in study.per_seed_final], "modified")
    plot.add_scatter(study.seeds, [fo for _, fo in study.per_seed_final], "original")
    plot.write(out / "parity.svg")
    print(
        f"parity: modified {study.final_loss_modified:.6g} vs original "
        f"{study.final_loss_original:.6g} (relative gap {study.relative_gap:.4%})"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adamlab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None, help="YAML experiment config")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker cap")
        p.add_argument("--out", type=str, default=".", help="output directory")
        p.add_argument("--strict", action="store_true", help="assert per-step invariants")

    p = sub.add_parser("verify-lemmas", help="property suites for the sequence lemmas")
    common(p)
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify_lemmas)

    for name, func, needs in (
        ("run", cmd_run, "convergence study"),
        ("scale-study", cmd_scale_study, "complexity scaling study"),
        ("estimate-smoothness", cmd_estimate_smoothness, "coordinate smoothness recovery"),
        ("estimate-noise", cmd_estimate_noise, "affine noise recovery"),
        ("parity", cmd_parity, "modified vs original stepsize comparison"),
    ):
        p = sub.add_parser(name, help=needs)
        common(p)
        p.set_defaults(func=func, requires_config=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "requires_config", False) and not args.config:
            raise ConfigError(f"{args.command} requires --config")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ScheduleError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except harness.DivergenceError as exc:
        print(f"divergence failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
