#!/usr/bin/env python3
"""Run the full experiment battery into results/.

Roughly two minutes end to end; each study writes its CSV tables and SVG
plots into its own subdirectory.
"""

import pathlib
import sys

from adamlab.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
RESULTS = ROOT / "results"

JOBS = [
    (["verify-lemmas", "--cases", "10000"], "lemmas"),
    (["run", "--config", str(ROOT / "configs/convergence_quartic.yaml")], "convergence_rmsprop"),
    (["run", "--config", str(ROOT / "configs/convergence_quartic_adam.yaml")], "convergence_adam"),
    (["scale-study", "--config", str(ROOT / "configs/scaling_quartic.yaml")], "scaling"),
    (["estimate-noise", "--config", str(ROOT / "configs/noise_linreg.yaml")], "noise"),
    (["estimate-smoothness", "--config", str(ROOT / "configs/smoothness_expsum.yaml")], "smoothness"),
    (["parity", "--config", str(ROOT / "configs/parity_logistic.yaml")], "parity"),
]


def run(seed: int = 0) -> int:
    worst = 0
    for argv, name in JOBS:
        out = RESULTS / name
        print(f"== {name} -> {out}")
        code = main(argv + ["--seed", str(seed), "--out", str(out)])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run(int(sys.argv[1]) if len(sys.argv) > 1 else 0))
