#!/usr/bin/env python3
"""Standalone run of the inequality property suites (10,000 cases each)."""

import pathlib
import sys

from adamlab.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "results" / "lemmas"

if __name__ == "__main__":
    seed = sys.argv[1] if len(sys.argv) > 1 else "0"
    sys.exit(main(["verify-lemmas", "--cases", "10000", "--seed", seed, "--out", str(OUT)]))
