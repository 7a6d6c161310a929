#!/usr/bin/env python3
"""Run the bundled bump experiment: one converged solve of the default
variant plus the full method comparison (four coupling variants, uniform
fine/coarse baselines, single-iteration method).  Outputs land in out/bump."""

import sys
from pathlib import Path

from ltsheat.cli import run_compare, run_experiment

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "bump.cfg"

if __name__ == "__main__":
    code = run_experiment(CONFIG)
    if code == 0:
        code = run_compare(CONFIG)
    print("outputs in out/bump" if code == 0 else f"exit code {code}")
    sys.exit(code)
