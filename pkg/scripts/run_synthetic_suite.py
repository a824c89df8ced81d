#!/usr/bin/env python3
"""Run the six synthetic experiment presets end to end and print comparisons.

Usage: python scripts/run_synthetic_suite.py [OUT_DIR]

Each preset writes one CSV + JSON sidecar per (run x seed) into
OUT_DIR/<preset>/. Exit code 2 from a preset means at least one run
diverged; for the large-step SGD preset that is the expected outcome and
the partial traces are kept.
"""
import glob
import os
import sys

from adabatch.cli import main

PRESETS = [
    "synthetic_sgd_step_sizes",
    "synthetic_sgd_batch_sizes",
    "synthetic_adagrad_vs_sgd_high_beta",
    "synthetic_adagrad_vs_sgd_normal_beta",
    "synthetic_sgd_vs_tests",
    "synthetic_adabatch_vs_adagrad_vs_sgd",
]


def run_suite(out_root: str) -> int:
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    worst = 0
    for preset in PRESETS:
        config = os.path.join(root, "configs", f"{preset}.json")
        out_dir = os.path.join(out_root, preset)
        print(f"== {preset} -> {out_dir}")
        code = main(["run", "--config", config, "--out", out_dir])
        worst = max(worst, code)
        traces = sorted(glob.glob(os.path.join(out_dir, "*.csv")))
        if traces:
            main(["compare", *traces, "--metric", "f"])
    return worst


if __name__ == "__main__":
    sys.exit(run_suite(sys.argv[1] if len(sys.argv) > 1 else "out"))
