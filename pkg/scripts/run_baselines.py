"""Deterministic baselines: the exact-update and exhaustive-search solvers.

Runs the closed-form-update iteration and the brute-force valuation
search at full width, then the brute-force-as-sampler driver, and
prints one error table. All three are deterministic, so this doubles
as a quick regression check of the whole classical stack.

Usage: python scripts/run_baselines.py [--out-dir runs/baselines]
"""

from __future__ import annotations

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from annealdp.cli import main as cli_main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="runs/baselines")
    ap.add_argument("--iterations", type=int, default=2)
    args = ap.parse_args(argv)

    jobs = [
        ["solve", "--algorithm", "classical"],
        ["solve", "--algorithm", "combinatorial"],
        ["solve", "--algorithm", "hybrid", "--engine", "greedy"],
    ]
    for argv_job in jobs:
        argv_job += ["--iterations", str(args.iterations), "--out-dir", args.out_dir]
        print("$ annealdp " + " ".join(argv_job))
        rc = cli_main(argv_job)
        if rc != 0:
            return rc
        print()
    print(f"summaries and plots in {args.out_dir}/")
    return 0


if __name__ == "__main__":
    sys.exit(run())
