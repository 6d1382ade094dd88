#!/usr/bin/env python3
"""Phase-transition sweeps for both random models, at desk scale.

Sweeps satisfiability probability and solve cost over the average
degree, one curve per instance size, and writes CSVs plus SVG plots.
Node counts are deterministic for a given seed base, so re-running
reproduces every non-timing column byte for byte.

Defaults reproduce the desk-scale picture in a few tens of minutes:
model A crosses p_sat = 0.5 between d = 7.5 and 10.5 (n = 30, 50),
model H between d = 10 and 15 (n = 30, 40).  Use --quick for a
thumbnail version (fewer instances per point) in a couple of minutes.
"""

import argparse
import os
import sys

from rcc8.harness import SweepConfig, crossover_degree, report, sweep
from rcc8.solver import HeuristicConfig


def run_model(model, ns, d_start, d_stop, d_step, per_point, cap,
              seed_base, out_dir, workers):
    cfg = SweepConfig(
        model=model,
        ns=tuple(ns),
        d_start=d_start,
        d_stop=d_stop,
        d_step=d_step,
        per_point=per_point,
        configs=(HeuristicConfig("H8", "dynamic", "local"),),
        cap=cap,
        seed_base=seed_base,
        workers=workers,
    )
    points = sweep(cfg)
    paths = report(points, out_dir, prefix=f"model_{model}")
    for path in paths:
        print(path)
    for n in ns:
        per_n = [p for p in points if p.n == n]
        cross = crossover_degree(per_n)
        print(f"model {model} n={n}: p_sat crosses 0.5 at d = {cross}")
    return points


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/phase_transition")
    ap.add_argument("--per-point", type=int, default=100)
    ap.add_argument("--cap", type=int, default=10_000)
    ap.add_argument("--seed-base", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--quick", action="store_true",
                    help="10 instances per point instead of 100")
    ap.add_argument("--model", choices=["A", "H", "both"], default="both")
    args = ap.parse_args()

    per_point = 10 if args.quick else args.per_point
    os.makedirs(args.out, exist_ok=True)

    if args.model in ("A", "both"):
        run_model("A", (30, 50), 6.0, 13.0, 0.5, per_point, args.cap,
                  args.seed_base, args.out, args.workers)
    if args.model in ("H", "both"):
        run_model("H", (30, 40), 8.0, 18.0, 1.0, per_point, args.cap,
                  args.seed_base, args.out, args.workers)
    return 0


if __name__ == "__main__":
    sys.exit(main())
