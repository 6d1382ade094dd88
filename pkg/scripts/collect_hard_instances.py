#!/usr/bin/env python3
"""Collect hard instances and analyze heuristic combinations on them.

Draws model-H instances across a band of the phase-transition region,
solves each under all 20 heuristic configurations with a node cap, and
stores every instance on which at least one configuration exhausts the
cap (the hard ones).  On the resulting records it then reports:

  * the per-config solved and first-response fractions,
  * the best config subset per total node budget, where a subset of
    size k gives each member budget // k nodes (the orthogonal
    combination trade-off: coverage vs. per-member depth).

Everything after collection replays recorded node counts; nothing is
re-solved.
"""

import argparse
import os
import sys

from rcc8.generator import GenSpec
from rcc8.harness import collect_hard, hard_manifest_csv, instance_seed
from rcc8.portfolio import (combination_csv, first_response_table,
                            optimize_combination, write_records)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, action="append",
                    help="instance sizes (default 40)")
    ap.add_argument("--d", type=float, action="append",
                    help="average degrees (default 12.0 12.5 13.0)")
    ap.add_argument("--count", type=int, default=8,
                    help="instances per (n, d) cell")
    ap.add_argument("--cap", type=int, default=10_000)
    ap.add_argument("--seed-base", type=int, default=2025)
    ap.add_argument("--budgets", default="500,1000,2000,5000,10000")
    ap.add_argument("--out", default="results/hard")
    args = ap.parse_args()

    ns = args.n or [40]
    ds = args.d or [12.0, 12.5, 13.0]
    corpus = [
        GenSpec("H", n, d, 4.0, instance_seed(args.seed_base, "H", n, d, k))
        for n in ns
        for d in ds
        for k in range(args.count)
    ]
    print(f"collecting over {len(corpus)} candidates "
          f"(cap {args.cap} nodes, all 20 configs) ...", file=sys.stderr)
    hard = collect_hard(corpus, out_dir=args.out, cap=args.cap)
    print(f"{len(hard.rows)} hard instances -> {args.out}", file=sys.stderr)

    hard_manifest_csv(hard, os.path.join(args.out, "manifest.csv"))
    write_records(hard.records, os.path.join(args.out, "records.csv"))
    if not hard.records:
        print("no hard instances; widen the corpus", file=sys.stderr)
        return 0

    table = first_response_table(hard.records)
    print("config,solved_fraction,first_response_fraction")
    for cfg, (solved, first) in sorted(table.items(),
                                       key=lambda kv: -kv[1][1]):
        print(f"{cfg.label},{solved:.3f},{first:.3f}")

    budgets = tuple(int(tok) for tok in args.budgets.split(","))
    result = optimize_combination(hard.records, budgets)
    combo_path = os.path.join(args.out, "combinations.csv")
    print(combination_csv(result, combo_path), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
