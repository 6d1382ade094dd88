#!/usr/bin/env python3
"""Search for networks where propagation alone gets the answer wrong.

Path consistency is complete on the tractable label classes but only
an approximation in general: some networks reach the propagation
fixpoint with every label non-empty and still have no atomic solution.
This script scans small model-H instances (whose labels are all drawn
from the hard relations) for such witnesses: path consistency reports
consistent-approximation while the complete backtracking search
refutes.  Found witnesses are written as instance files.

tests/data/witness-pc-incomplete.txt was produced by this search
(n=7, d=5.5, seed 395 under the defaults).
"""

import argparse
import os
import sys

from rcc8.algebra import default_algebra
from rcc8.generator import GenSpec, generate
from rcc8.network import path_consistency, write_instance
from rcc8.solver import HeuristicConfig, consistency

CHECK_CONFIG = HeuristicConfig("H8", "dynamic", "local")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, action="append",
                    help="sizes to scan (default 5 6 7)")
    ap.add_argument("--seeds", type=int, default=1000,
                    help="seeds per (n, d) cell")
    ap.add_argument("--limit", type=int, default=3,
                    help="stop after this many witnesses")
    ap.add_argument("--out", default="results/witnesses")
    args = ap.parse_args()

    algebra = default_algebra()
    os.makedirs(args.out, exist_ok=True)
    found = 0
    for n in args.n or [5, 6, 7]:
        for d in (float(n - 1), n - 1.5):
            for seed in range(args.seeds):
                net, meta = generate(GenSpec("H", n, d, 4.0, seed), algebra)
                if not path_consistency(net.copy(), algebra=algebra).ok:
                    continue
                out = consistency(net, CHECK_CONFIG, algebra=algebra)
                if out.status != "inconsistent":
                    continue
                name = f"witness-n{n}-d{d}-s{seed}.txt"
                path = os.path.join(args.out, name)
                write_instance(net, meta, path)
                print(f"{path}: propagation says consistent-approximation, "
                      f"search refutes")
                found += 1
                if found >= args.limit:
                    return 0
    if not found:
        print("no witness found; raise --seeds or add sizes", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
