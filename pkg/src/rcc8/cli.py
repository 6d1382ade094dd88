"""Command-line front end.

Verbs: generate, solve, sweep, collect-hard, portfolio run|optimize,
flaws, subsets dump, report.  Exit codes: 0 success, 1 usage error,
2 data error (malformed files, impossible parameters).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

from .algebra import default_algebra
from .generator import (GenSpec, count_inconsistent_triples, generate,
                        inconsistency_probability, solve_degree_threshold)
from .harness import (DEFAULT_HARD_THRESHOLD, DEFAULT_SWEEP_CONFIGS,
                      SweepConfig, collect_hard, hard_manifest_csv,
                      instance_seed, read_sweep_csv, report, sweep, sweep_csv)
from .network import InstanceFormatError, read_instance, write_instance
from .portfolio import (combination_csv, default_plan, optimize_combination,
                        read_plan, read_records, run_portfolio, write_records)
from .solver import HeuristicConfig, consistency
from .subclasses import SPLIT_NAMES, dump_rows

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this package reserves 2 for
    data errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="rcc8", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("generate", help="draw random instances")
    p.add_argument("--model", choices=["A", "H"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--l", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1,
                   help="with K>1, per-file seeds derive from --seed")
    p.add_argument("--out", help="directory for instance files (default stdout)")

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--split", choices=list(SPLIT_NAMES), required=True)
    p.add_argument("--order", choices=["static", "dynamic"], required=True)
    p.add_argument("--scope", choices=["local", "global"], required=True)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--discipline", default="exact",
                   choices=["unweighted", "approx", "exact"])

    p = sub.add_parser("sweep", help="phase-transition sweep")
    p.add_argument("--model", choices=["A", "H"], required=True)
    p.add_argument("--n", type=int, action="append", required=True)
    p.add_argument("--d-start", type=float, required=True)
    p.add_argument("--d-stop", type=float, required=True)
    p.add_argument("--d-step", type=float, default=0.5)
    p.add_argument("--l", type=float, default=4.0)
    p.add_argument("--per-point", type=int, default=100)
    p.add_argument("--config", action="append", default=None,
                   help="heuristic label like H8/dynamic/local (repeatable)")
    p.add_argument("--cap", type=int, default=DEFAULT_HARD_THRESHOLD)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("collect-hard", help="collect hard instances")
    p.add_argument("--model", choices=["A", "H"], default="H")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=float, action="append", required=True)
    p.add_argument("--count", type=int, default=20, help="instances per degree")
    p.add_argument("--l", type=float, default=4.0)
    p.add_argument("--cap", type=int, default=DEFAULT_HARD_THRESHOLD)
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--out", required=True, help="directory for the hard set")

    p = sub.add_parser("portfolio", help="portfolio execution and analysis")
    psub = p.add_subparsers(dest="action", required=True)
    pr = psub.add_parser("run", help="run a plan on one instance")
    pr.add_argument("--instance", required=True)
    pr.add_argument("--plan", help="plan file (default: built-in 4-config plan)")
    po = psub.add_parser("optimize", help="best config subset per budget")
    po.add_argument("--records", required=True)
    po.add_argument("--budget", type=int, action="append", required=True)
    po.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("flaws", help="census and degree thresholds")
    p.add_argument("--census", action="store_true")
    p.add_argument("--exhaustive", action="store_true",
                   help="census by full triple enumeration (slow)")
    p.add_argument("--thresholds", metavar="N[,N...]",
                   help="region counts (integers or 'inf')")

    p = sub.add_parser("subsets", help="tractable-subset tables")
    ssub = p.add_subparsers(dest="action", required=True)
    sd = ssub.add_parser("dump", help="per-relation membership and sizes")
    sd.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("report", help="render a sweep CSV to plots")
    p.add_argument("--sweep-csv", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--prefix", default="sweep")
    return parser


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_generate(args):
    if args.count < 1:
        raise _UsageError("--count must be positive")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    for k in range(args.count):
        seed = (args.seed if args.count == 1 else
                instance_seed(args.seed, args.model, args.n, args.d, k))
        net, meta = generate(GenSpec(args.model, args.n, args.d, args.l, seed))
        if args.out:
            name = f"{args.model}-n{args.n}-d{args.d}-{k:04d}.txt"
            write_instance(net, meta, os.path.join(args.out, name))
            print(name)
        else:
            sys.stdout.write(write_instance(net, meta))
    return 0


def _cmd_solve(args):
    net, _ = read_instance(args.instance)
    cfg = HeuristicConfig(args.split, args.order, args.scope)
    out = consistency(net, cfg, budget=args.max_nodes,
                      discipline=args.discipline)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["instance", "split", "order", "scope", "status",
                     "visited_nodes", "millis"])
    writer.writerow([args.instance, cfg.split, cfg.ordering, cfg.scope,
                     out.status, out.visited_nodes, round(out.millis, 3)])
    return 0


def _cmd_sweep(args):
    configs = (tuple(HeuristicConfig(*label.split("/"))
                     for label in args.config)
               if args.config else DEFAULT_SWEEP_CONFIGS)
    cfg = SweepConfig(model=args.model, ns=tuple(args.n),
                      d_start=args.d_start, d_stop=args.d_stop,
                      d_step=args.d_step, l=args.l,
                      per_point=args.per_point, configs=configs,
                      cap=args.cap, seed_base=args.seed_base,
                      workers=args.workers)
    points = sweep(cfg)
    _emit(sweep_csv(points), args.out)
    return 0


def _cmd_collect_hard(args):
    corpus = [GenSpec(args.model, args.n, d, args.l,
                      instance_seed(args.seed_base, args.model, args.n, d, k))
              for d in args.d for k in range(args.count)]
    hard = collect_hard(corpus, out_dir=args.out, cap=args.cap,
                        threshold=args.threshold)
    hard_manifest_csv(hard, os.path.join(args.out, "manifest.csv"))
    write_records(hard.records, os.path.join(args.out, "records.csv"))
    print(f"{len(hard.rows)} hard instances out of {len(corpus)} "
          f"-> {args.out}")
    return 0


def _cmd_portfolio(args):
    if args.action == "run":
        net, _ = read_instance(args.instance)
        plan = read_plan(args.plan) if args.plan else default_plan(net.n)
        outcome, responder, total_nodes = run_portfolio(net, plan)
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["instance", "status", "first_responder",
                         "total_nodes"])
        writer.writerow([args.instance, outcome.status,
                         responder.label if responder else "",
                         total_nodes])
        return 0
    records = read_records(args.records)
    result = optimize_combination(records, tuple(args.budget))
    _emit(combination_csv(result), args.out)
    return 0


def _cmd_flaws(args):
    did = False
    if args.census:
        method = "exhaustive" if args.exhaustive else "fast"
        count = count_inconsistent_triples(method=method)
        p = inconsistency_probability()
        print(f"inconsistent_triples,{count}")
        print(f"total_triples,{255 ** 3}")
        print(f"probability,{float(p)!r}")
        did = True
    if args.thresholds:
        p = inconsistency_probability()
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["n", "target_eit", "d"])
        for token in args.thresholds.split(","):
            token = token.strip()
            n = math.inf if token in ("inf", "infinity") else int(token)
            for target in (1.0, 0.5):
                d = solve_degree_threshold(n, target, p=p)
                writer.writerow([token, target, round(d, 4)])
        did = True
    if not did:
        raise _UsageError("flaws needs --census and/or --thresholds")
    return 0


def _cmd_subsets(args):
    rows = dump_rows()
    import io
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()),
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_report(args):
    points = read_sweep_csv(args.sweep_csv)
    paths = report(points, args.out, prefix=args.prefix)
    for path in paths:
        print(path)
    return 0


class _UsageError(Exception):
    pass


_COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "collect-hard": _cmd_collect_hard,
    "portfolio": _cmd_portfolio,
    "flaws": _cmd_flaws,
    "subsets": _cmd_subsets,
    "report": _cmd_report,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except _UsageError as exc:
        print(f"rcc8: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (InstanceFormatError, ValueError, OSError) as exc:
        print(f"rcc8: error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
