"""Experiment harness: sweeps, percentiles, hard-instance collection,
CSV reporting and plots.

A sweep walks a grid of (n, average degree) points, draws a fixed
number of instances per point from a deterministic per-instance seed,
solves each under every requested configuration with a node cap, and
aggregates one DataPoint per (n, d, config): the fraction consistent
among decided instances, node and wall-time percentiles, and how many
instances were hard (needed more nodes than the hard threshold).

Per-instance seeds are a 64-bit hash of (base seed, model, n, d,
index), so a corpus can be extended with more indices, more degrees or
more sizes without disturbing the instances already drawn.  Node counts
are deterministic, so re-running a sweep reproduces every CSV column
except the wall-time ones byte for byte; comparisons should go through
strip_timing_columns.

Wall times are measured and reported but never drive any decision in
this package: visited nodes are the portable cost metric.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

from .algebra import Algebra, default_algebra
from .generator import GenSpec, generate
from .network import Network, write_instance
from .portfolio import RunRecord
from .solver import (ALL_CONFIGS, BUDGET_EXHAUSTED, CONSISTENT,
                     HeuristicConfig, consistency, parse_config)

SWEEP_HEADER = ("model", "n", "d", "l", "count", "config", "p_sat",
                "undecided", "nodes_p50", "nodes_p70", "nodes_p99",
                "ms_p50", "ms_p70", "ms_p99", "hard_count")

_TIMING_COLUMNS = ("ms_p50", "ms_p70", "ms_p99")

DEFAULT_SWEEP_CONFIGS = (HeuristicConfig("H8", "dynamic", "local"),)

DEFAULT_HARD_THRESHOLD = 10_000


def percentile(values, p):
    """1-indexed element at position ceil(p/100 * N) of the ascending sort."""
    if not values:
        raise ValueError("percentile of an empty list")
    if not 0 < p < 100:
        raise ValueError(f"percent {p} outside (0, 100)")
    ordered = sorted(values)
    return ordered[math.ceil(p / 100 * len(ordered)) - 1]


def instance_seed(seed_base, model, n, d, index):
    """Stable 64-bit per-instance seed; extensible along every axis."""
    key = f"{seed_base}|{model}|{n}|{d!r}|{index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def degree_grid(start, stop, step):
    """Inclusive arithmetic grid, robust to floating-point drift."""
    if step <= 0:
        raise ValueError("step must be positive")
    grid = []
    k = 0
    while True:
        d = round(start + k * step, 9)
        if d > stop + 1e-9:
            return grid
        grid.append(d)
        k += 1


@dataclass(frozen=True)
class SweepConfig:
    model: str
    ns: Tuple[int, ...]
    d_start: float
    d_stop: float
    d_step: float
    l: float = 4.0
    per_point: int = 100
    configs: Tuple[HeuristicConfig, ...] = DEFAULT_SWEEP_CONFIGS
    cap: int = DEFAULT_HARD_THRESHOLD
    seed_base: int = 0
    hard_threshold: Optional[int] = None
    discipline: str = "exact"
    workers: int = 1

    def __post_init__(self):
        if self.d_step <= 0:
            raise ValueError("d step must be positive")
        if self.per_point < 1:
            raise ValueError("need at least one instance per point")
        if not self.configs:
            raise ValueError("need at least one solver config")

    @property
    def threshold(self):
        return self.cap if self.hard_threshold is None else self.hard_threshold

    def degrees(self):
        return degree_grid(self.d_start, self.d_stop, self.d_step)


@dataclass(frozen=True)
class DataPoint:
    model: str
    n: int
    d: float
    l: float
    count: int
    config: str
    p_sat: Optional[float]
    undecided: int
    nodes_p50: int
    nodes_p70: int
    nodes_p99: int
    ms_p50: float
    ms_p70: float
    ms_p99: float
    hard_count: int


def _is_hard(status, visited, threshold):
    return status == BUDGET_EXHAUSTED or visited > threshold


def _solve_point_task(args):
    """One (instance, config) solve; module-level for process pools."""
    (model, n, d, l, seed_base, index, label, cap, discipline) = args
    seed = instance_seed(seed_base, model, n, d, index)
    net, _ = generate(GenSpec(model, n, d, l, seed))
    out = consistency(net, parse_config(label), budget=cap,
                      discipline=discipline)
    return (n, d, index, label), (out.status, out.visited_nodes, out.wall_time)


def _run_tasks(tasks, workers):
    if workers <= 1:
        for task in tasks:
            yield _solve_point_task(task)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_solve_point_task, tasks, chunksize=8)


def sweep(cfg: SweepConfig):
    """One DataPoint per (n, d, config), in grid order."""
    tasks = [(cfg.model, n, d, cfg.l, cfg.seed_base, index, config.label,
              cfg.cap, cfg.discipline)
             for n in cfg.ns
             for d in cfg.degrees()
             for index in range(cfg.per_point)
             for config in cfg.configs]
    results = dict(_run_tasks(tasks, cfg.workers))

    points = []
    for n in cfg.ns:
        for d in cfg.degrees():
            for config in cfg.configs:
                runs = [results[(n, d, index, config.label)]
                        for index in range(cfg.per_point)]
                points.append(_aggregate(cfg, n, d, config, runs))
    return points


def _aggregate(cfg: SweepConfig, n, d, config, runs):
    decided = [s for s, _, _ in runs if s != BUDGET_EXHAUSTED]
    undecided = len(runs) - len(decided)
    p_sat = (sum(1 for s in decided if s == CONSISTENT) / len(decided)
             if decided else None)
    nodes = [v for _, v, _ in runs]
    millis = [1000.0 * w for _, _, w in runs]
    hard = sum(1 for s, v, _ in runs if _is_hard(s, v, cfg.threshold))
    return DataPoint(
        model=cfg.model, n=n, d=d, l=cfg.l, count=len(runs),
        config=config.label, p_sat=p_sat, undecided=undecided,
        nodes_p50=percentile(nodes, 50), nodes_p70=percentile(nodes, 70),
        nodes_p99=percentile(nodes, 99),
        ms_p50=round(percentile(millis, 50), 3),
        ms_p70=round(percentile(millis, 70), 3),
        ms_p99=round(percentile(millis, 99), 3),
        hard_count=hard)


# ---------------------------------------------------------------------------
# sweep CSV

def sweep_csv(points: Sequence[DataPoint], path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for p in points:
        writer.writerow([p.model, p.n, repr(p.d), repr(p.l), p.count,
                         p.config,
                         "" if p.p_sat is None else repr(p.p_sat),
                         p.undecided, p.nodes_p50, p.nodes_p70, p.nodes_p99,
                         repr(p.ms_p50), repr(p.ms_p70), repr(p.ms_p99),
                         p.hard_count])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_sweep_csv(source):
    if "\n" not in str(source):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != list(SWEEP_HEADER):
        raise ValueError(f"bad sweep header: {header}")
    points = []
    for row in reader:
        if not row:
            continue
        (model, n, d, l, count, config, p_sat, undecided,
         n50, n70, n99, m50, m70, m99, hard) = row
        points.append(DataPoint(
            model=model, n=int(n), d=float(d), l=float(l), count=int(count),
            config=config, p_sat=None if p_sat == "" else float(p_sat),
            undecided=int(undecided), nodes_p50=int(n50), nodes_p70=int(n70),
            nodes_p99=int(n99), ms_p50=float(m50), ms_p70=float(m70),
            ms_p99=float(m99), hard_count=int(hard)))
    return points


def strip_timing_columns(csv_text):
    """Drop wall-time columns so deterministic sweeps compare bytewise."""
    reader = csv.reader(io.StringIO(csv_text))
    rows = list(reader)
    if not rows:
        return csv_text
    keep = [i for i, name in enumerate(rows[0]) if name not in _TIMING_COLUMNS]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([row[i] for i in keep])
    return buf.getvalue()


def crossover_degree(points: Sequence[DataPoint]):
    """Largest grid degree whose p_sat is still >= 0.5.

    points must share (model, n, config); undecidable cells are
    skipped.  Returns None when p_sat never reaches 0.5.
    """
    best = None
    for p in sorted(points, key=lambda p: p.d):
        if p.p_sat is not None and p.p_sat >= 0.5:
            best = p.d
    return best


# ---------------------------------------------------------------------------
# hard-instance collection

def hard_manifest_header():
    return ["instance_file", "n", "d", "seed"] + [
        f"nodes_{cfg.split}_{cfg.ordering}_{cfg.scope}" for cfg in ALL_CONFIGS]


@dataclass(frozen=True)
class HardRow:
    instance_file: str
    n: int
    d: float
    seed: int
    nodes: Tuple[int, ...]  # aligned with ALL_CONFIGS


@dataclass(frozen=True)
class HardSet:
    threshold: int
    directory: Optional[str]
    rows: Tuple[HardRow, ...]
    records: Tuple[RunRecord, ...] = field(default=(), compare=False)


def collect_hard(corpus: Sequence[GenSpec], out_dir=None,
                 cap=DEFAULT_HARD_THRESHOLD, threshold=None,
                 algebra: Algebra = None, discipline="exact") -> HardSet:
    """Run all 20 configs on each instance; keep the hard ones.

    An instance is hard when at least one config needs more than
    threshold nodes (with cap == threshold: is budget-exhausted).
    Hard instance files are written under out_dir when given; the
    returned records cover the hard instances at the collection cap.
    """
    algebra = algebra or default_algebra()
    threshold = cap if threshold is None else threshold
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    rows = []
    records = []
    for spec in corpus:
        net, meta = generate(spec, algebra)
        outcomes = [consistency(net, cfg, budget=cap, algebra=algebra,
                                discipline=discipline) for cfg in ALL_CONFIGS]
        if not any(_is_hard(o.status, o.visited_nodes, threshold)
                   for o in outcomes):
            continue
        name = f"{spec.model}-n{spec.n}-d{spec.d}-s{spec.seed}.txt"
        if out_dir is not None:
            write_instance(net, meta, os.path.join(out_dir, name))
        rows.append(HardRow(instance_file=name, n=spec.n, d=spec.d,
                            seed=spec.seed,
                            nodes=tuple(o.visited_nodes for o in outcomes)))
        records.append(RunRecord(
            instance_id=name, cap=cap,
            results=tuple((cfg, o.status, o.visited_nodes)
                          for cfg, o in zip(ALL_CONFIGS, outcomes))))
    return HardSet(threshold=threshold, directory=out_dir,
                   rows=tuple(rows), records=tuple(records))


def hard_manifest_csv(hard: HardSet, path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(hard_manifest_header())
    for row in hard.rows:
        writer.writerow([row.instance_file, row.n, repr(row.d), row.seed,
                         *row.nodes])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# report: CSV plus self-contained SVG plots

def report(points: Sequence[DataPoint], out_dir, prefix="sweep"):
    """Write <prefix>.csv and, when there is data, p_sat/nodes plots.

    Returns the list of file paths written.  Plots are SVG with fonts
    rendered as paths, so they reference no external resources.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    csv_path = os.path.join(out_dir, f"{prefix}.csv")
    sweep_csv(points, csv_path)
    paths.append(csv_path)
    if not points:
        return paths

    import matplotlib
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.fonttype"] = "path"
    import matplotlib.pyplot as plt

    def curves(ykey, ylabel, fname, logy=False):
        fig, ax = plt.subplots(figsize=(6, 4))
        groups = {}
        for p in points:
            groups.setdefault((p.model, p.n, p.config), []).append(p)
        for (model, n, config), pts in sorted(groups.items()):
            pts = sorted(pts, key=lambda p: p.d)
            xs = [p.d for p in pts]
            ys = [getattr(p, ykey) for p in pts]
            xs, ys = zip(*[(x, y) for x, y in zip(xs, ys) if y is not None])
            ax.plot(xs, ys, marker="o", markersize=3,
                    label=f"{model} n={n} {config}")
        ax.set_xlabel("average degree d")
        ax.set_ylabel(ylabel)
        if logy:
            ax.set_yscale("log")
        ax.legend(fontsize=7)
        fig.tight_layout()
        out = os.path.join(out_dir, fname)
        fig.savefig(out, format="svg")
        plt.close(fig)
        paths.append(out)

    curves("p_sat", "fraction consistent", f"{prefix}_psat.svg")
    curves("nodes_p50", "median visited nodes", f"{prefix}_nodes.svg", logy=True)
    curves("ms_p50", "median solve time (ms)", f"{prefix}_ms.svg", logy=True)
    return paths
