"""Heuristic portfolios: sequential execution and combination analysis.

A portfolio runs several solver configurations on the same instance,
each under its own node budget, stopping at the first decisive answer.
Because a "consistent"/"inconsistent" answer is exact regardless of the
heuristic that produced it, a portfolio inherits soundness from its
members and only spends extra nodes, never correctness.

The analysis side never re-solves anything: given records of all 20
configurations run once per instance under a common node cap, the
node-count determinism of the solver lets us replay any budget split
arithmetically.  optimize_combination exhaustively scores all 2^20 - 1
subsets of the configurations, each subset dividing the total budget
evenly among its members, and reports the best subset per budget -
bigger subsets cover more instance kinds but each member gets fewer
nodes, which is exactly the trade-off being measured.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from .algebra import Algebra, default_algebra
from .network import Network
from .solver import (ALL_CONFIGS, BUDGET_EXHAUSTED, HeuristicConfig,
                     SolveOutcome, consistency)

RECORDS_HEADER = ("instance_id", "split", "order", "scope",
                  "status", "visited_nodes", "cap")

DEFAULT_PLAN_CONFIGS = (
    HeuristicConfig("H8", "dynamic", "local"),
    HeuristicConfig("H8", "static", "global"),
    HeuristicConfig("C8", "dynamic", "local"),
    HeuristicConfig("Bhat", "static", "local"),
)


@dataclass(frozen=True)
class PortfolioPlan:
    """Ordered configs with one node budget each."""

    configs: Tuple[HeuristicConfig, ...]
    budgets: Tuple[int, ...]

    def __post_init__(self):
        if len(self.configs) != len(self.budgets) or not self.configs:
            raise ValueError("plan needs one budget per config")
        if any(b < 1 for b in self.budgets):
            raise ValueError("budgets must be positive")

    @property
    def total_budget(self):
        return sum(self.budgets)


@dataclass(frozen=True)
class RunRecord:
    """All 20 configurations of one instance, run at a common node cap."""

    instance_id: str
    cap: int
    results: Tuple[Tuple[HeuristicConfig, str, int], ...]

    def as_map(self):
        return {cfg: (status, nodes) for cfg, status, nodes in self.results}


@dataclass(frozen=True)
class CombinationResult:
    chosen: Tuple[HeuristicConfig, ...]
    solved: int
    table: Tuple[Tuple[int, int, Tuple[HeuristicConfig, ...]], ...]


def default_plan(n) -> PortfolioPlan:
    """Four-config production plan with 2n nodes per member."""
    if n < 2:
        raise ValueError("need at least two regions")
    return PortfolioPlan(DEFAULT_PLAN_CONFIGS, (2 * n,) * 4)


def run_portfolio(net: Network, plan: PortfolioPlan, algebra: Algebra = None,
                  discipline="exact"):
    """Run plan members in order until one is decisive.

    Returns (outcome, first_responder, total_nodes): the decisive
    outcome and its config, or the last budget-exhausted outcome and
    None; total_nodes sums the nodes spent by every attempted member.
    """
    algebra = algebra or default_algebra()
    total_nodes = 0
    outcome = None
    for cfg, budget in zip(plan.configs, plan.budgets):
        outcome = consistency(net, cfg, budget=budget, algebra=algebra,
                              discipline=discipline)
        total_nodes += outcome.visited_nodes
        if outcome.status != BUDGET_EXHAUSTED:
            return outcome, cfg, total_nodes
    return outcome, None, total_nodes


def collect_record(net: Network, instance_id, cap, algebra: Algebra = None,
                   discipline="exact") -> RunRecord:
    """Solve one instance under every configuration at the given cap."""
    algebra = algebra or default_algebra()
    rows = tuple((cfg, *_status_nodes(consistency(net, cfg, budget=cap,
                                                  algebra=algebra,
                                                  discipline=discipline)))
                 for cfg in ALL_CONFIGS)
    return RunRecord(instance_id=instance_id, cap=cap, results=rows)


def _status_nodes(outcome: SolveOutcome):
    return outcome.status, outcome.visited_nodes


# ---------------------------------------------------------------------------
# records CSV

def write_records(records: Sequence[RunRecord], path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORDS_HEADER)
    for rec in records:
        for cfg, status, nodes in rec.results:
            writer.writerow([rec.instance_id, cfg.split, cfg.ordering,
                             cfg.scope, status, nodes, rec.cap])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_records(source) -> Tuple[RunRecord, ...]:
    if "\n" not in str(source):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != list(RECORDS_HEADER):
        raise ValueError(f"bad records header: {header}")
    grouped: Dict[str, list] = {}
    caps: Dict[str, int] = {}
    order = []
    for row in reader:
        if not row:
            continue
        instance_id, split, ordering, scope, status, nodes, cap = row
        cfg = HeuristicConfig(split, ordering, scope)
        if instance_id not in grouped:
            grouped[instance_id] = []
            caps[instance_id] = int(cap)
            order.append(instance_id)
        elif caps[instance_id] != int(cap):
            raise ValueError(f"instance {instance_id} has mixed caps")
        grouped[instance_id].append((cfg, status, int(nodes)))
    return tuple(RunRecord(instance_id=iid, cap=caps[iid],
                           results=tuple(grouped[iid]))
                 for iid in order)


# ---------------------------------------------------------------------------
# plan files

def write_plan(plan: PortfolioPlan, path=None):
    lines = [f"{cfg.split} {cfg.ordering} {cfg.scope} {budget}"
             for cfg, budget in zip(plan.configs, plan.budgets)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def read_plan(source) -> PortfolioPlan:
    if "\n" not in str(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(source)
    configs, budgets = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"plan line {line_no}: expected 'split order scope budget'")
        configs.append(HeuristicConfig(fields[0], fields[1], fields[2]))
        budgets.append(int(fields[3]))
    return PortfolioPlan(tuple(configs), tuple(budgets))


# ---------------------------------------------------------------------------
# combination analysis over records

_DECISIVE = ("consistent", "inconsistent")


def _check_complete(records):
    if not records:
        raise ValueError("no records")
    want = set(ALL_CONFIGS)
    for rec in records:
        have = {cfg for cfg, _, _ in rec.results}
        if have != want:
            raise ValueError(f"instance {rec.instance_id} lacks some configs")


def first_response_table(records):
    """Per config: (solved fraction, first-response fraction).

    First-response credit goes to every config reaching the minimum
    node count among decisive configs of an instance, so the
    first-response column can sum to more than 1.
    """
    _check_complete(records)
    total = len(records)
    solved = {cfg: 0 for cfg in ALL_CONFIGS}
    first = {cfg: 0 for cfg in ALL_CONFIGS}
    for rec in records:
        decisive = [(nodes, cfg) for cfg, status, nodes in rec.results
                    if status in _DECISIVE]
        for nodes, cfg in decisive:
            solved[cfg] += 1
        if decisive:
            best = min(nodes for nodes, _ in decisive)
            for nodes, cfg in decisive:
                if nodes == best:
                    first[cfg] += 1
    return {cfg: (solved[cfg] / total, first[cfg] / total)
            for cfg in ALL_CONFIGS}


def _solved_bitsets(records, budget):
    """Per config index, per subset size k: bitset of instances solved
    when the budget is split k ways (bit i = records[i])."""
    index = {cfg: c for c, cfg in enumerate(ALL_CONFIGS)}
    per_size = []
    for k in range(1, len(ALL_CONFIGS) + 1):
        share = budget // k
        bits = [0] * len(ALL_CONFIGS)
        if share >= 1:
            for i, rec in enumerate(records):
                for cfg, status, nodes in rec.results:
                    if status in _DECISIVE and nodes <= share:
                        bits[index[cfg]] |= 1 << i
        per_size.append(bits)
    return per_size


def _best_subset(records, budget):
    """Exhaustive max-coverage over all non-empty config subsets.

    Ties prefer fewer configs, then the lexicographically smallest
    index tuple.  Suffix-union bounds prune branches that cannot beat
    the incumbent (pruning equal scores is safe: any subset they lead
    to is larger or lexicographically later than the incumbent).
    """
    n_cfg = len(ALL_CONFIGS)
    per_size = _solved_bitsets(records, budget)
    best_count = -1
    best_subset = ()

    for k in range(1, n_cfg + 1):
        bits = per_size[k - 1]
        suffix = [0] * (n_cfg + 1)
        for c in range(n_cfg - 1, -1, -1):
            suffix[c] = suffix[c + 1] | bits[c]

        # DFS over index-increasing subsets of exactly k configs
        stack = [((), 0, 0)]  # (chosen prefix, next index, coverage)
        while stack:
            prefix, start, cover = stack.pop()
            need = k - len(prefix)
            if need == 0:
                count = cover.bit_count()
                if count > best_count:
                    best_count = count
                    best_subset = prefix
                continue
            if (cover | suffix[start]).bit_count() <= best_count:
                continue
            # push in reverse so the lexicographically smallest pops first
            last = n_cfg - need
            for c in range(last, start - 1, -1):
                stack.append((prefix + (c,), c + 1, cover | bits[c]))
    return best_count, tuple(ALL_CONFIGS[c] for c in best_subset)


def optimize_combination(records, budgets) -> CombinationResult:
    """Best config subset per total budget, replayed from records."""
    _check_complete(records)
    if isinstance(budgets, int):
        budgets = (budgets,)
    budgets = tuple(budgets)
    if not budgets or any(b < 1 for b in budgets):
        raise ValueError("budgets must be positive")
    low_caps = [rec.instance_id for rec in records if rec.cap < max(budgets)]
    if low_caps:
        raise ValueError(f"records capped below the requested budget: {low_caps[:3]}")
    table = []
    for budget in budgets:
        solved, subset = _best_subset(records, budget)
        table.append((budget, solved, subset))
    final = table[-1]
    return CombinationResult(chosen=final[2], solved=final[1],
                             table=tuple(table))


def combination_csv(result: CombinationResult, path=None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["budget", "solved", "combination"])
    for budget, solved, subset in result.table:
        combo = "+".join(cfg.label for cfg in subset)
        writer.writerow([budget, solved, combo])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
