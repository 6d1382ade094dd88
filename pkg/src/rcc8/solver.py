"""Backtracking consistency search over tractable split sets.

The search keeps the network path-consistent at every node.  A node
selects an edge whose current relation lies outside the chosen split
set, decomposes that relation into split-set members (least restricting
part first), and for each part: refine the edge, re-close with
incremental path consistency, and recurse on success.  When no edge is
selectable every relation belongs to the split set and path consistency
alone certifies consistency, so the search answers "consistent" at such
a leaf.

Twenty heuristic configurations arise from three independent axes:

* split set    - B, Bhat, H8, C8, Q8 (what counts as "decided");
* ordering     - static (edge order frozen on the initial closed
                 network) or dynamic (rescored at every node);
* scope        - local (decomposition size, then weight of the edge's
                 own relation) or global (edge weight plus the weights
                 of all relations touching its endpoints).

Lower scores mean more constrained, and more constrained edges are
branched on first.  Ties break on the (i, j) index pair, which makes
every run bit-reproducible.

Node accounting: the root call is node 1 and includes the initial full
path-consistency pass; each successful refinement that survives
incremental propagation creates one child node; refinements rejected by
propagation consume no node; a search that would have to open a node
beyond the budget stops with status "budget-exhausted" instead.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Tuple

from .algebra import Algebra, WeightTable, default_algebra
from .network import (Network, incremental_path_consistency, path_consistency,
                      undo_trail)
from .subclasses import SPLIT_NAMES, SplitSet, split_set

ORDERINGS = ("static", "dynamic")
SCOPES = ("local", "global")

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class HeuristicConfig:
    """One point in the 5 x 2 x 2 heuristic space."""

    split: str
    ordering: str
    scope: str

    def __post_init__(self):
        if self.split not in SPLIT_NAMES:
            raise ValueError(f"unknown split set {self.split!r}")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"unknown ordering {self.ordering!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")

    @property
    def label(self):
        return f"{self.split}/{self.ordering}/{self.scope}"


ALL_CONFIGS = tuple(HeuristicConfig(split, ordering, scope)
                    for split in SPLIT_NAMES
                    for ordering in ORDERINGS
                    for scope in SCOPES)


def parse_config(label) -> HeuristicConfig:
    """Inverse of HeuristicConfig.label ("H8/dynamic/local")."""
    parts = label.split("/")
    if len(parts) != 3:
        raise ValueError(f"bad heuristic label {label!r}")
    return HeuristicConfig(*parts)


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    visited_nodes: int
    wall_time: float
    heuristic: HeuristicConfig
    budget: Optional[int]
    refinement: Optional[Network] = None

    @property
    def millis(self):
        return self.wall_time * 1000.0


@dataclass(frozen=True)
class ConstrainednessScore:
    """Fail-first measure of one edge; smaller compares as more urgent."""

    edge: Tuple[int, int]
    decomposition_size: Optional[int]
    weight: int
    neighborhood_sum: Optional[int] = None

    def sort_key(self):
        if self.neighborhood_sum is not None:
            return (self.neighborhood_sum, self.edge)
        return (self.decomposition_size, self.weight, self.edge)


def local_score(net: Network, edge, split: SplitSet,
                weights: WeightTable) -> ConstrainednessScore:
    mask = net.get(*edge)
    return ConstrainednessScore(edge=edge,
                                decomposition_size=len(split.decomposition(mask)),
                                weight=weights.weight(mask))


def global_score(net: Network, edge, weights: WeightTable) -> ConstrainednessScore:
    i, j = edge
    n, m = net.n, net.m
    mask = m[i * n + j]
    table = weights.weights
    total = table[mask]
    for z in range(n):
        if z != i and z != j:
            total += table[m[i * n + z]] + table[m[z * n + j]]
    return ConstrainednessScore(edge=edge, decomposition_size=None,
                                weight=table[mask], neighborhood_sum=total)


def _rank_all_edges(net: Network, cfg: HeuristicConfig, split, weights):
    """Every i<j edge sorted by the config's score on the current network."""
    n, m = net.n, net.m
    scored = []
    if cfg.scope == "local":
        decomps = split.decompositions
        for i in range(n):
            for j in range(i + 1, n):
                mask = m[i * n + j]
                scored.append((len(decomps[mask]), weights[mask], (i, j)))
        scored.sort()
        return [edge for _, _, edge in scored]
    row = [0] * n
    col = [0] * n
    for i in range(n):
        base = i * n
        for z in range(n):
            if z != i:
                w = weights[m[base + z]]
                row[i] += w
                col[z] += w
    for i in range(n):
        for j in range(i + 1, n):
            scored.append((row[i] + col[j] - weights[m[i * n + j]], (i, j)))
    scored.sort()
    return [edge for _, edge in scored]


def static_order(net: Network, cfg: HeuristicConfig, algebra: Algebra = None):
    """Frozen edge order for static configs, from the initial closed net."""
    algebra = algebra or default_algebra()
    split = split_set(cfg.split, algebra)
    weights = algebra.weight_table("exact").weights
    return _rank_all_edges(net, cfg, split, weights)


def select_constraint(net: Network, cfg: HeuristicConfig, order_cache=None,
                      algebra: Algebra = None):
    """Pick the next edge to branch on, or None at a leaf.

    Static configs scan the frozen order_cache for the first edge whose
    current relation is outside the split set; dynamic configs rescore
    the current candidates from scratch.
    """
    algebra = algebra or default_algebra()
    split = split_set(cfg.split, algebra)
    members = split.members
    n, m = net.n, net.m
    if cfg.ordering == "static":
        if order_cache is None:
            raise ValueError("static selection needs the precomputed order")
        for edge in order_cache:
            i, j = edge
            if m[i * n + j] not in members:
                return edge
        return None
    weights = algebra.weight_table("exact").weights
    best = None
    if cfg.scope == "local":
        decomps = split.decompositions
        for i in range(n):
            base = i * n
            for j in range(i + 1, n):
                mask = m[base + j]
                if mask in members:
                    continue
                key = (len(decomps[mask]), weights[mask], i, j)
                if best is None or key < best:
                    best = key
        return None if best is None else (best[2], best[3])
    row = [0] * n
    col = [0] * n
    for i in range(n):
        base = i * n
        for z in range(n):
            if z != i:
                w = weights[m[base + z]]
                row[i] += w
                col[z] += w
    for i in range(n):
        base = i * n
        for j in range(i + 1, n):
            mask = m[base + j]
            if mask in members:
                continue
            key = (row[i] + col[j] - weights[mask], i, j)
            if best is None or key < best:
                best = key
    return None if best is None else (best[1], best[2])


def consistency(net: Network, cfg: HeuristicConfig, budget=None,
                algebra: Algebra = None, discipline="exact") -> SolveOutcome:
    """Decide the network under cfg, visiting at most budget nodes.

    The input network is not modified.  On "consistent" the outcome
    carries the refined network: path-consistent, every relation a
    member of cfg.split, every relation a subset of the input's.
    """
    algebra = algebra or default_algebra()
    split = split_set(cfg.split, algebra)
    members = split.members
    decomps = split.decompositions
    conv = algebra.conv
    start = time.perf_counter()

    def outcome(status, visited, refinement=None):
        return SolveOutcome(status=status, visited_nodes=visited,
                            wall_time=time.perf_counter() - start,
                            heuristic=cfg, budget=budget,
                            refinement=refinement)

    if budget is not None and budget < 1:
        return outcome(BUDGET_EXHAUSTED, 0)

    work = net.copy()
    visited = 1
    if not path_consistency(work, algebra, discipline).ok:
        return outcome(INCONSISTENT, visited)

    order_cache = (static_order(work, cfg, algebra)
                   if cfg.ordering == "static" else None)
    n, m = work.n, work.m
    trail = []
    # frames: [edge, parts, next part index, trail length before any attempt]
    stack = []

    edge = select_constraint(work, cfg, order_cache, algebra)
    while True:
        if edge is None:
            return outcome(CONSISTENT, visited, work)
        i, j = edge
        stack.append([edge, decomps[m[i * n + j]], 0, len(trail)])

        descended = False
        while stack:
            frame = stack[-1]
            (i, j), parts, idx, mark = frame
            undo_trail(work, trail, mark)
            if idx == len(parts):
                stack.pop()
                continue
            frame[2] = idx + 1
            part = parts[idx]
            ij = i * n + j
            ji = j * n + i
            trail.append((ij, ji, m[ij], m[ji]))
            m[ij] = part
            m[ji] = conv[part]
            if incremental_path_consistency(work, (i, j), algebra,
                                            discipline, trail).ok:
                if budget is not None and visited >= budget:
                    return outcome(BUDGET_EXHAUSTED, visited)
                visited += 1
                descended = True
                break
        if not descended:
            return outcome(INCONSISTENT, visited)
        edge = select_constraint(work, cfg, order_cache, algebra)
