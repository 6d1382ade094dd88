"""Constraint networks and path consistency.

A Network stores an n x n matrix of relation masks in a flat list with
converse symmetry (m[j][i] == converse(m[i][j])) and EQ on the diagonal.

path_consistency runs the queue-driven closure algorithm: pop a triple
(p, r, q), intersect M[p][q] with M[p][r] o M[r][q], and on change
re-enqueue the triples that read the changed edge.  An empty
intersection is a failure (the network has no consistent refinement).
Three queue disciplines are supported:

* "unweighted" - first-in first-out;
* "approx"     - priority queue keyed by the sum of the two leg weights
                 from the approximate weight table;
* "exact"      - same, with exact weights.

Weighted priorities are computed when a triple is pushed; by the time it
is popped the legs may have tightened further, which is harmless because
the closure is confluent.  Ties pop in lexicographic (p, r, q) order.

Triples whose legs include a universal relation are never enqueued:
composing with the universal relation yields the universal relation, so
revising through such a leg can never change anything.  Any change to a
universal leg re-enqueues the affected triples, so the skipped work is
exactly the provably idle part of the textbook seeding.

incremental_path_consistency seeds the queue only with the triples that
read one changed edge, which is the restart used after each refinement
step during backtracking search.

All revisions can append (index, old_mask) pairs to a caller-supplied
trail so a search can restore the matrix bit-exactly on backtrack.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

from .algebra import (EMPTY, EQ, UNIVERSAL, Algebra, default_algebra,
                      format_relation, parse_relation)

DISCIPLINES = ("unweighted", "approx", "exact")

_DISCIPLINE_ALIASES = {
    "unweighted": "unweighted", "fifo": "unweighted",
    "approx": "approx", "approx-weighted": "approx",
    "exact": "exact", "exact-weighted": "exact",
}


def normalize_discipline(discipline):
    try:
        return _DISCIPLINE_ALIASES[discipline]
    except KeyError:
        raise ValueError(f"unknown queue discipline {discipline!r}") from None


class InstanceFormatError(ValueError):
    """Raised for malformed instance files, with the offending line."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if line_no else message)


class Network:
    """Square matrix of relation masks with converse symmetry."""

    __slots__ = ("n", "m")

    def __init__(self, n, fill=UNIVERSAL):
        if n < 1:
            raise ValueError("network needs at least one variable")
        self.n = n
        self.m = [fill] * (n * n)
        for i in range(n):
            self.m[i * n + i] = EQ

    def get(self, i, j):
        return self.m[i * self.n + j]

    def set_edge(self, i, j, mask, algebra: Algebra = None):
        """Assign mask to (i, j) and its converse to (j, i)."""
        conv = (algebra or default_algebra()).conv
        self.m[i * self.n + j] = mask
        self.m[j * self.n + i] = conv[mask]

    def copy(self):
        dup = Network.__new__(Network)
        dup.n = self.n
        dup.m = self.m[:]
        return dup

    def __eq__(self, other):
        return isinstance(other, Network) and self.n == other.n and self.m == other.m

    def __hash__(self):
        return hash((self.n, tuple(self.m)))

    def nonuniversal_edges(self):
        """Sorted (i, j) pairs with i < j carrying a non-universal relation."""
        n, m = self.n, self.m
        return [(i, j) for i in range(n) for j in range(i + 1, n)
                if m[i * n + j] != UNIVERSAL]


@dataclass(frozen=True)
class PcResult:
    """Outcome of a propagation run.

    ok is False when some relation became empty; revisions counts
    successful tightenings; queue_ops counts queue pops.
    """

    ok: bool
    revisions: int
    queue_ops: int

    @property
    def status(self):
        return "consistent-approximation" if self.ok else "fail"


def revise(net: Network, i, k, j, algebra: Algebra = None):
    """Intersect M[i][j] with M[i][k] o M[k][j]; true iff it changed.

    Keeps M[j][i] the converse of M[i][j].  The result may be empty;
    the caller decides what failure means.
    """
    algebra = algebra or default_algebra()
    n, m = net.n, net.m
    old = m[i * n + j]
    new = old & algebra.comp[(m[i * n + k] << 8) | m[k * n + j]]
    if new == old:
        return False
    m[i * n + j] = new
    m[j * n + i] = algebra.conv[new]
    return True


def _propagate(net: Network, algebra: Algebra, discipline, seeds, trail):
    n, m = net.n, net.m
    comp, conv = algebra.comp, algebra.conv
    weighted = discipline != "unweighted"
    if weighted:
        weights = algebra.weight_table(discipline).weights
    in_queue = set(seeds)
    revisions = 0
    pops = 0

    if weighted:
        heap = []
        for packed in in_queue:
            q = packed % n
            pr = packed // n
            r = pr % n
            p = pr // n
            heap.append(((weights[m[p * n + r]] + weights[m[r * n + q]]) << 32) | packed)
        heapq.heapify(heap)
        push_heap = heapq.heappush
        pop_heap = heapq.heappop
    else:
        fifo = deque(sorted(in_queue))

    while in_queue:
        if weighted:
            packed = pop_heap(heap) & 0xFFFFFFFF
            if packed not in in_queue:
                continue
        else:
            packed = fifo.popleft()
            if packed not in in_queue:
                continue
        in_queue.discard(packed)
        pops += 1

        q = packed % n
        pr = packed // n
        r = pr % n
        p = pr // n

        a = m[p * n + r]
        b = m[r * n + q]
        if a == UNIVERSAL or b == UNIVERSAL:
            continue
        old = m[p * n + q]
        new = old & comp[(a << 8) | b]
        if new == old:
            continue
        revisions += 1
        ij = p * n + q
        ji = q * n + p
        if trail is not None:
            trail.append((ij, ji, old, m[ji]))
        if new == EMPTY:
            m[ij] = new
            m[ji] = new
            return PcResult(ok=False, revisions=revisions, queue_ops=pops)
        m[ij] = new
        m[ji] = conv[new]

        # re-enqueue every triple that reads the changed edge (p, q)
        new_w = weights[new] if weighted else 0
        qn = q * n
        for s in range(n):
            if s == p or s == q:
                continue
            leg = m[qn + s]
            if leg != UNIVERSAL:
                cand = (p * n + q) * n + s
                if cand not in in_queue:
                    in_queue.add(cand)
                    if weighted:
                        push_heap(heap, ((new_w + weights[leg]) << 32) | cand)
                    else:
                        fifo.append(cand)
            leg = m[s * n + p]
            if leg != UNIVERSAL:
                cand = (s * n + p) * n + q
                if cand not in in_queue:
                    in_queue.add(cand)
                    if weighted:
                        push_heap(heap, ((weights[leg] + new_w) << 32) | cand)
                    else:
                        fifo.append(cand)
    return PcResult(ok=True, revisions=revisions, queue_ops=pops)


def _full_seeds(net: Network):
    """Packed triples (a, b, c) with a<b or b<c and both legs non-universal."""
    n, m = net.n, net.m
    neighbours = [[] for _ in range(n)]
    for i in range(n):
        row = i * n
        nb = neighbours[i]
        for j in range(n):
            if i != j and m[row + j] != UNIVERSAL:
                nb.append(j)
    seeds = []
    for b in range(n):
        nb = neighbours[b]
        for a in nb:
            abn = (a * n + b) * n
            for c in nb:
                if c != a and (a < b or b < c):
                    seeds.append(abn + c)
    return seeds


def _edge_seeds(net: Network, i, j):
    n, m = net.n, net.m
    seeds = []
    ijn = (i * n + j) * n
    jn = j * n
    for s in range(n):
        if s == i or s == j:
            continue
        if m[jn + s] != UNIVERSAL:
            seeds.append(ijn + s)
        if m[s * n + i] != UNIVERSAL:
            seeds.append((s * n + i) * n + j)
    return seeds


def path_consistency(net: Network, algebra: Algebra = None,
                     discipline="exact", trail=None) -> PcResult:
    """Close the whole network under composition, in place."""
    algebra = algebra or default_algebra()
    discipline = normalize_discipline(discipline)
    if any(v == EMPTY for v in net.m):
        return PcResult(ok=False, revisions=0, queue_ops=0)
    return _propagate(net, algebra, discipline, _full_seeds(net), trail)


def incremental_path_consistency(net: Network, edge, algebra: Algebra = None,
                                 discipline="exact", trail=None) -> PcResult:
    """Re-close after a single edge changed, seeding only its triples."""
    algebra = algebra or default_algebra()
    discipline = normalize_discipline(discipline)
    i, j = edge
    if net.m[i * net.n + j] == EMPTY:
        return PcResult(ok=False, revisions=0, queue_ops=0)
    return _propagate(net, algebra, discipline, _edge_seeds(net, i, j), trail)


def undo_trail(net: Network, trail, mark=0):
    """Pop trail entries down to mark, restoring the matrix bit-exactly."""
    m = net.m
    while len(trail) > mark:
        ij, ji, old_ij, old_ji = trail.pop()
        m[ij] = old_ij
        m[ji] = old_ji


# ---------------------------------------------------------------------------
# instance files

_HEADER_PREFIX = "rcc8"


def write_instance(net: Network, meta, path=None):
    """Serialize a network with its generation metadata.

    meta carries n/model/d/l/seed; unlisted pairs are universal.  Returns
    the text; writes it to path when given.
    """
    header = (f"{_HEADER_PREFIX} n={net.n} model={meta['model']} "
              f"d={meta['d']} l={meta['l']} seed={meta['seed']}")
    if "rng" in meta:
        header += f" rng={meta['rng']}"
    lines = [header]
    n, m = net.n, net.m
    for i in range(n):
        for j in range(i + 1, n):
            mask = m[i * n + j]
            if mask != UNIVERSAL:
                lines.append(f"{i} {j} : {format_relation(mask)}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _parse_header(line_no, line):
    fields = line.split()
    if not fields or fields[0] != _HEADER_PREFIX:
        raise InstanceFormatError(line_no, f"header must start with {_HEADER_PREFIX!r}")
    meta = {}
    for field in fields[1:]:
        key, sep, value = field.partition("=")
        if not sep:
            raise InstanceFormatError(line_no, f"malformed header field {field!r}")
        meta[key] = value
    try:
        meta["n"] = int(meta["n"])
        meta["d"] = float(meta.get("d", "0"))
        meta["l"] = float(meta.get("l", "0"))
        meta["seed"] = int(meta.get("seed", "0"))
        meta.setdefault("model", "custom")
    except (KeyError, ValueError) as exc:
        raise InstanceFormatError(line_no, f"bad header value: {exc}") from None
    if meta["n"] < 1:
        raise InstanceFormatError(line_no, "n must be positive")
    return meta


def read_instance(source, algebra: Algebra = None):
    """Parse an instance file (path or text) into (Network, meta)."""
    algebra = algebra or default_algebra()
    if "\n" not in str(source):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(source)
    net = None
    meta = None
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if net is None:
            meta = _parse_header(line_no, line)
            net = Network(meta["n"])
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise InstanceFormatError(line_no, "expected 'i j : RELATION'")
        try:
            i_s, j_s = head.split()
            i, j = int(i_s), int(j_s)
        except ValueError:
            raise InstanceFormatError(line_no, f"bad edge pair {head!r}") from None
        if not 0 <= i < j < net.n:
            raise InstanceFormatError(line_no, f"edge ({i}, {j}) out of range (n={net.n})")
        if (i, j) in seen:
            raise InstanceFormatError(line_no, f"duplicate edge ({i}, {j})")
        seen.add((i, j))
        try:
            mask = parse_relation(tail)
        except ValueError as exc:
            raise InstanceFormatError(line_no, str(exc)) from None
        if mask == EMPTY:
            raise InstanceFormatError(line_no, "empty relation not allowed")
        net.set_edge(i, j, mask, algebra)
    if net is None:
        raise InstanceFormatError(None, "missing header line")
    return net, meta
