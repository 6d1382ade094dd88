"""Tractable subsets of RCC-8 and split-set decompositions.

Membership in the four named relation classes is purely syntactic:

* NP8 collects the relations whose satisfiability problems pin the
  NP-hard frontier: no PO, at least one of {TPP, NTPP}, at least one of
  {TPPi, NTPPi}, plus four exceptional relations.
* H8, C8 and Q8 are the three maximal tractable subsets.  Each is the
  complement of NP8 minus one family of exclusions.

Counting conventions follow the class definitions read over all 256
masks, so the closed classes contain the empty relation (they are closed
under intersection); decompositions only ever use non-empty members.

A SplitSet bundles a member set with a precomputed decomposition table:
for every relation the minimal-cardinality cover by members that are
subsets of the relation and union back to it exactly.  Ties prefer the
largest total weight (least restricting parts), then the
lexicographically smallest part sequence.  Parts are ordered by
descending weight, so search tries the least restricting part first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import (DC, EC, PO, TPP, NTPP, TPPI, NTPPI, EQ, EMPTY,
                      UNIVERSAL, Algebra, default_algebra)

SPLIT_NAMES = ("B", "Bhat", "H8", "C8", "Q8")

_NP8_EXTRAS = frozenset({EC | NTPP | EQ, DC | EC | NTPP | EQ,
                         EC | NTPPI | EQ, DC | EC | NTPPI | EQ})
_PART_BITS = TPP | NTPP | TPPI | NTPPI


def in_np8(r):
    """Membership in NP8 (never contains the empty relation)."""
    if not r & PO and r & (TPP | NTPP) and r & (TPPI | NTPPI):
        return True
    return r in _NP8_EXTRAS


def in_h8(r):
    if in_np8(r):
        return False
    if r & EQ and r & NTPP and not r & TPP:
        return False
    if r & EQ and r & NTPPI and not r & TPPI:
        return False
    return True


def in_c8(r):
    if in_np8(r):
        return False
    # {EC} proper-subset condition is implied by the non-empty overlap
    return not (r & EC and not r & PO and r & (_PART_BITS | EQ))


def in_q8(r):
    if in_np8(r):
        return False
    return not (r & EQ and not r & PO and r & _PART_BITS)


_MEMBERSHIP = {"NP8": in_np8, "H8": in_h8, "C8": in_c8, "Q8": in_q8}


def membership(name):
    return _MEMBERSHIP[name]


def closure(seeds, algebra: Algebra):
    """Close a set of relations under composition, intersection, converse."""
    comp, conv = algebra.comp, algebra.conv
    members = set(seeds)
    frontier = list(members)
    while frontier:
        fresh = []
        snapshot = tuple(members)
        for a in frontier:
            if conv[a] not in members:
                fresh.append(conv[a])
                members.add(conv[a])
            for b in snapshot:
                for c in (comp[(a << 8) | b], comp[(b << 8) | a], a & b):
                    if c not in members:
                        fresh.append(c)
                        members.add(c)
        frontier = fresh
    return frozenset(members)


def base_closure(algebra: Algebra):
    """Closure of the eight base relations (the Bhat split set)."""
    return closure([1 << i for i in range(8)], algebra)


@dataclass(frozen=True)
class SplitSet:
    """A split set with its precomputed decomposition table.

    decompositions[m] lists the parts of relation m, descending weight;
    the empty relation decomposes into the empty sequence.
    """

    name: str
    members: frozenset
    decompositions: tuple

    def decomposition(self, mask):
        return self.decompositions[mask]

    def average_branching(self):
        """Mean decomposition size over all 256 relations, as a Fraction."""
        return Fraction(sum(len(p) for p in self.decompositions), 256)

    def search_space(self, n):
        """Nominal search-space size b**(n*(n-1)/2) for an n-variable network.

        b is the average branching factor.  This is a descriptive figure for
        reports; actual search trees are far smaller because propagation
        prunes most branches.
        """
        if n < 2:
            raise ValueError("n must be at least 2")
        return float(self.average_branching()) ** (n * (n - 1) / 2)


def _minimal_covers(target, parts):
    """All minimal-cardinality covers of target by unions of parts.

    parts must be non-empty subsets of target.  Covers are found by
    iterative deepening; at each step only parts containing the lowest
    uncovered bit are tried, which visits every cover set at least once.
    """
    by_bit = [[] for _ in range(8)]
    for p in parts:
        bits = p
        while bits:
            low = bits & -bits
            bits ^= low
            by_bit[low.bit_length() - 1].append(p)

    found = set()

    def extend(covered, chosen, depth):
        if covered == target:
            found.add(frozenset(chosen))
            return
        if depth == 0:
            return
        low_bit = ((target & ~covered) & -(target & ~covered)).bit_length() - 1
        for p in by_bit[low_bit]:
            if p & ~covered:
                chosen.append(p)
                extend(covered | p, chosen, depth - 1)
                chosen.pop()

    # a cover by singletons always exists when parts include the bases
    for size in range(1, target.bit_count() + 1):
        extend(EMPTY, [], size)
        if found:
            return found
    return found


def _order_parts(cover, weights):
    return tuple(sorted(cover, key=lambda p: (-weights[p], p)))


def build_split_set(name, algebra: Algebra = None):
    """Construct one of the five split sets with decomposition tables."""
    algebra = algebra or default_algebra()
    if name == "B":
        members = frozenset(1 << i for i in range(8))
    elif name == "Bhat":
        members = base_closure(algebra)
    elif name in ("H8", "C8", "Q8"):
        pred = _MEMBERSHIP[name]
        members = frozenset(r for r in range(256) if pred(r))
    else:
        raise ValueError(f"unknown split set {name!r}")

    weights = algebra.exact_weights.weights
    usable = sorted(m for m in members if m != EMPTY)
    # members decompose into themselves, including the empty relation for
    # the intersection-closed classes; otherwise the empty cover is minimal
    decomps = [(EMPTY,) if EMPTY in members else ()]
    for mask in range(1, 256):
        if mask in members:
            decomps.append((mask,))
            continue
        parts = [p for p in usable if p & mask == p]
        covers = _minimal_covers(mask, parts)
        if not covers:
            raise ValueError(
                f"{name}: no cover for relation mask {mask} (split set "
                "must contain all base relations)")
        best = min(((-sum(weights[p] for p in c), _order_parts(c, weights))
                    for c in covers))
        decomps.append(best[1])
    return SplitSet(name=name, members=members, decompositions=tuple(decomps))


_SPLIT_CACHE = {}


def split_set(name, algebra: Algebra = None):
    """Cached split sets built against the default algebra."""
    if algebra is not None and algebra is not default_algebra():
        return build_split_set(name, algebra)
    if name not in _SPLIT_CACHE:
        _SPLIT_CACHE[name] = build_split_set(name, default_algebra())
    return _SPLIT_CACHE[name]


@dataclass(frozen=True)
class SubsetReport:
    """Cardinalities and branching factors of the named classes."""

    np8_size: int
    h8_size: int
    c8_size: int
    q8_size: int
    bhat_size: int
    average_branching: dict

    @property
    def union_covers_complement(self):
        return all(in_h8(r) or in_c8(r) or in_np8(r) for r in range(1, 256))


def subset_report(algebra: Algebra = None):
    algebra = algebra or default_algebra()
    branching = {name: float(split_set(name, algebra).average_branching())
                 for name in SPLIT_NAMES}
    return SubsetReport(
        np8_size=sum(in_np8(r) for r in range(256)),
        h8_size=sum(in_h8(r) for r in range(256)),
        c8_size=sum(in_c8(r) for r in range(256)),
        q8_size=sum(in_q8(r) for r in range(256)),
        bhat_size=len(base_closure(algebra)),
        average_branching=branching,
    )


def dump_rows(algebra: Algebra = None):
    """One row per relation mask: membership flags and decomposition sizes."""
    algebra = algebra or default_algebra()
    splits = {name: split_set(name, algebra) for name in SPLIT_NAMES}
    bhat = splits["Bhat"].members
    rows = []
    for mask in range(256):
        row = {
            "mask": mask,
            "np8": int(in_np8(mask)),
            "h8": int(in_h8(mask)),
            "c8": int(in_c8(mask)),
            "q8": int(in_q8(mask)),
            "bhat": int(mask in bhat),
        }
        for name in SPLIT_NAMES:
            row[f"decomp_{name.lower()}"] = len(splits[name].decompositions[mask])
        rows.append(row)
    return rows
