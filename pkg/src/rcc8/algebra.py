"""Core RCC-8 relation algebra.

A relation is an 8-bit mask over the base relations, in bit order
DC, EC, PO, TPP, NTPP, TPPi, NTPPi, EQ (bit 0 holds DC).  Mask 0 is the
empty relation and mask 255 the universal one.  Set operations are plain
integer bit operations; composition and converse are table driven.

The base composition table ships as a text file (one line per ordered
base pair) and is validated at load time: every entry must be non-empty,
EQ must act as a two-sided identity, and the converse law
conv(a o b) == conv(b) o conv(a) must hold for all 64 pairs.

Restrictiveness weights (1 = most restricting, 16 = least) come in two
flavours.  The exact table scores a relation R by composing it with all
255 non-empty relations and summing the result cardinalities.  The
approximate table scores each base relation the same way and sums the
per-base scores over the members of R.  Both raw scores are mapped onto
1..16 with the same affine scaling, rounding half up.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

N_BASES = 8
BASE_NAMES = ("DC", "EC", "PO", "TPP", "NTPP", "TPPi", "NTPPi", "EQ")
DC, EC, PO, TPP, NTPP, TPPI, NTPPI, EQ = (1 << i for i in range(N_BASES))
EMPTY = 0
UNIVERSAL = (1 << N_BASES) - 1

# converse swaps TPP<->TPPi and NTPP<->NTPPi, everything else is symmetric
_BASE_CONVERSE = {DC: DC, EC: EC, PO: PO, TPP: TPPI, NTPP: NTPPI,
                  TPPI: TPP, NTPPI: NTPP, EQ: EQ}

_NAME_TO_BASE = {name: 1 << i for i, name in enumerate(BASE_NAMES)}


class CompositionTableError(ValueError):
    """Raised when the composition table file fails parsing or validation."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if line_no else message)


def parse_relation(text):
    """Parse a relation written as base names joined by '|', or '*'."""
    text = text.strip()
    if text == "*":
        return UNIVERSAL
    mask = 0
    for part in text.split("|"):
        name = part.strip()
        if name not in _NAME_TO_BASE:
            raise ValueError(f"unknown base relation {name!r}")
        mask |= _NAME_TO_BASE[name]
    return mask


def format_relation(mask):
    """Render a relation mask as 'DC|EC|...' ('*' for universal)."""
    if not 0 <= mask <= UNIVERSAL:
        raise ValueError(f"relation mask out of range: {mask}")
    if mask == UNIVERSAL:
        return "*"
    return "|".join(BASE_NAMES[i] for i in range(N_BASES) if mask >> i & 1)


def iter_bases(mask):
    """Yield the single-base masks contained in mask, ascending."""
    while mask:
        low = mask & -mask
        yield low
        mask ^= low


def _round_half_up(num, den):
    # integer-exact round-half-up of num/den for non-negative operands
    return (2 * num + den) // (2 * den)


@dataclass(frozen=True)
class WeightTable:
    """Scaled restrictiveness weights, indexed by relation mask.

    weights[m] is in 1..16 for non-empty m and None for the empty
    relation; raw_scores holds the unscaled sums the weights came from.
    """

    kind: str
    weights: tuple
    raw_scores: tuple

    def weight(self, mask):
        if mask == EMPTY:
            raise ValueError("the empty relation has no weight")
        return self.weights[mask]


class Algebra:
    """Composition/converse tables plus weight tables for RCC-8.

    comp is a flat list indexed by (a << 8) | b and conv a 256-entry
    list, so hot loops can index them directly.
    """

    def __init__(self, base_table):
        _validate_base_table(base_table)
        self.base_table = base_table
        self.conv = _build_converse()
        self.comp = _build_full_composition(base_table)
        self.exact_weights = _build_exact_weights(self.comp)
        self.approx_weights = _build_approx_weights(self.exact_weights)

    def compose(self, a, b):
        return self.comp[(a << 8) | b]

    def converse(self, a):
        return self.conv[a]

    def base_compose(self, a, b):
        """Composition of two single-base masks straight from the table."""
        return self.base_table[(a.bit_length() - 1) * N_BASES + (b.bit_length() - 1)]

    def weight_table(self, kind):
        if kind == "exact":
            return self.exact_weights
        if kind == "approx":
            return self.approx_weights
        raise ValueError(f"unknown weight table kind {kind!r}")


def _validate_base_table(table):
    if len(table) != N_BASES * N_BASES:
        raise CompositionTableError(None, f"expected 64 entries, got {len(table)}")
    eq_i = EQ.bit_length() - 1
    for i in range(N_BASES):
        if table[eq_i * N_BASES + i] != 1 << i:
            raise CompositionTableError(
                None, f"EQ o {BASE_NAMES[i]} must be {BASE_NAMES[i]}")
        if table[i * N_BASES + eq_i] != 1 << i:
            raise CompositionTableError(
                None, f"{BASE_NAMES[i]} o EQ must be {BASE_NAMES[i]}")
    conv = _build_converse()
    for i in range(N_BASES):
        for j in range(N_BASES):
            entry = table[i * N_BASES + j]
            if entry == EMPTY:
                raise CompositionTableError(
                    None, f"{BASE_NAMES[i]} o {BASE_NAMES[j]} is empty")
            ci = _BASE_CONVERSE[1 << i].bit_length() - 1
            cj = _BASE_CONVERSE[1 << j].bit_length() - 1
            if conv[entry] != table[cj * N_BASES + ci]:
                raise CompositionTableError(
                    None,
                    f"converse law fails for {BASE_NAMES[i]} o {BASE_NAMES[j]}")


def _build_converse():
    conv = [0] * 256
    for mask in range(256):
        out = 0
        for base in iter_bases(mask):
            out |= _BASE_CONVERSE[base]
        conv[mask] = out
    return conv


def _build_full_composition(base_table):
    """Lift the 8x8 base table to all 256x256 masks by union."""
    comp = [0] * (256 * 256)
    # base x mask first, peeling the lowest bit of the right operand
    for i in range(N_BASES):
        a = 1 << i
        row = a << 8
        for b_mask in range(1, 256):
            low = b_mask & -b_mask
            rest = b_mask ^ low
            entry = base_table[i * N_BASES + (low.bit_length() - 1)]
            comp[row | b_mask] = entry | comp[row | rest]
    # then mask x mask, peeling the lowest bit of the left operand
    for a_mask in range(1, 256):
        low = a_mask & -a_mask
        rest = a_mask ^ low
        if rest == 0:
            continue
        row, low_row, rest_row = a_mask << 8, low << 8, rest << 8
        for b_mask in range(1, 256):
            comp[row | b_mask] = comp[low_row | b_mask] | comp[rest_row | b_mask]
    return comp


def _scale_raw_scores(raw):
    """Map raw scores for masks 1..255 onto 1..16, rounding half up."""
    lo = min(raw[1:])
    hi = max(raw[1:])
    span = hi - lo
    weights = [None] * 256
    for mask in range(1, 256):
        weights[mask] = 1 + _round_half_up(15 * (raw[mask] - lo), span)
    return tuple(weights)


def _build_exact_weights(comp):
    raw = [0] * 256
    for mask in range(1, 256):
        row = mask << 8
        raw[mask] = sum((comp[row | s]).bit_count() for s in range(1, 256))
    weights = _scale_raw_scores(raw)
    raw[0] = None
    return WeightTable(kind="exact", weights=weights, raw_scores=tuple(raw))


def _build_approx_weights(exact: WeightTable):
    base_scores = [exact.raw_scores[1 << i] for i in range(N_BASES)]
    raw = [0] * 256
    for mask in range(1, 256):
        raw[mask] = sum(base_scores[i] for i in range(N_BASES) if mask >> i & 1)
    weights = _scale_raw_scores(raw)
    raw[0] = None
    return WeightTable(kind="approx", weights=weights, raw_scores=tuple(raw))


def parse_composition_table(text):
    """Parse the 64-line composition table format into a flat base table.

    Raises CompositionTableError with the offending line number on
    malformed lines, duplicate or missing pairs.
    """
    table = [None] * (N_BASES * N_BASES)
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        head, sep, tail = stripped.partition(":")
        if not sep:
            raise CompositionTableError(line_no, "expected 'R1 R2 : entry'")
        names = head.split()
        if len(names) != 2:
            raise CompositionTableError(
                line_no, f"expected two base relation names, got {names!r}")
        try:
            a = _NAME_TO_BASE[names[0]]
            b = _NAME_TO_BASE[names[1]]
        except KeyError as exc:
            raise CompositionTableError(
                line_no, f"unknown base relation {exc.args[0]!r}") from None
        try:
            entry = parse_relation(tail)
        except ValueError as exc:
            raise CompositionTableError(line_no, str(exc)) from None
        if entry == EMPTY:
            raise CompositionTableError(line_no, "empty composition entry")
        idx = (a.bit_length() - 1) * N_BASES + (b.bit_length() - 1)
        if table[idx] is not None:
            raise CompositionTableError(
                line_no, f"duplicate entry for {names[0]} o {names[1]}")
        table[idx] = entry
    missing = [i for i, e in enumerate(table) if e is None]
    if missing:
        i = missing[0]
        raise CompositionTableError(
            None,
            f"missing entry for {BASE_NAMES[i // N_BASES]} o {BASE_NAMES[i % N_BASES]}")
    return tuple(table)


def load_algebra(path=None):
    """Build an Algebra from a table file (the packaged one by default)."""
    if path is None:
        text = (importlib.resources.files("rcc8.data")
                .joinpath("composition_table.txt").read_text())
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return Algebra(parse_composition_table(text))


_DEFAULT = None


def default_algebra():
    """Process-wide shared Algebra built from the packaged table."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_algebra()
    return _DEFAULT
