"""Random instance models A(n,d,l) and H(n,d,l), plus flaw analysis.

Generation picks round(n*d/2) of the n(n-1)/2 edges uniformly at
random, then labels each picked edge: one base relation chosen
uniformly, and each of the remaining seven bases added independently
with probability (l-1)/7, so the expected label size is l and (at
l=4) every base appears with probability 1/2.  Labels are resampled
until allowed - model A only forbids the universal relation (keeping
the realized degree exact), model H requires membership in NP8, the
subset whose triangles can never be locally inconsistent.

The flaw analysis quantifies how often model A plants a locally
inconsistent triangle: a census of all 255^3 ordered label triples
counts the inconsistent ones (a triple (R12, R13, R23) is inconsistent
exactly when R13 shares no base with R12 o R23), and the expected
number of connected triples at degree d converts that probability into
an expected number of flawed triangles per instance.  Solving for the
degree where that expectation crosses a target locates the regime
below which trivially flawed instances dominate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .algebra import N_BASES, UNIVERSAL, Algebra, default_algebra
from .network import Network
from .subclasses import in_np8

import random

MODELS = ("A", "H")

_TOTAL_TRIPLES = 255 ** 3

# rejection-sampling guard: at l=4 both models accept well over a third of
# draws, so hitting this many consecutive rejections means the parameters
# admit (essentially) no valid label
_MAX_REJECTIONS = 100_000

# recorded in instance headers so files carry their provenance; instances
# are reproducible within this implementation, not across RNGs
RNG_NAME = "python-random-mt19937"


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one random instance."""

    model: str
    n: int
    d: float
    l: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 2:
            raise ValueError("need at least two regions")
        if not 0 < self.d <= self.n - 1:
            raise ValueError(f"average degree {self.d} outside (0, n-1]")
        if not 1 <= self.l <= N_BASES:
            raise ValueError(f"average label size {self.l} outside [1, 8]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def edge_count(self):
        return round(self.n * self.d / 2)

    @property
    def meta(self):
        return {"n": self.n, "model": self.model, "d": self.d,
                "l": self.l, "seed": self.seed, "rng": RNG_NAME}


def sample_label(rng: random.Random, l=4.0):
    """One label before any rejection: uniform base + binomial extras."""
    seed_base = rng.randrange(N_BASES)
    p_extra = (l - 1) / 7.0
    mask = 1 << seed_base
    for b in range(N_BASES):
        if b != seed_base and rng.random() < p_extra:
            mask |= 1 << b
    return mask


def _label_allowed(model):
    if model == "A":
        return lambda mask: mask != UNIVERSAL
    return in_np8


def generate(spec: GenSpec, algebra: Algebra = None):
    """Draw one instance; returns (Network, header metadata)."""
    algebra = algebra or default_algebra()
    e = spec.edge_count
    pairs = [(i, j) for i in range(spec.n) for j in range(i + 1, spec.n)]
    rng = random.Random(spec.seed)
    chosen = sorted(rng.sample(pairs, e))
    allowed = _label_allowed(spec.model)
    net = Network(spec.n)
    for i, j in chosen:
        label = sample_label(rng, spec.l)
        attempts = 1
        while not allowed(label):
            # rejection can only stall when the label distribution puts
            # (almost) no mass on the model's admissible set, e.g. model H
            # with l=1 (single bases are never hard) or model A with l=8
            # (every draw is universal); fail loudly instead of spinning
            if attempts >= _MAX_REJECTIONS:
                raise ValueError(
                    f"model {spec.model} rejected {attempts} labels in a row "
                    f"at l={spec.l}; admissible labels are too rare"
                )
            label = sample_label(rng, spec.l)
            attempts += 1
        net.set_edge(i, j, label, algebra)
    return net, spec.meta


# ---------------------------------------------------------------------------
# flaw analysis

def count_inconsistent_triples(algebra: Algebra = None, labels=None,
                               method="fast", r12_range=None):
    """Count ordered label triples (R12, R13, R23) with no consistent
    base refinement, i.e. R13 disjoint from R12 o R23.

    labels restricts all three positions (default: every non-empty
    relation).  method="fast" counts the compatible R13 per (R12, R23)
    pair arithmetically; method="exhaustive" tests each triple, and
    r12_range=(lo, hi) can partition its outer loop for spot checks.
    """
    algebra = algebra or default_algebra()
    comp = algebra.comp
    if labels is None:
        r12s = range(1, 256) if r12_range is None else range(*r12_range)
        if method == "fast":
            return sum((1 << (8 - comp[(a << 8) | b].bit_count())) - 1
                       for a in r12s for b in range(1, 256))
        if method != "exhaustive":
            raise ValueError(f"unknown census method {method!r}")
        count = 0
        for a in r12s:
            row = a << 8
            for b in range(1, 256):
                c = comp[row | b]
                count += sum(1 for r13 in range(1, 256) if not r13 & c)
        return count
    labels = sorted(set(labels))
    if any(m < 1 or m > 255 for m in labels):
        raise ValueError("labels must be non-empty relation masks")
    outer = labels if r12_range is None else [m for m in labels
                                              if r12_range[0] <= m < r12_range[1]]
    count = 0
    for a in outer:
        row = a << 8
        for b in labels:
            c = comp[row | b]
            count += sum(1 for r13 in labels if not r13 & c)
    return count


def inconsistency_probability(algebra: Algebra = None) -> Fraction:
    """Exact probability that a uniformly labelled triple is flawed."""
    return Fraction(count_inconsistent_triples(algebra), _TOTAL_TRIPLES)


def _falling3(x):
    return x * (x - 1.0) * (x - 2.0) / 6.0


def expected_connected_triples(n, d):
    """Expected number of triangles among round-free nd/2 random edges.

    C(n,3) * C(nd/2, 3) / C(n(n-1)/2, 3) with generalized binomials;
    n may be math.inf, giving the d^3/6 limit.
    """
    if n == math.inf:
        return d ** 3 / 6.0
    if n < 3:
        raise ValueError("need at least three regions for a triple")
    e = n * d / 2.0
    total = n * (n - 1) / 2.0
    if e < 2.0:
        return 0.0
    return _falling3(float(n)) * _falling3(e) / _falling3(total)


def expected_inconsistent_triples(n, d, algebra: Algebra = None,
                                  p: Optional[Fraction] = None):
    if p is None:
        p = inconsistency_probability(algebra)
    return expected_connected_triples(n, d) * float(p)


def solve_degree_threshold(n, target_eit, algebra: Algebra = None,
                           p: Optional[Fraction] = None):
    """Degree d at which the expected flawed-triple count hits target."""
    if target_eit <= 0:
        raise ValueError("target must be positive")
    if p is None:
        p = inconsistency_probability(algebra)
    p = float(p)
    if n == math.inf:
        return (6.0 * target_eit / p) ** (1.0 / 3.0)
    lo, hi = 4.0 / n, float(n - 1)
    if expected_connected_triples(n, hi) * p < target_eit:
        raise ValueError(f"target {target_eit} unreachable below d = n-1")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if expected_connected_triples(n, mid) * p < target_eit:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FlawReport:
    """Expected-flaw summary for one (model, n, d) point."""

    model: str
    n: object  # int or math.inf
    d: float
    p_inconsistent: Fraction
    e_ct: float
    e_it: float

    def d_for_eit(self, target, algebra: Algebra = None):
        return solve_degree_threshold(self.n, target, algebra,
                                      p=self.p_inconsistent)


def np8_labels():
    """All non-empty relations a model-H edge can carry."""
    return [m for m in range(1, 256) if in_np8(m)]


def flaw_report(n, d, model="A", algebra: Algebra = None) -> FlawReport:
    algebra = algebra or default_algebra()
    if model == "A":
        p = inconsistency_probability(algebra)
    elif model == "H":
        labels = np8_labels()
        flawed = count_inconsistent_triples(algebra, labels=labels)
        p = Fraction(flawed, len(labels) ** 3)
    else:
        raise ValueError(f"unknown model {model!r}")
    e_ct = expected_connected_triples(n, d)
    return FlawReport(model=model, n=n, d=d, p_inconsistent=p,
                      e_ct=e_ct, e_it=e_ct * float(p))
