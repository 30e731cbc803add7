"""Finite-support probability distributions.

Probabilities live in a dual representation: exact fractions (``fractions.Fraction``
or ``int``) for exact analysis, binary floats for iteration.  A Dist is exact when
every stored probability is exact; conversions between the two worlds are explicit
(`as_float`, `as_fraction`).  Sampling always projects to floats.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction

from .errors import NonPositiveProb, SumNotOne

SUM_TOL = 1e-12


def _is_exact(p):
    return isinstance(p, (Fraction, int))


class Dist:
    """Immutable finite-support distribution over opaque hashable outcomes."""

    __slots__ = ("outcomes", "probs", "_cum", "_hash")

    def __init__(self, outcomes, probs, _validated=False):
        if not _validated:
            d = dist_new(zip(outcomes, probs))
            outcomes, probs = d.outcomes, d.probs
        object.__setattr__(self, "outcomes", tuple(outcomes))
        object.__setattr__(self, "probs", tuple(probs))
        object.__setattr__(self, "_cum", None)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, *a):
        raise AttributeError("Dist is immutable")

    # -- queries ----------------------------------------------------------

    @property
    def exact(self):
        return all(_is_exact(p) for p in self.probs)

    @property
    def is_dirac(self):
        return len(self.outcomes) == 1

    def support(self):
        return self.outcomes

    def prob(self, outcome, default=0):
        for o, p in zip(self.outcomes, self.probs):
            if o == outcome:
                return p
        return default

    def items(self):
        return zip(self.outcomes, self.probs)

    def __len__(self):
        return len(self.outcomes)

    def __iter__(self):
        return iter(self.outcomes)

    def __eq__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return dict(self.items()) == dict(other.items())

    def __hash__(self):
        if self._hash is None:
            h = hash(frozenset((o, float(p)) for o, p in self.items()))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{o!r}: {p}" for o, p in self.items())
        return f"Dist({{{inner}}})"

    # -- conversions -------------------------------------------------------

    def as_float(self):
        return Dist(self.outcomes, tuple(float(p) for p in self.probs), _validated=True)

    def as_fraction(self):
        return Dist(self.outcomes, tuple(Fraction(p) for p in self.probs), _validated=True)

    def map_outcomes(self, fn):
        """Push forward through fn, merging outcomes that collide."""
        return dist_new((fn(o), p) for o, p in self.items())

    # -- sampling ----------------------------------------------------------

    def _cumulative(self):
        if self._cum is None:
            cum, acc = [], 0.0
            for p in self.probs:
                acc += float(p)
                cum.append(acc)
            cum[-1] = max(cum[-1], 1.0)
            object.__setattr__(self, "_cum", cum)
        return self._cum

    def sample(self, rng):
        """Draw one outcome; consumes exactly one uniform from rng."""
        u = rng.random()
        if len(self.outcomes) == 1:
            return self.outcomes[0]
        return self.outcomes[bisect_left(self._cumulative(), u)]

    def sample_u(self, u):
        """Resolve with a caller-supplied uniform in [0,1)."""
        if len(self.outcomes) == 1:
            return self.outcomes[0]
        return self.outcomes[bisect_left(self._cumulative(), u)]


def dist_new(entries):
    """Validated Dist from (outcome, prob) pairs; duplicate outcomes are merged.

    Raises NonPositiveProb for any p <= 0 and SumNotOne when the total misses 1
    (exactly, when all probabilities are exact; within 1e-12 otherwise).
    """
    merged = {}
    for outcome, p in entries:
        if p <= 0:
            raise NonPositiveProb(f"probability {p!r} for outcome {outcome!r}")
        if outcome in merged:
            merged[outcome] = merged[outcome] + p
        else:
            merged[outcome] = p
    if not merged:
        raise NonPositiveProb("empty distribution")
    probs = list(merged.values())
    if all(_is_exact(p) for p in probs):
        if sum(probs) != 1:
            raise SumNotOne(f"probabilities sum to {sum(probs)}")
    else:
        total = sum(float(p) for p in probs)
        if abs(total - 1.0) > SUM_TOL:
            raise SumNotOne(f"probabilities sum to {total}")
    return Dist(tuple(merged.keys()), tuple(probs), _validated=True)


def dirac(outcome):
    return Dist((outcome,), (1,), _validated=True)


def mix(weighted_dists):
    """Convex combination of (weight, Dist) pairs with merging."""
    entries = []
    for w, d in weighted_dists:
        if w == 0:
            continue
        for o, p in d.items():
            entries.append((o, w * p))
    return dist_new(entries)
