"""Candidate-wise distance uncertainty and per-issue winner analysis.

An agent's uncertainty set is a product of integer intervals, one per
candidate per issue. Single-issue questions ("who can win?", "which pairs of
winners can my two prospective votes produce?") are answered from interval
extremes instead of enumerating the product; the ``*_bruteforce`` variants
enumerate it and exist as test oracles.

Tallies are compared in doubled units so that both the atomic model (a vote
adds one full unit) and the nonatomic model (a vote only breaks exact ties)
share one winner rule: a candidate's effective score is ``2 * v + w`` when it
receives the vote and ``2 * v`` otherwise, with ``w`` equal to
:data:`ATOMIC_WEIGHT` or :data:`TIE_BREAK_WEIGHT`.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence, Union

from .domain import Alternative, DomainError, ScoreTuple, adjusted_score

Radius = Union[int, Fraction]
Interval = tuple[int, int]
IssueIntervals = tuple[Interval, ...]

ATOMIC_WEIGHT = 2
TIE_BREAK_WEIGHT = 1

#: Issue-level pair analysis enumerates the issue's product set below this size.
BRUTE_FORCE_LIMIT = 4096


class Metric(str, enum.Enum):
    LINF = "linf"
    MULTIPLICATIVE = "multiplicative"


def _as_radius(metric: Metric, radius) -> Radius:
    if isinstance(radius, float):
        radius = Fraction(radius)
    elif isinstance(radius, str):
        radius = Fraction(radius)
    if radius < 0:
        raise DomainError(f"uncertainty radius must be non-negative, got {radius}")
    if metric is Metric.LINF:
        if Fraction(radius).denominator != 1:
            raise DomainError(f"linf radii are integers, got {radius}")
        return int(radius)
    return Fraction(radius)


def candidate_interval(metric: Metric, score: int, radius: Radius) -> Interval:
    """Largest integer interval of scores within ``radius`` of ``score``."""
    metric = Metric(metric)
    radius = _as_radius(metric, radius)
    if metric is Metric.LINF:
        return max(0, score - radius), score + radius
    if score == 0:
        # ratio to a zero score is undefined; only zero itself is at distance 0
        return 0, 0
    scale = 1 + radius
    lo = math.ceil(Fraction(score) / scale)
    hi = math.floor(score * scale)
    return lo, hi


@dataclass(frozen=True)
class UncertaintySpec:
    metric: Metric
    radii: tuple[Radius, ...]

    def __post_init__(self):
        metric = Metric(self.metric)
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "radii", tuple(_as_radius(metric, r) for r in self.radii))

    @classmethod
    def uniform(cls, p: int, radius: Radius = 0, metric: Metric = Metric.LINF) -> "UncertaintySpec":
        return cls(metric, (radius,) * p)

    def with_radius(self, issue: int, radius: Radius) -> "UncertaintySpec":
        radii = list(self.radii)
        radii[issue] = radius
        return UncertaintySpec(self.metric, tuple(radii))

    def to_json(self) -> dict:
        return {"metric": self.metric.value, "radii": [str(r) if isinstance(r, Fraction) else r for r in self.radii]}

    @classmethod
    def from_json(cls, doc: dict) -> "UncertaintySpec":
        return cls(Metric(doc["metric"]), tuple(Fraction(r) if isinstance(r, str) else r for r in doc["radii"]))


@lru_cache(maxsize=1 << 16)
def issue_intervals(metric: Metric, scores: tuple[int, ...], radius: Radius) -> IssueIntervals:
    return tuple(candidate_interval(metric, v, radius) for v in scores)


@dataclass(frozen=True)
class UncertaintySet:
    """Product of per-candidate integer intervals, one tuple of intervals per issue."""

    intervals: tuple[IssueIntervals, ...]

    def __getitem__(self, issue: int) -> IssueIntervals:
        return self.intervals[issue]

    def __len__(self) -> int:
        return len(self.intervals)

    def contains(self, s: ScoreTuple) -> bool:
        if len(s) != len(self.intervals):
            return False
        for vec, ivs in zip(s, self.intervals):
            if len(vec) != len(ivs):
                return False
            for v, (lo, hi) in zip(vec, ivs):
                if not lo <= v <= hi:
                    return False
        return True

    __contains__ = contains

    def issue_size(self, issue: int) -> int:
        return math.prod(hi - lo + 1 for lo, hi in self.intervals[issue])

    @property
    def size(self) -> int:
        return math.prod(self.issue_size(i) for i in range(len(self.intervals)))

    def issue_vectors(self, issue: int) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(lo, hi + 1) for lo, hi in self.intervals[issue]))

    def __iter__(self) -> Iterator[ScoreTuple]:
        return itertools.product(*(list(self.issue_vectors(i)) for i in range(len(self.intervals))))


def build_uncertainty_set(s: ScoreTuple, spec: UncertaintySpec) -> UncertaintySet:
    if len(spec.radii) != len(s):
        raise DomainError(f"spec has {len(spec.radii)} radii for {len(s)} issues")
    return UncertaintySet(tuple(issue_intervals(spec.metric, tuple(v), r) for v, r in zip(s, spec.radii)))


def tally_winner(scores: Sequence[int], voted: int, weight: int = ATOMIC_WEIGHT) -> int:
    """Winner of one issue when the agent adds a vote of ``weight`` to ``voted``."""
    best, top = 0, 2 * scores[0] + (weight if voted == 0 else 0)
    for c in range(1, len(scores)):
        eff = 2 * scores[c] + (weight if voted == c else 0)
        if eff > top:
            best, top = c, eff
    return best


def _beats(eff_a: int, a: int, eff_b: int, b: int) -> bool:
    return eff_a > eff_b or (eff_a == eff_b and a < b)


@lru_cache(maxsize=1 << 16)
def possible_issue_outcomes(ivs: IssueIntervals, voted: int, weight: int = ATOMIC_WEIGHT) -> frozenset[int]:
    """Candidates that win for some score vector of the issue, given the agent's vote.

    A candidate can win iff it wins with its own score at the top of its
    interval and every rival at the bottom of theirs.
    """
    lows = [2 * lo + (weight if d == voted else 0) for d, (lo, _) in enumerate(ivs)]
    out = []
    for c, (_, hi) in enumerate(ivs):
        eff_c = 2 * hi + (weight if c == voted else 0)
        if all(_beats(eff_c, c, lows[d], d) for d in range(len(ivs)) if d != c):
            out.append(c)
    return frozenset(out)


def possible_issue_outcomes_bruteforce(ivs: IssueIntervals, voted: int, weight: int = ATOMIC_WEIGHT) -> frozenset[int]:
    vectors = itertools.product(*(range(lo, hi + 1) for lo, hi in ivs))
    return frozenset(tally_winner(v, voted, weight) for v in vectors)


def outcome_pairs_bruteforce(ivs: IssueIntervals, x: int, y: int, weight: int = ATOMIC_WEIGHT) -> frozenset[tuple[int, int]]:
    """All ``(winner when voting x, winner when voting y)`` over the issue's vectors."""
    vectors = itertools.product(*(range(lo, hi + 1) for lo, hi in ivs))
    return frozenset((tally_winner(v, x, weight), tally_winner(v, y, weight)) for v in vectors)


def _pair_feasible(ivs: IssueIntervals, x: int, y: int, wx: int, wy: int, weight: int) -> bool:
    # Candidates that win under neither vote are pushed to their lower bound;
    # a sole double winner is pushed to its upper bound. Both moves preserve
    # the pair of winners, so only the two winners' scores need a search.
    base = [lo for lo, _ in ivs]
    if wx == wy:
        base[wx] = ivs[wx][1]
        return tally_winner(base, x, weight) == wx and tally_winner(base, y, weight) == wy
    for a in range(ivs[wx][0], ivs[wx][1] + 1):
        base[wx] = a
        for b in range(ivs[wy][0], ivs[wy][1] + 1):
            base[wy] = b
            if tally_winner(base, x, weight) == wx and tally_winner(base, y, weight) == wy:
                return True
    return False


def outcome_pairs_reduced(ivs: IssueIntervals, x: int, y: int, weight: int = ATOMIC_WEIGHT) -> frozenset[tuple[int, int]]:
    m = len(ivs)
    if x == y:
        return frozenset((w, w) for w in possible_issue_outcomes(ivs, x, weight))
    # Only x and y change between the two tallies, so a winner other than x
    # under one vote is either kept or taken over by y under the other.
    candidates = {(w, w) for w in range(m)} | {(x, y)}
    candidates |= {(x, w) for w in range(m) if w not in (x, y)}
    candidates |= {(w, y) for w in range(m) if w not in (x, y)}
    return frozenset(pair for pair in candidates if _pair_feasible(ivs, x, y, *pair, weight))


@lru_cache(maxsize=1 << 16)
def outcome_pairs(ivs: IssueIntervals, x: int, y: int, weight: int = ATOMIC_WEIGHT) -> frozenset[tuple[int, int]]:
    if math.prod(hi - lo + 1 for lo, hi in ivs) <= BRUTE_FORCE_LIMIT:
        return outcome_pairs_bruteforce(ivs, x, y, weight)
    return outcome_pairs_reduced(ivs, x, y, weight)


def possible_winners(s_adjusted: ScoreTuple, vote: Alternative, issue: int, spec: UncertaintySpec,
                     weight: int = ATOMIC_WEIGHT) -> frozenset[int]:
    """W: candidates that can win ``issue`` while the agent keeps ``vote``."""
    ivs = issue_intervals(spec.metric, tuple(s_adjusted[issue]), spec.radii[issue])
    return possible_issue_outcomes(ivs, vote[issue], weight)


def potential_winners(s_adjusted: ScoreTuple, issue: int, spec: UncertaintySpec,
                      weight: int = ATOMIC_WEIGHT) -> frozenset[int]:
    """H: candidates the agent can make win on ``issue`` for some possible vector."""
    ivs = issue_intervals(spec.metric, tuple(s_adjusted[issue]), spec.radii[issue])
    return frozenset(c for c in range(len(ivs)) if c in possible_issue_outcomes(ivs, c, weight))


def real_potential_winners(s_adjusted: ScoreTuple, issue: int) -> frozenset[int]:
    """H_0: candidates that win ``issue`` when one extra vote goes to them."""
    vec = s_adjusted[issue]
    return frozenset(c for c in range(len(vec)) if tally_winner(vec, c) == c)


def agent_possible_winners(votes, j: int, issue: int, spec: UncertaintySpec, domain) -> frozenset[int]:
    return possible_winners(adjusted_score(votes, j, domain), votes[j], issue, spec)


def agent_potential_winners(votes, j: int, issue: int, spec: UncertaintySpec, domain) -> frozenset[int]:
    return potential_winners(adjusted_score(votes, j, domain), issue, spec)
