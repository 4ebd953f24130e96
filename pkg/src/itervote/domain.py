"""Issues, alternatives, rankings and the simultaneous plurality rule.

Alternatives are plain tuples of per-issue candidate indices, vote profiles
are tuples of alternatives and score tuples are tuples of per-issue score
vectors. Candidates are indexed ``0..|D_i|-1``; ties are broken in favour of
the smaller index on every issue independently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

Alternative = tuple[int, ...]
VoteProfile = tuple[Alternative, ...]
ScoreTuple = tuple[tuple[int, ...], ...]

#: Largest joint domain we are willing to materialise a ranking over.
MAX_ALTERNATIVES = 1 << 20


class DomainError(ValueError):
    """An index, candidate or parameter lies outside its valid range."""


@dataclass(frozen=True)
class IssueDomain:
    """Per-issue candidate counts of a multi-issue election."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise DomainError("an election needs at least one issue")
        if any(s < 2 for s in sizes):
            raise DomainError(f"every issue needs at least two candidates, got {sizes}")
        if math.prod(sizes) > MAX_ALTERNATIVES:
            raise DomainError(f"joint domain of {sizes} exceeds {MAX_ALTERNATIVES} alternatives")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def binary(cls, p: int) -> "IssueDomain":
        return cls((2,) * p)

    @property
    def p(self) -> int:
        return len(self.sizes)

    @property
    def size(self) -> int:
        """Number of joint alternatives."""
        return math.prod(self.sizes)

    @property
    def is_binary(self) -> bool:
        return all(s == 2 for s in self.sizes)

    def check(self, alt: Sequence[int]) -> Alternative:
        alt = tuple(int(c) for c in alt)
        if len(alt) != self.p:
            raise DomainError(f"alternative {alt} has {len(alt)} entries, expected {self.p}")
        for c, s in zip(alt, self.sizes):
            if not 0 <= c < s:
                raise DomainError(f"candidate {c} out of range in {alt} for sizes {self.sizes}")
        return alt

    def index(self, alt: Sequence[int]) -> int:
        """Mixed-radix index of ``alt``; issue 0 is the most significant digit."""
        idx = 0
        for c, s in zip(alt, self.sizes):
            if not 0 <= c < s:
                raise DomainError(f"candidate {c} out of range in {tuple(alt)}")
            idx = idx * s + c
        if len(alt) != self.p:
            raise DomainError(f"alternative {tuple(alt)} has wrong length for p={self.p}")
        return idx

    def alternative(self, index: int) -> Alternative:
        if not 0 <= index < self.size:
            raise DomainError(f"alternative index {index} outside [0, {self.size})")
        digits = []
        for s in reversed(self.sizes):
            index, c = divmod(index, s)
            digits.append(c)
        return tuple(reversed(digits))

    def alternatives(self) -> Iterator[Alternative]:
        """All alternatives in index order."""
        return itertools.product(*(range(s) for s in self.sizes))


def alternative_index(alt: Sequence[int], domain: IssueDomain) -> int:
    return domain.index(alt)


@dataclass(frozen=True)
class Ranking:
    """A strict linear order over every alternative of ``domain``.

    ``order`` lists alternative indices from most to least preferred and
    ``rank_of`` is its inverse (position 0 is the top).
    """

    domain: IssueDomain
    order: tuple[int, ...]
    rank_of: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        order = tuple(int(x) for x in self.order)
        if sorted(order) != list(range(self.domain.size)):
            raise DomainError(f"ranking is not a permutation of the {self.domain.size} alternatives")
        rank_of = [0] * len(order)
        for pos, idx in enumerate(order):
            rank_of[idx] = pos
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "rank_of", tuple(rank_of))

    @classmethod
    def from_alternatives(cls, domain: IssueDomain, alternatives: Iterable[Sequence[int]]) -> "Ranking":
        return cls(domain, tuple(domain.index(domain.check(a)) for a in alternatives))

    def rank(self, alt: Sequence[int]) -> int:
        return self.rank_of[self.domain.index(alt)]

    def prefers(self, x: Sequence[int], y: Sequence[int]) -> bool:
        """True iff ``x`` is strictly preferred to ``y``."""
        return self.rank(x) < self.rank(y)

    @property
    def top(self) -> Alternative:
        return self.domain.alternative(self.order[0])

    def alternatives(self) -> list[Alternative]:
        return [self.domain.alternative(i) for i in self.order]


@dataclass(frozen=True)
class PreferenceProfile:
    domain: IssueDomain
    rankings: tuple[Ranking, ...]

    def __post_init__(self):
        rankings = tuple(self.rankings)
        if not rankings:
            raise DomainError("a preference profile needs at least one agent")
        for r in rankings:
            if r.domain != self.domain:
                raise DomainError("all rankings must share the profile's domain")
        object.__setattr__(self, "rankings", rankings)

    @property
    def n(self) -> int:
        return len(self.rankings)

    def truthful(self) -> VoteProfile:
        """Every agent votes for their most preferred alternative."""
        return tuple(r.top for r in self.rankings)


@dataclass(frozen=True)
class IssueOrder:
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(o) for o in self.order)
        if sorted(order) != list(range(len(order))):
            raise DomainError(f"{order} is not a permutation of the issues")
        object.__setattr__(self, "order", order)

    def check(self, domain: IssueDomain) -> None:
        if len(self.order) != domain.p:
            raise DomainError(f"issue order {self.order} does not match p={domain.p}")


def check_votes(domain: IssueDomain, votes: Iterable[Sequence[int]]) -> VoteProfile:
    votes = tuple(domain.check(v) for v in votes)
    if not votes:
        raise DomainError("a vote profile needs at least one vote")
    return votes


def issue_winner(scores: Sequence[int]) -> int:
    """Plurality winner of one issue; ties go to the smallest index."""
    best = 0
    top = scores[0]
    for c in range(1, len(scores)):
        if scores[c] > top:
            best, top = c, scores[c]
    return best


def plurality_outcome(s: ScoreTuple) -> Alternative:
    return tuple(issue_winner(v) for v in s)


def score(votes: Iterable[Sequence[int]], domain: IssueDomain) -> ScoreTuple:
    counts = [[0] * size for size in domain.sizes]
    for vote in votes:
        for i, c in enumerate(vote):
            counts[i][c] += 1
    return tuple(tuple(v) for v in counts)


def remove_vote(s: ScoreTuple, vote: Sequence[int]) -> ScoreTuple:
    out = []
    for v, c in zip(s, vote):
        if v[c] <= 0:
            raise DomainError(f"cannot remove vote {tuple(vote)} from score tuple {s}")
        out.append(v[:c] + (v[c] - 1,) + v[c + 1:])
    return tuple(out)


def add_vote(s: ScoreTuple, vote: Sequence[int]) -> ScoreTuple:
    return tuple(v[:c] + (v[c] + 1,) + v[c + 1:] for v, c in zip(s, vote))


def adjusted_score(votes: Sequence[Sequence[int]], j: int, domain: IssueDomain) -> ScoreTuple:
    """Score tuple of ``votes`` with agent ``j`` removed."""
    if not 0 <= j < len(votes):
        raise DomainError(f"agent {j} out of range for {len(votes)} votes")
    return remove_vote(score(votes, domain), votes[j])


def outcome_with_vote(s_without: ScoreTuple, vote: Sequence[int]) -> Alternative:
    return plurality_outcome(add_vote(s_without, vote))


def induced_local_preference(ranking: Ranking, issue: int, context: Sequence[int]) -> tuple[int, ...]:
    """Order over the candidates of ``issue`` with every other issue fixed by ``context``.

    ``context[issue]`` is ignored.
    """
    domain = ranking.domain
    alt = list(context)
    keyed = []
    for c in range(domain.sizes[issue]):
        alt[issue] = c
        keyed.append((ranking.rank(alt), c))
    return tuple(c for _, c in sorted(keyed))


def _contexts(domain: IssueDomain, issue: int) -> Iterator[Alternative]:
    ranges = [range(s) if k != issue else range(1) for k, s in enumerate(domain.sizes)]
    return itertools.product(*ranges)


def is_O_legal(ranking: Ranking, order: IssueOrder) -> bool:
    """Whether each issue's local order depends only on issues earlier in ``order``."""
    domain = ranking.domain
    order.check(domain)
    for pos, issue in enumerate(order.order):
        earlier = order.order[:pos]
        seen: dict[tuple[int, ...], tuple[int, ...]] = {}
        for ctx in _contexts(domain, issue):
            key = tuple(ctx[k] for k in earlier)
            pref = induced_local_preference(ranking, issue, ctx)
            if seen.setdefault(key, pref) != pref:
                return False
    return True


def is_separable(ranking: Ranking) -> bool:
    domain = ranking.domain
    for issue in range(domain.p):
        prefs = {induced_local_preference(ranking, issue, ctx) for ctx in _contexts(domain, issue)}
        if len(prefs) > 1:
            return False
    return True
