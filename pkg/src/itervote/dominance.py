"""S-beats, S-dominance, local-dominance improvement steps and best response.

Two prospective votes of one agent differ on a single issue ``i``. Because
the uncertainty set is a product over issues, the outcomes on every other
issue coincide for both votes and range independently over that issue's
possible winners. A vote ``x`` therefore beats ``y`` iff some combination of
possible winners elsewhere, together with some achievable pair of issue-``i``
winners ``(w_x, w_y)`` with ``w_x != w_y``, puts ``x``'s joint outcome above
``y``'s in the agent's ranking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from .domain import (
    Alternative,
    DomainError,
    Ranking,
    ScoreTuple,
    VoteProfile,
    adjusted_score,
    induced_local_preference,
)
from .uncertainty import (
    ATOMIC_WEIGHT,
    UncertaintySet,
    UncertaintySpec,
    build_uncertainty_set,
    outcome_pairs,
    possible_issue_outcomes,
    potential_winners,
    real_potential_winners,
    tally_winner,
)

Contexts = tuple  # per-issue frozensets of possible winners, None at the changing issue


@dataclass(frozen=True)
class StepContext:
    """Everything agent ``agent`` needs to evaluate a change on ``issue``."""

    votes: VoteProfile
    agent: int
    issue: int
    spec: UncertaintySpec
    ranking: Ranking

    def __post_init__(self):
        domain = self.ranking.domain
        if not 0 <= self.agent < len(self.votes):
            raise DomainError(f"agent {self.agent} out of range")
        if not 0 <= self.issue < domain.p:
            raise DomainError(f"issue {self.issue} out of range")
        if len(self.spec.radii) != domain.p:
            raise DomainError(f"spec has {len(self.spec.radii)} radii for p={domain.p}")

    @property
    def domain(self):
        return self.ranking.domain

    @property
    def vote(self) -> Alternative:
        return self.votes[self.agent]

    @cached_property
    def s_adjusted(self) -> ScoreTuple:
        return adjusted_score(self.votes, self.agent, self.domain)

    @cached_property
    def uncertainty_set(self) -> UncertaintySet:
        return build_uncertainty_set(self.s_adjusted, self.spec)

    def prospective(self, candidate: int) -> Alternative:
        vote = list(self.vote)
        vote[self.issue] = candidate
        return tuple(vote)

    def with_spec(self, spec: UncertaintySpec) -> "StepContext":
        return StepContext(self.votes, self.agent, self.issue, spec, self.ranking)


def _changed_issue(x: Sequence[int], y: Sequence[int]) -> Optional[int]:
    diff = [k for k, (a, b) in enumerate(zip(x, y)) if a != b]
    if len(diff) > 1:
        raise DomainError(f"votes {tuple(x)} and {tuple(y)} differ on more than one issue")
    return diff[0] if diff else None


def winner_contexts(uset: UncertaintySet, vote: Sequence[int], issue: int, weight: int = ATOMIC_WEIGHT) -> Contexts:
    return tuple(None if k == issue else possible_issue_outcomes(uset[k], vote[k], weight)
                 for k in range(len(uset)))


def _prefers_somewhere(ranking: Ranking, contexts: Contexts, issue: int, pairs) -> bool:
    pairs = [(wx, wy) for wx, wy in pairs if wx != wy]
    if not pairs:
        return False
    rank = ranking.rank
    choices = [(None,) if k == issue else tuple(ws) for k, ws in enumerate(contexts)]
    for combo in itertools.product(*choices):
        alt = list(combo)
        for wx, wy in pairs:
            alt[issue] = wx
            rx = rank(alt)
            alt[issue] = wy
            if rx < rank(alt):
                return True
    return False


def beats_in(ranking: Ranking, uset: UncertaintySet, x: Sequence[int], y: Sequence[int],
             weight: int = ATOMIC_WEIGHT) -> bool:
    """Whether ``x`` beats ``y`` somewhere in ``uset`` (factored evaluation)."""
    i = _changed_issue(x, y)
    if i is None:
        return False
    contexts = winner_contexts(uset, x, i, weight)
    return _prefers_somewhere(ranking, contexts, i, outcome_pairs(uset[i], x[i], y[i], weight))


def beats_bruteforce(ranking: Ranking, uset: UncertaintySet, x: Sequence[int], y: Sequence[int],
                     weight: int = ATOMIC_WEIGHT) -> bool:
    """Reference implementation: enumerate every score tuple of ``uset``."""
    for v in uset:
        fx = [tally_winner(vec, c, weight) for vec, c in zip(v, x)]
        fy = [tally_winner(vec, c, weight) for vec, c in zip(v, y)]
        if ranking.rank(fx) < ranking.rank(fy):
            return True
    return False


def s_beats(ctx: StepContext, x: Sequence[int], y: Sequence[int]) -> bool:
    return beats_in(ctx.ranking, ctx.uncertainty_set, x, y)


def s_dominates(ctx: StepContext, x: Sequence[int], y: Sequence[int]) -> bool:
    return s_beats(ctx, x, y) and not s_beats(ctx, y, x)


def local_dominance_targets(ranking: Ranking, contexts: Contexts, ivs, current: int, issue: int,
                            weight: int = ATOMIC_WEIGHT) -> frozenset[int]:
    """Candidates ``c`` on ``issue`` whose vote is an LDI step away from ``current``."""
    m = len(ivs)
    memo: dict[tuple[int, int], bool] = {}

    def beats(c, d):
        key = (c, d)
        if key not in memo:
            memo[key] = _prefers_somewhere(ranking, contexts, issue, outcome_pairs(ivs, c, d, weight))
        return memo[key]

    def dominates(c, d):
        return beats(c, d) and not beats(d, c)

    improving = [c for c in range(m) if c != current and dominates(c, current)]
    return frozenset(c for c in improving
                     if not any(dominates(d, c) for d in range(m) if d != c and d != current))


def ldi_targets_at(ranking: Ranking, s_adjusted: ScoreTuple, vote: Sequence[int], issue: int,
                   spec: UncertaintySpec) -> frozenset[int]:
    """LDI target candidates computed straight from an adjusted score tuple.

    Useful when the tuple is given directly rather than derived from votes.
    """
    uset = build_uncertainty_set(s_adjusted, spec)
    contexts = winner_contexts(uset, vote, issue)
    return local_dominance_targets(ranking, contexts, uset[issue], vote[issue], issue)


def ldi_steps(ctx: StepContext) -> frozenset[Alternative]:
    """All votes one LDI step away from the agent's current vote on ``ctx.issue``."""
    targets = ldi_targets_at(ctx.ranking, ctx.s_adjusted, ctx.vote, ctx.issue, ctx.spec)
    return frozenset(ctx.prospective(c) for c in targets)


def best_response_candidate(ranking: Ranking, s_adjusted: ScoreTuple, vote: Sequence[int], issue: int) -> int:
    """Best candidate on ``issue`` given exact knowledge of the other votes.

    Keeps the current candidate whenever it already achieves the best
    outcome; otherwise the smallest candidate index achieving it.
    """
    outcome = [tally_winner(vec, c) for vec, c in zip(s_adjusted, vote)]
    current = vote[issue]
    best_c, best_rank = current, ranking.rank(outcome)
    for c in range(ranking.domain.sizes[issue]):
        outcome[issue] = tally_winner(s_adjusted[issue], c)
        r = ranking.rank(outcome)
        if r < best_rank:
            best_c, best_rank = c, r
    return best_c


def best_response(ctx: StepContext) -> Alternative:
    return ctx.prospective(best_response_candidate(ctx.ranking, ctx.s_adjusted, ctx.vote, ctx.issue))


@dataclass(frozen=True)
class ContainmentReport:
    lq: frozenset
    ld: frozenset
    lq_hat: frozenset

    @property
    def lower_holds(self) -> bool:
        return self.lq <= self.ld

    @property
    def upper_holds(self) -> bool:
        return self.ld <= self.lq_hat

    @property
    def holds(self) -> bool:
        return self.lower_holds and self.upper_holds


def containment_check(ctx: StepContext, ctx_q: StepContext, ctx_q_hat: StepContext) -> ContainmentReport:
    """Compare LDI step sets when uncertainty grows off-issue (``ctx_q``) or on-issue (``ctx_q_hat``)."""
    if not ctx.domain.is_binary:
        raise NotImplementedError("step-set containment is only defined for binary issues")
    for other in (ctx_q, ctx_q_hat):
        if (other.votes, other.agent, other.issue, other.ranking) != (ctx.votes, ctx.agent, ctx.issue, ctx.ranking):
            raise DomainError("containment contexts must share profile, agent, issue and ranking")
        if other.spec.metric != ctx.spec.metric:
            raise DomainError("containment contexts must share the metric")
    r, q, qh = ctx.spec.radii, ctx_q.spec.radii, ctx_q_hat.spec.radii
    i = ctx.issue
    if q[i] != r[i] or any(q[k] < r[k] for k in range(len(r))) or sum(q[k] != r[k] for k in range(len(r))) > 1:
        raise DomainError("ctx_q must raise the radius of a single issue other than the changing one")
    if any(qh[k] != r[k] for k in range(len(r)) if k != i) or qh[i] < r[i]:
        raise DomainError("ctx_q_hat must raise only the radius of the changing issue")
    return ContainmentReport(ldi_steps(ctx_q), ldi_steps(ctx), ldi_steps(ctx_q_hat))


def strategic_response_case(ctx: StepContext, target: int) -> Optional[int]:
    """Which alternative of the strategic-response characterisation an LDI step meets.

    Returns 1 when the current candidate is not a potential winner, 2 or 3
    when every combination of possible winners on the other issues satisfies
    that case (3 if any combination needs it), and ``None`` if neither holds.
    """
    i = ctx.issue
    current = ctx.vote[i]
    h = potential_winners(ctx.s_adjusted, i, ctx.spec)
    if current not in h:
        return 1
    h0 = real_potential_winners(ctx.s_adjusted, i)
    contexts = winner_contexts(ctx.uncertainty_set, ctx.vote, i)
    choices = [(0,) if k == i else tuple(ws) for k, ws in enumerate(contexts)]
    used_third = False
    for combo in itertools.product(*choices):
        local = induced_local_preference(ctx.ranking, i, combo)
        pos = {c: n for n, c in enumerate(local)}
        if all(pos[current] > pos[b] for b in h if b != current):
            continue
        if ctx.spec.radii[i] == 0 and {current, target} <= h0 and pos[target] < pos[current]:
            used_third = True
            continue
        return None
    return 3 if used_third else 2
