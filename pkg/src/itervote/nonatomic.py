"""Nonatomic iterative voting: ε-mass sets of identical agents.

Scores are multiples of ``epsilon``. A set's uncertainty is centred on the
real score tuple (its own mass is negligible) and its vote only decides
exact ties among maximal candidates. Uncertainty radii are given in mass
units and evaluated on the ε grid, so internally everything runs on integer
counts of sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .domain import Alternative, DomainError, IssueDomain, PreferenceProfile, Ranking, score
from .dynamics import (
    DEFAULT_CAP,
    AlternatingUncertainty,
    Dynamics,
    FixedUncertainty,
    RoundRobinScheduler,
    RunResult,
    Scheduler,
    SchedulerError,
    Step,
    StepEnumerator,
    iterate,
)
from .uncertainty import TIE_BREAK_WEIGHT, Metric, UncertaintySpec

RationalScores = tuple[tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class MassSpec:
    """Uncertainty radii measured in population mass."""

    metric: Metric
    radii: tuple[Fraction, ...]

    def __post_init__(self):
        radii = tuple(Fraction(r) for r in self.radii)
        if any(r < 0 for r in radii):
            raise DomainError(f"uncertainty radii must be non-negative, got {radii}")
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "radii", radii)

    def in_units(self, epsilon: Fraction) -> UncertaintySpec:
        """The same uncertainty on the grid of multiples of ``epsilon``."""
        return UncertaintySpec(self.metric, tuple(_unit_radius(self.metric, r, epsilon) for r in self.radii))


@dataclass(frozen=True)
class MassSet:
    ranking: Ranking
    spec: MassSpec
    vote: Alternative


def _unit_radius(metric: Metric, radius, epsilon: Fraction):
    if metric is Metric.LINF:
        return math.floor(Fraction(radius) / epsilon)
    return Fraction(radius)


@dataclass(frozen=True)
class MassProfile:
    domain: IssueDomain
    epsilon: Fraction
    sets: tuple[MassSet, ...]

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        if eps <= 0 or eps.numerator != 1:
            raise DomainError(f"epsilon must be 1/k for a positive integer k, got {eps}")
        sets = tuple(self.sets)
        if len(sets) * eps != 1:
            raise DomainError(f"{len(sets)} sets of mass {eps} do not add up to 1")
        for m in sets:
            if m.ranking.domain != self.domain:
                raise DomainError("every set must rank the profile's domain")
            self.domain.check(m.vote)
            if len(m.spec.radii) != self.domain.p:
                raise DomainError(f"spec {m.spec} does not have {self.domain.p} radii")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "sets", sets)

    @classmethod
    def from_preferences(cls, preferences: PreferenceProfile, radii: Sequence, metric: Metric = Metric.LINF,
                         votes: Optional[Sequence[Alternative]] = None) -> "MassProfile":
        """One set of mass 1/n per agent, all sharing ``radii`` (mass units)."""
        n = preferences.n
        votes = preferences.truthful() if votes is None else tuple(tuple(v) for v in votes)
        spec = MassSpec(metric, radii)
        return cls(preferences.domain, Fraction(1, n),
                   tuple(MassSet(r, spec, v) for r, v in zip(preferences.rankings, votes)))

    @property
    def votes(self) -> tuple[Alternative, ...]:
        return tuple(m.vote for m in self.sets)

    def counts(self):
        return score(self.votes, self.domain)

    def scores(self) -> RationalScores:
        return tuple(tuple(c * self.epsilon for c in vec) for vec in self.counts())

    def unit_spec(self, j: int) -> UncertaintySpec:
        return self.sets[j].spec.in_units(self.epsilon)

    def with_votes(self, votes: Sequence[Alternative]) -> "MassProfile":
        return MassProfile(self.domain, self.epsilon,
                           tuple(MassSet(m.ranking, m.spec, tuple(v)) for m, v in zip(self.sets, votes)))


def nonatomic_outcome(s: RationalScores, vote: Sequence[int]) -> Alternative:
    """Plurality outcome where ``vote`` only decides ties among the maximal candidates."""
    out = []
    for vec, c in zip(s, vote):
        top = max(vec)
        tied = [d for d, v in enumerate(vec) if v == top]
        out.append(c if c in tied else tied[0])
    return tuple(out)


def _unit_uncertainty(profile: MassProfile, alternating: Optional[AlternatingUncertainty]):
    if alternating is None:
        return FixedUncertainty(tuple(profile.unit_spec(j) for j in range(len(profile.sets))))
    eps = profile.epsilon
    bounds = tuple((_unit_radius(alternating.metric, rc, eps), _unit_radius(alternating.metric, ro, eps))
                   for rc, ro in alternating.bounds)
    if len(bounds) != len(profile.sets):
        raise DomainError(f"{len(bounds)} alternating bounds for {len(profile.sets)} sets")
    # raises if the ε grid collapses rc and ro
    return AlternatingUncertainty(alternating.metric, bounds)


def _enumerator(profile: MassProfile, alternating: Optional[AlternatingUncertainty] = None) -> StepEnumerator:
    rankings = tuple(m.ranking for m in profile.sets)
    prefs = PreferenceProfile(profile.domain, rankings)
    return StepEnumerator(prefs, Dynamics.LDI, _unit_uncertainty(profile, alternating),
                          centered_on_real=True, weight=TIE_BREAK_WEIGHT)


def nonatomic_ldi_steps(profile: MassProfile, j: int, issue: int,
                        alternating: Optional[AlternatingUncertainty] = None) -> frozenset[int]:
    """Target candidates of set ``j``'s LDI steps on ``issue``."""
    if not 0 <= j < len(profile.sets):
        raise DomainError(f"set {j} out of range")
    if not 0 <= issue < profile.domain.p:
        raise DomainError(f"issue {issue} out of range")
    return _enumerator(profile, alternating).targets(profile.votes, j, issue)


def nonatomic_steps(profile: MassProfile, alternating: Optional[AlternatingUncertainty] = None) -> list[Step]:
    return list(_enumerator(profile, alternating).steps(profile.votes))


@dataclass(frozen=True)
class NonatomicStep:
    """Sets ``sets`` (all identical to set ``j``) move to ``target`` on ``issue``."""

    j: int
    issue: int
    target: int
    sets: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.sets)


def identical_sets(profile: MassProfile, j: int) -> tuple[int, ...]:
    """Sets sharing set ``j``'s ranking, uncertainty and current vote."""
    m = profile.sets[j]
    return tuple(k for k, o in enumerate(profile.sets) if (o.ranking, o.spec, o.vote) == (m.ranking, m.spec, m.vote))


def apply_nonatomic_step(profile: MassProfile, step: NonatomicStep,
                         alternating: Optional[AlternatingUncertainty] = None) -> MassProfile:
    """Validate and apply one (possibly batched) step."""
    if step.j not in step.sets:
        raise SchedulerError(f"batch {step.sets} does not include its representative set {step.j}")
    same = set(identical_sets(profile, step.j))
    if not set(step.sets) <= same:
        raise SchedulerError(f"batch {step.sets} mixes sets that are not identical to set {step.j}")
    if step.target not in nonatomic_ldi_steps(profile, step.j, step.issue, alternating):
        raise SchedulerError(f"{step.target} is not an improvement step for set {step.j} on issue {step.issue}")
    votes = list(profile.votes)
    for k in step.sets:
        vote = list(votes[k])
        vote[step.issue] = step.target
        votes[k] = tuple(vote)
    return profile.with_votes(votes)


def nonatomic_run(profile: MassProfile, *, scheduler: Optional[Scheduler] = None,
                  alternating: Optional[AlternatingUncertainty] = None, batch: bool = True,
                  cap: int = DEFAULT_CAP, record: bool = True) -> RunResult:
    """LDI dynamics over mass sets.

    With ``batch`` every set identical to the scheduled one (same ranking,
    uncertainty and vote) takes the same step in the same round.
    """
    enumerator = _enumerator(profile, alternating)
    unc = enumerator.uncertainty
    p = profile.domain.p
    keys = [(m.ranking, tuple(unc.spec_for(j, i, p) for i in range(p))) for j, m in enumerate(profile.sets)]

    def movers(step: Step, votes):
        if not batch:
            return (step.agent,)
        key, vote = keys[step.agent], votes[step.agent]
        return tuple(j for j in range(len(votes)) if keys[j] == key and votes[j] == vote)

    return iterate(enumerator, profile.votes, scheduler or RoundRobinScheduler(), cap, record,
                   movers=movers, mass=profile.epsilon)
