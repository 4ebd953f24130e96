"""Iterative improvement dynamics: step enumeration, schedulers and runs."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Optional, Sequence, Union

from .domain import (
    Alternative,
    DomainError,
    PreferenceProfile,
    VoteProfile,
    check_votes,
    issue_winner,
    plurality_outcome,
    remove_vote,
    score,
)
from .dominance import (
    StepContext,
    best_response,
    best_response_candidate,
    ldi_steps,
    local_dominance_targets,
)
from .uncertainty import (
    ATOMIC_WEIGHT,
    Metric,
    Radius,
    UncertaintySpec,
    issue_intervals,
    possible_issue_outcomes,
)

DEFAULT_CAP = 50_000


class Dynamics(str, enum.Enum):
    BR = "br"
    LDI = "ldi"


class Terminal(str, enum.Enum):
    EQUILIBRIUM = "equilibrium"
    CYCLE = "cycle"
    CAP = "cap"


class SchedulerError(RuntimeError):
    pass


class Step(NamedTuple):
    agent: int
    issue: int
    target: int


@dataclass(frozen=True)
class FixedUncertainty:
    """Every agent keeps the same radii whatever issue they are changing."""

    specs: tuple[UncertaintySpec, ...]

    @classmethod
    def uniform(cls, n: int, p: int, radius: Radius = 0, metric: Metric = Metric.LINF) -> "FixedUncertainty":
        return cls((UncertaintySpec.uniform(p, radius, metric),) * n)

    @classmethod
    def shared(cls, n: int, spec: UncertaintySpec) -> "FixedUncertainty":
        return cls((spec,) * n)

    def spec_for(self, agent: int, issue: int, p: int) -> UncertaintySpec:
        return self.specs[agent]

    def check(self, n: int, p: int) -> None:
        if len(self.specs) != n:
            raise DomainError(f"{len(self.specs)} uncertainty specs for {n} agents")
        for spec in self.specs:
            if len(spec.radii) != p:
                raise DomainError(f"spec {spec} does not have {p} radii")


@dataclass(frozen=True)
class AlternatingUncertainty:
    """Radius ``rc`` on the issue being changed and ``ro > rc`` on every other issue."""

    metric: Metric
    bounds: tuple[tuple[Radius, Radius], ...]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric(self.metric))
        bounds = tuple((rc, ro) for rc, ro in self.bounds)
        for rc, ro in bounds:
            if not rc < ro:
                raise DomainError(f"alternating uncertainty needs rc < ro, got ({rc}, {ro})")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def uniform(cls, n: int, rc: Radius, ro: Radius, metric: Metric = Metric.LINF) -> "AlternatingUncertainty":
        return cls(metric, ((rc, ro),) * n)

    def spec_for(self, agent: int, issue: int, p: int) -> UncertaintySpec:
        key = (agent, issue, p)
        spec = self._cache.get(key)
        if spec is None:
            rc, ro = self.bounds[agent]
            spec = UncertaintySpec(self.metric, tuple(rc if k == issue else ro for k in range(p)))
            self._cache[key] = spec
        return spec

    def check(self, n: int, p: int) -> None:
        if len(self.bounds) != n:
            raise DomainError(f"{len(self.bounds)} alternating bounds for {n} agents")


UncertaintyMode = Union[FixedUncertainty, AlternatingUncertainty]


class StepEnumerator:
    """Lists every valid improvement step of a vote profile.

    Results are memoised per profile and, per agent, per local situation
    (possible winners elsewhere plus the changing issue's intervals), which
    keeps long random walks through a small set of profiles cheap.

    ``centered_on_real`` builds uncertainty around the full score tuple
    instead of removing the agent's own vote, and ``weight`` selects how the
    agent's vote enters the tally; the nonatomic model uses both.
    """

    def __init__(self, preferences: PreferenceProfile, dynamics: Dynamics = Dynamics.LDI,
                 uncertainty: Optional[UncertaintyMode] = None, *, centered_on_real: bool = False,
                 weight: int = ATOMIC_WEIGHT, rankings: Optional[Sequence] = None):
        self.domain = preferences.domain
        self.rankings = tuple(rankings) if rankings is not None else preferences.rankings
        self.dynamics = Dynamics(dynamics)
        n, p = len(self.rankings), self.domain.p
        if uncertainty is None:
            uncertainty = FixedUncertainty.uniform(n, p, 0)
        uncertainty.check(n, p)
        self.uncertainty = uncertainty
        self.centered_on_real = centered_on_real
        self.weight = weight
        self._profiles: dict[VoteProfile, tuple[Step, ...]] = {}
        self._local: list[dict] = [{} for _ in range(n)]

    def steps(self, votes: VoteProfile) -> tuple[Step, ...]:
        cached = self._profiles.get(votes)
        if cached is not None:
            return cached
        s = score(votes, self.domain)
        out = []
        for j, vote in enumerate(votes):
            s_j = s if self.centered_on_real else remove_vote(s, vote)
            for i in range(self.domain.p):
                for c in sorted(self._targets(j, s_j, vote, i)):
                    out.append(Step(j, i, c))
        result = tuple(out)
        self._profiles[votes] = result
        return result

    def targets(self, votes: VoteProfile, agent: int, issue: int) -> frozenset[int]:
        s = score(votes, self.domain)
        s_j = s if self.centered_on_real else remove_vote(s, votes[agent])
        return self._targets(agent, s_j, votes[agent], issue)

    def _targets(self, j: int, s_j, vote: Alternative, i: int) -> frozenset[int]:
        ranking = self.rankings[j]
        if self.dynamics is Dynamics.BR:
            best = best_response_candidate(ranking, s_j, vote, i)
            return frozenset() if best == vote[i] else frozenset((best,))
        p = self.domain.p
        spec = self.uncertainty.spec_for(j, i, p)
        metric, radii, w = spec.metric, spec.radii, self.weight
        ivs_i = issue_intervals(metric, s_j[i], radii[i])
        contexts = tuple(None if k == i else possible_issue_outcomes(issue_intervals(metric, s_j[k], radii[k]), vote[k], w)
                         for k in range(p))
        key = (i, vote[i], contexts, ivs_i)
        memo = self._local[j]
        found = memo.get(key)
        if found is None:
            found = local_dominance_targets(ranking, contexts, ivs_i, vote[i], i, w)
            memo[key] = found
        return found


def enumerate_steps(preferences: PreferenceProfile, votes: Iterable[Sequence[int]],
                    dynamics: Dynamics = Dynamics.LDI, uncertainty: Optional[UncertaintyMode] = None) -> list[Step]:
    votes = check_votes(preferences.domain, votes)
    return list(StepEnumerator(preferences, dynamics, uncertainty).steps(votes))


class Scheduler:
    """Picks one step among the available ones each round."""

    deterministic = True

    def reset(self, n: int, p: int) -> None:
        pass

    def state(self):
        return None

    def choose(self, steps: Sequence[Step], round_: int) -> Step:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


class ScriptedScheduler(Scheduler):
    """Replays a fixed list of steps, wrapping around at the end."""

    def __init__(self, script: Iterable[Sequence[int]]):
        self.script = [Step(*map(int, s)) for s in script]
        if not self.script:
            raise DomainError("a scripted schedule needs at least one step")
        self.pos = 0

    def reset(self, n, p):
        self.pos = 0

    def state(self):
        return self.pos % len(self.script)

    def choose(self, steps, round_):
        step = self.script[self.pos % len(self.script)]
        if step not in steps:
            raise SchedulerError(f"scripted step {tuple(step)} is not a valid improvement step at round {round_}")
        self.pos += 1
        return step

    def describe(self):
        return {"kind": "scripted", "script": [list(s) for s in self.script]}


class RoundRobinScheduler(Scheduler):
    """Cycles over (agent, issue) pairs; the smallest target wins within a pair."""

    def __init__(self):
        self.pointer = 0
        self.p = 1

    def reset(self, n, p):
        self.pointer = 0
        self.p = p

    def state(self):
        return self.pointer

    def choose(self, steps, round_):
        keyed = [(s.agent * self.p + s.issue, s) for s in steps]
        after = [ks for ks in keyed if ks[0] >= self.pointer]
        key, step = min(after or keyed)
        self.pointer = key + 1
        return step

    def describe(self):
        return {"kind": "roundrobin"}


class UniformRandomScheduler(Scheduler):
    """Uniform draw over every available (agent, issue, target) step."""

    deterministic = False

    def __init__(self, seed: int):
        self.seed = seed
        self.rng = random.Random(seed)

    def reset(self, n, p):
        self.rng = random.Random(self.seed)

    def choose(self, steps, round_):
        return steps[self.rng.randrange(len(steps))]

    def describe(self):
        return {"kind": "random", "seed": self.seed}


@dataclass(frozen=True)
class StepRecord:
    round: int
    agent: int
    issue: int
    from_: int
    to: int
    outcome_after: Alternative
    count: int = 1
    mass: Optional[Fraction] = None

    def to_json(self) -> dict:
        doc = {"round": self.round, "agent": self.agent, "issue": self.issue,
               "from": self.from_, "to": self.to, "outcome_after": list(self.outcome_after)}
        if self.mass is not None:
            doc["count"] = self.count
            doc["mass"] = str(self.mass)
        return doc


@dataclass
class RunResult:
    terminal: Terminal
    rounds: int
    trace: list[StepRecord]
    initial_votes: VoteProfile
    final_votes: VoteProfile
    initial_outcome: Alternative
    final_outcome: Alternative
    period: Optional[int] = None
    cycle_entry: Optional[int] = None

    @property
    def converged(self) -> bool:
        return self.terminal is Terminal.EQUILIBRIUM

    def summary(self) -> dict:
        doc = {"terminal": self.terminal.value, "rounds": self.rounds,
               "initial_outcome": list(self.initial_outcome), "final_outcome": list(self.final_outcome)}
        if self.terminal is Terminal.CYCLE:
            doc["period"] = self.period
            doc["entry"] = self.cycle_entry
        return doc


def detect_cycle(history: Sequence) -> Optional[tuple[int, int]]:
    """``(entry, period)`` of the first revisited state in ``history``, if any."""
    seen: dict = {}
    for t, state in enumerate(history):
        if state in seen:
            return seen[state], t - seen[state]
        seen[state] = t
    return None


def iterate(enumerator: StepEnumerator, votes: VoteProfile, scheduler: Scheduler, cap: int = DEFAULT_CAP,
            record: bool = True, movers: Optional[Callable[[Step, VoteProfile], Sequence[int]]] = None,
            mass: Optional[Fraction] = None) -> RunResult:
    """Apply scheduled steps until equilibrium, an exact recurrence, or ``cap`` steps.

    ``movers`` maps a chosen step to the agents that take it together
    (default: only the chosen agent).
    """
    if cap < 1:
        raise DomainError("the round cap must be at least 1")
    domain = enumerator.domain
    n, p = len(votes), domain.p
    scheduler.reset(n, p)
    initial = votes
    counts = [list(v) for v in score(votes, domain)]
    current = list(votes)
    trace: list[StepRecord] = []
    seen: dict = {}
    detect = scheduler.deterministic
    terminal, period, entry = Terminal.CAP, None, None
    rnd = 0
    while True:
        steps = enumerator.steps(votes)
        if not steps:
            terminal = Terminal.EQUILIBRIUM
            break
        if detect:
            key = (votes, scheduler.state())
            if key in seen:
                terminal, entry = Terminal.CYCLE, seen[key]
                period = rnd - entry
                break
            seen[key] = rnd
        if rnd >= cap:
            break
        step = scheduler.choose(steps, rnd)
        agents = movers(step, votes) if movers is not None else (step.agent,)
        old = votes[step.agent][step.issue]
        col = counts[step.issue]
        for a in agents:
            vote = list(current[a])
            if vote[step.issue] != old:
                raise SchedulerError(f"agent {a} cannot join step {tuple(step)} at round {rnd}")
            vote[step.issue] = step.target
            current[a] = tuple(vote)
            col[old] -= 1
            col[step.target] += 1
        votes = tuple(current)
        if record:
            outcome = tuple(issue_winner(v) for v in counts)
            trace.append(StepRecord(rnd, step.agent, step.issue, old, step.target, outcome,
                                    len(agents), None if mass is None else mass * len(agents)))
        rnd += 1
    return RunResult(terminal, rnd, trace, initial, votes,
                     plurality_outcome(score(initial, domain)), plurality_outcome(score(votes, domain)),
                     period, entry)


def run(preferences: PreferenceProfile, initial: Optional[Iterable[Sequence[int]]] = None, *,
        dynamics: Dynamics = Dynamics.LDI, uncertainty: Optional[UncertaintyMode] = None,
        scheduler: Optional[Scheduler] = None, cap: int = DEFAULT_CAP, record: bool = True) -> RunResult:
    """Run BR or LDI dynamics from ``initial`` (truthful votes by default)."""
    votes = preferences.truthful() if initial is None else check_votes(preferences.domain, initial)
    if len(votes) != preferences.n:
        raise DomainError(f"{len(votes)} votes for {preferences.n} agents")
    enumerator = StepEnumerator(preferences, dynamics, uncertainty)
    return iterate(enumerator, votes, scheduler or RoundRobinScheduler(), cap, record)


def step_is_valid(preferences: PreferenceProfile, votes: VoteProfile, step: Step, dynamics: Dynamics,
                  uncertainty: Optional[UncertaintyMode] = None) -> bool:
    """Check one step from first principles, bypassing the enumerator's caches."""
    n, p = preferences.n, preferences.domain.p
    uncertainty = uncertainty or FixedUncertainty.uniform(n, p, 0)
    spec = uncertainty.spec_for(step.agent, step.issue, p)
    ctx = StepContext(votes, step.agent, step.issue, spec, preferences.rankings[step.agent])
    target = ctx.prospective(step.target)
    if Dynamics(dynamics) is Dynamics.BR:
        return target != ctx.vote and best_response(ctx) == target
    return target in ldi_steps(ctx)


def is_equilibrium(preferences: PreferenceProfile, votes: VoteProfile, dynamics: Dynamics = Dynamics.LDI,
                   uncertainty: Optional[UncertaintyMode] = None) -> bool:
    n, p = preferences.n, preferences.domain.p
    uncertainty = uncertainty or FixedUncertainty.uniform(n, p, 0)
    for j in range(n):
        for i in range(p):
            ctx = StepContext(votes, j, i, uncertainty.spec_for(j, i, p), preferences.rankings[j])
            if Dynamics(dynamics) is Dynamics.BR:
                if best_response(ctx) != ctx.vote:
                    return False
            elif ldi_steps(ctx):
                return False
    return True


def replay_audit(preferences: PreferenceProfile, result: RunResult, dynamics: Dynamics = Dynamics.LDI,
                 uncertainty: Optional[UncertaintyMode] = None) -> list[str]:
    """Re-derive every traced step; returns a description of each invalid one."""
    problems = []
    votes = list(result.initial_votes)
    for rec in result.trace:
        step = Step(rec.agent, rec.issue, rec.to)
        if votes[rec.agent][rec.issue] != rec.from_:
            problems.append(f"round {rec.round}: agent {rec.agent} was not voting {rec.from_}")
        elif not step_is_valid(preferences, tuple(votes), step, dynamics, uncertainty):
            problems.append(f"round {rec.round}: {tuple(step)} is not a valid step")
        vote = list(votes[rec.agent])
        vote[rec.issue] = rec.to
        votes[rec.agent] = tuple(vote)
        if plurality_outcome(score(votes, preferences.domain)) != tuple(rec.outcome_after):
            problems.append(f"round {rec.round}: recorded outcome {rec.outcome_after} is wrong")
    if tuple(votes) != result.final_votes:
        problems.append("trace does not end at the reported final profile")
    return problems
