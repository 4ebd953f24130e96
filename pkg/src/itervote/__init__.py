"""Iterative plurality voting over multiple simultaneous issues."""

from .domain import (
    DomainError,
    IssueDomain,
    IssueOrder,
    PreferenceProfile,
    Ranking,
    adjusted_score,
    alternative_index,
    induced_local_preference,
    is_O_legal,
    is_separable,
    outcome_with_vote,
    plurality_outcome,
    score,
)
from .dominance import (
    StepContext,
    best_response,
    containment_check,
    ldi_steps,
    s_beats,
    s_dominates,
)
from .dynamics import (
    AlternatingUncertainty,
    Dynamics,
    FixedUncertainty,
    RoundRobinScheduler,
    RunResult,
    SchedulerError,
    ScriptedScheduler,
    Step,
    Terminal,
    UniformRandomScheduler,
    detect_cycle,
    enumerate_steps,
    run,
)
from .uncertainty import Metric, UncertaintySet, UncertaintySpec, build_uncertainty_set, possible_winners, potential_winners

__version__ = "0.1.0"

__all__ = [
    "AlternatingUncertainty",
    "DomainError",
    "Dynamics",
    "FixedUncertainty",
    "IssueDomain",
    "IssueOrder",
    "Metric",
    "PreferenceProfile",
    "Ranking",
    "RoundRobinScheduler",
    "RunResult",
    "SchedulerError",
    "ScriptedScheduler",
    "Step",
    "StepContext",
    "Terminal",
    "UncertaintySet",
    "UncertaintySpec",
    "UniformRandomScheduler",
    "adjusted_score",
    "alternative_index",
    "best_response",
    "build_uncertainty_set",
    "containment_check",
    "detect_cycle",
    "enumerate_steps",
    "induced_local_preference",
    "is_O_legal",
    "is_separable",
    "ldi_steps",
    "outcome_with_vote",
    "plurality_outcome",
    "possible_winners",
    "potential_winners",
    "run",
    "s_beats",
    "s_dominates",
    "score",
]
