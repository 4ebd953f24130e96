"""JSON and JSONL readers and writers for profiles, scripts and traces."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from .domain import Alternative, DomainError, IssueDomain, PreferenceProfile, Ranking, VoteProfile, check_votes
from .dynamics import RunResult

TRACE_SCHEMA_VERSION = 1
PathLike = Union[str, Path]


class InputError(ValueError):
    """A file could not be parsed into the expected structure."""


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _ranking(domain: IssueDomain, entries) -> Ranking:
    if all(isinstance(e, int) for e in entries):
        return Ranking(domain, tuple(entries))
    return Ranking.from_alternatives(domain, entries)


def profile_from_json(doc: dict) -> tuple[PreferenceProfile, Optional[VoteProfile]]:
    """Parse ``{"sizes": [...], "agents": [{"ranking": [...], "count": k, "vote": [...]}, ...]}``.

    Ranking entries are alternative indices or alternatives written as
    candidate lists, most preferred first. ``count`` (default 1) repeats an agent. ``vote`` is optional but must be
    given for every agent or for none; without it the caller decides the
    starting votes.
    """
    try:
        domain = IssueDomain(tuple(doc["sizes"]))
        rankings: list[Ranking] = []
        votes: list[Optional[Alternative]] = []
        for n, agent in enumerate(doc["agents"]):
            ranking = _ranking(domain, agent["ranking"])
            count = int(agent.get("count", 1))
            if count < 1:
                raise InputError(f"agent entry {n}: count must be positive")
            vote = domain.check(agent["vote"]) if "vote" in agent else None
            rankings.extend([ranking] * count)
            votes.extend([vote] * count)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed profile: missing or invalid field {exc}") from exc
    except DomainError as exc:
        raise InputError(f"malformed profile: {exc}") from exc
    if not rankings:
        raise InputError("malformed profile: no agents")
    given = [v is not None for v in votes]
    if any(given) and not all(given):
        raise InputError("malformed profile: give a vote for every agent or for none")
    prefs = PreferenceProfile(domain, tuple(rankings))
    return prefs, (tuple(votes) if all(given) else None)


def profile_to_json(prefs: PreferenceProfile, votes: Optional[Sequence[Sequence[int]]] = None) -> dict:
    agents = []
    for j, r in enumerate(prefs.rankings):
        entry: dict = {"ranking": list(r.order)}
        if votes is not None:
            entry["vote"] = list(votes[j])
        agents.append(entry)
    return {"sizes": list(prefs.domain.sizes), "agents": agents}


def load_profile(path: PathLike) -> tuple[PreferenceProfile, Optional[VoteProfile]]:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    try:
        return profile_from_json(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def save_profile(path: PathLike, prefs: PreferenceProfile, votes=None) -> None:
    Path(path).write_text(json.dumps(profile_to_json(prefs, votes), indent=1) + "\n", encoding="utf-8")


def load_votes(path: PathLike, domain: IssueDomain) -> VoteProfile:
    doc = _read_json(path)
    try:
        return check_votes(domain, doc)
    except (TypeError, DomainError) as exc:
        raise InputError(f"{path}: malformed vote profile: {exc}") from exc


def load_script(path: PathLike) -> list[tuple[int, int, int]]:
    """A scripted schedule: a JSON list of ``[agent, issue, target]`` triples."""
    doc = _read_json(path)
    if not isinstance(doc, list) or not all(isinstance(s, list) and len(s) == 3 for s in doc):
        raise InputError(f"{path}: a script is a list of [agent, issue, target] triples")
    return [tuple(int(x) for x in s) for s in doc]


def trace_records(result: RunResult, config: dict, seed: Optional[int] = None) -> Iterable[dict]:
    yield {"type": "header", "version": TRACE_SCHEMA_VERSION, "seed": seed, "config": config,
           "initial_votes": [list(v) for v in result.initial_votes]}
    for rec in result.trace:
        yield {"type": "step", **rec.to_json()}
    yield {"type": "summary", **result.summary(), "final_votes": [list(v) for v in result.final_votes]}


def write_trace(path: PathLike, result: RunResult, config: dict, seed: Optional[int] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in trace_records(result, config, seed):
            fh.write(json.dumps(doc, separators=(",", ":")) + "\n")


def read_trace(path: PathLike) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_schema(name: str) -> dict:
    """A bundled JSON schema, by file stem (``trace_record`` or ``profile``)."""
    return json.loads(resources.files("itervote").joinpath("schemas").joinpath(f"{name}.schema.json").read_text("utf-8"))


def data_path(name: str) -> Path:
    return Path(str(resources.files("itervote").joinpath("data").joinpath(name)))
