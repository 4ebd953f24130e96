"""Command line entry point: ``itervote simulate | experiment | verify``.

Summary lines on stdout are space separated ``key=value`` pairs. Exit codes:
0 success (equilibrium / all fixtures pass), 1 error, 2 run ended in a cycle
or hit the cap, 3 fixture failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .domain import DomainError
from .dynamics import (
    AlternatingUncertainty,
    Dynamics,
    FixedUncertainty,
    RoundRobinScheduler,
    SchedulerError,
    ScriptedScheduler,
    Terminal,
    UniformRandomScheduler,
    run,
)
from .experiments import ExperimentGrid, run_experiment
from .fixtures import FIXTURES, verify_all
from .io import InputError, load_profile, load_script, load_votes, write_trace
from .nonatomic import MassProfile, MassSet, MassSpec, nonatomic_run
from .uncertainty import Metric, UncertaintySpec

OUT_ENV = "ITERVOTE_OUT"

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_FIXTURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _fractions(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(x.strip()) for x in str(text).split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pair(text: str) -> tuple[Fraction, Fraction]:
    parts = str(text).split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected rc:ro, got {text!r}")
    try:
        return Fraction(parts[0]), Fraction(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected rc:ro, got {text!r}") from None


def _fmt(value) -> str:
    if isinstance(value, (tuple, list)):
        return ",".join(str(v) for v in value)
    return str(value)


def _line(**pairs) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in pairs.items() if v is not None)


def _out_dir(args) -> Optional[Path]:
    out = args.out or os.environ.get(OUT_ENV)
    return Path(out) if out else None


def _radius(metric: Metric, r: Fraction, nonatomic: bool):
    if nonatomic or metric is Metric.MULTIPLICATIVE:
        return r
    if r.denominator != 1:
        raise UsageError(f"linf radii are integers, got {r}")
    return int(r)


def _scheduler(args):
    kind = args.schedule
    if kind == "roundrobin":
        return RoundRobinScheduler()
    if kind == "random":
        if args.seed is None:
            raise UsageError("--schedule random needs --seed")
        return UniformRandomScheduler(args.seed)
    if kind.startswith("scripted:"):
        return ScriptedScheduler(load_script(kind.split(":", 1)[1]))
    raise UsageError(f"unknown schedule {kind!r}; use random, roundrobin or scripted:FILE")


def _simulate(args) -> int:
    prefs, file_votes = load_profile(args.profile)
    votes = load_votes(args.votes, prefs.domain) if args.votes else file_votes
    n, p = prefs.n, prefs.domain.p
    metric = Metric(args.metric)
    dynamics = Dynamics(args.dynamics)
    if args.radii is not None and args.alternating is not None:
        raise UsageError("--radii and --alternating are mutually exclusive")
    radii = args.radii if args.radii is not None else (Fraction(0),)
    if len(radii) == 1:
        radii = radii * p
    if len(radii) != p:
        raise UsageError(f"--radii needs 1 or {p} values, got {len(radii)}")
    scheduler = _scheduler(args)
    config = {"profile": str(args.profile), "dynamics": dynamics.value, "metric": metric.value,
              "schedule": args.schedule, "cap": args.cap, "nonatomic": args.nonatomic}

    if args.nonatomic:
        if dynamics is not Dynamics.LDI:
            raise UsageError("the nonatomic model runs LDI dynamics only")
        copies = 1
        if args.epsilon is not None:
            k = 1 / Fraction(args.epsilon)
            if k.denominator != 1 or k % n:
                raise UsageError(f"--epsilon must be 1/(c*n) for n={n} agents, got {args.epsilon}")
            copies = int(k) // n
        start = votes if votes is not None else prefs.truthful()
        spec = MassSpec(metric, radii)
        sets = tuple(MassSet(r, spec, v) for r, v in zip(prefs.rankings, start) for _ in range(copies))
        profile = MassProfile(prefs.domain, Fraction(1, n * copies), sets)
        alternating = None
        if args.alternating is not None:
            alternating = AlternatingUncertainty(metric, (args.alternating,) * len(sets))
        config.update(epsilon=str(profile.epsilon), batch=args.batch,
                      radii=[str(r) for r in radii] if alternating is None else None,
                      alternating=None if alternating is None else [str(x) for x in args.alternating])
        result = nonatomic_run(profile, scheduler=scheduler, alternating=alternating, batch=args.batch,
                               cap=args.cap, record=True)
    else:
        if args.alternating is not None:
            rc, ro = (_radius(metric, x, False) for x in args.alternating)
            uncertainty = AlternatingUncertainty(metric, ((rc, ro),) * n)
            config["alternating"] = [str(rc), str(ro)]
        else:
            spec = UncertaintySpec(metric, tuple(_radius(metric, r, False) for r in radii))
            uncertainty = FixedUncertainty.shared(n, spec)
            config["radii"] = [str(r) for r in spec.radii]
        result = run(prefs, votes, dynamics=dynamics, uncertainty=uncertainty, scheduler=scheduler,
                     cap=args.cap, record=True)

    config["scheduler"] = scheduler.describe()
    trace = Path(args.trace) if args.trace else None
    if trace is None and _out_dir(args) is not None:
        trace = _out_dir(args) / "trace.jsonl"
    if trace is not None:
        try:
            trace.parent.mkdir(parents=True, exist_ok=True)
            write_trace(trace, result, config, args.seed)
        except OSError as exc:
            raise UsageError(f"cannot write trace {trace}: {exc.strerror or exc}") from exc
    print(_line(terminal=result.terminal.value, period=result.period, entry=result.cycle_entry,
                rounds=result.rounds, steps=len(result.trace), final_outcome=result.final_outcome,
                trace=trace))
    return EXIT_OK if result.terminal is Terminal.EQUILIBRIUM else EXIT_NOT_CONVERGED


def _experiment(args) -> int:
    if args.full:
        n_values, p_values, r_values, m = (7, 11, 15, 19), (2, 3, 4, 5), (0, 1, 2, 3), 10_000
    else:
        n_values, p_values, r_values, m = (7, 11), (5,), (0, 1, 2, 3), 1000
    metric = Metric(args.metric)
    r_values = tuple(_radius(metric, r, False) for r in args.r) if args.r else r_values
    grid = ExperimentGrid(n_values=args.n or n_values, p_values=args.p or p_values, r_values=r_values,
                          m=args.m or m, cap=args.cap, seed=args.seed if args.seed is not None else 0,
                          dynamics=Dynamics(args.dynamics), metric=metric)
    out = _out_dir(args) or Path(".")
    result = run_experiment(grid, workers=args.workers)
    raw, cells = result.write(out, args.prefix)
    for cell in result.cells:
        row = cell.as_row()
        print(_line(**{k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in row.items()}))
    print(_line(raw=raw, cells=cells, rows=len(result.rows)))
    return EXIT_OK


def _verify(args) -> int:
    only = None
    if args.only:
        only = [name for chunk in args.only for name in chunk.split(",") if name]
        unknown = [name for name in only if name not in FIXTURES]
        if unknown:
            raise UsageError(f"unknown fixture(s) {', '.join(unknown)}; choose from {', '.join(FIXTURES)}")
    reports = verify_all(only, Path(args.data_dir) if args.data_dir else None)
    for rep in reports:
        print(_line(fixture=rep.name, status="pass" if rep.passed else "fail", checks=len(rep.checks),
                    failed=len(rep.failures) + (rep.error is not None)))
        if rep.error:
            print(f"  error: {rep.error}")
        for check in rep.failures:
            print(f"  failed: {check.name}" + (f": {check.detail}" if check.detail else ""))
    ok = all(rep.passed for rep in reports)
    print(_line(fixtures=len(reports), status="pass" if ok else "fail"))
    return EXIT_OK if ok else EXIT_FIXTURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="itervote", description="Iterative multi-issue plurality voting.")
    parser.add_argument("--config", help="JSON file with option defaults; flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run BR or LDI dynamics on a preference profile")
    sim.add_argument("--profile", required=True, help="preference profile JSON")
    sim.add_argument("--votes", help="initial vote profile JSON (default: votes in the profile, else truthful)")
    sim.add_argument("--dynamics", choices=[d.value for d in Dynamics], default="ldi")
    sim.add_argument("--metric", choices=[m.value for m in Metric], default="linf")
    sim.add_argument("--radii", type=_fractions, help="one radius per issue, or one for all")
    sim.add_argument("--alternating", type=_pair, metavar="RC:RO", help="alternating uncertainty with rc < ro")
    sim.add_argument("--schedule", default="roundrobin", help="random, roundrobin or scripted:FILE")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--cap", type=int, default=50_000)
    sim.add_argument("--nonatomic", action="store_true", help="treat each agent as a set of mass epsilon")
    sim.add_argument("--epsilon", type=Fraction, help="set mass 1/(c*n); each agent becomes c identical sets")
    sim.add_argument("--batch", action=argparse.BooleanOptionalAction, default=True,
                     help="move all identical sets together (nonatomic only)")
    sim.add_argument("--trace", help="write a JSONL trace here")
    sim.add_argument("--out", help=f"output directory (default ${OUT_ENV})")
    sim.set_defaults(handler=_simulate)

    exp = sub.add_parser("experiment", help="run the random-profile grid and write CSVs")
    exp.add_argument("--n", type=_ints)
    exp.add_argument("--p", type=_ints)
    exp.add_argument("--r", type=_fractions)
    exp.add_argument("--m", type=int)
    exp.add_argument("--seed", type=int)
    exp.add_argument("--cap", type=int, default=50_000)
    exp.add_argument("--dynamics", choices=[d.value for d in Dynamics], default="ldi")
    exp.add_argument("--metric", choices=[m.value for m in Metric], default="linf")
    exp.add_argument("--workers", type=int, default=1)
    exp.add_argument("--full", action="store_true", help="the full published grid (10,000 profiles per cell)")
    exp.add_argument("--prefix", default="experiment")
    exp.add_argument("--out", help=f"output directory (default ${OUT_ENV}, else the working directory)")
    exp.set_defaults(handler=_experiment)

    ver = sub.add_parser("verify", help="replay the bundled worked examples")
    ver.add_argument("--only", action="append", help="fixture name(s), comma separated")
    ver.add_argument("--data-dir", help="read fixture data from this directory instead")
    ver.set_defaults(handler=_verify)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {known.config} must be a JSON object")
    converters = {"radii": _fractions, "r": _fractions, "n": _ints, "p": _ints, "alternating": _pair,
                  "epsilon": Fraction}
    defaults = {}
    for key, value in doc.items():
        key = key.replace("-", "_")
        if key in converters and value is not None:
            value = converters[key](",".join(map(str, value)) if isinstance(value, list) else str(value))
        defaults[key] = value
    for action in parser._subparsers._group_actions:
        for subparser in action.choices.values():
            subparser.set_defaults(**defaults)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except (UsageError, InputError, DomainError, SchedulerError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
