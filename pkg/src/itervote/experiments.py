"""Random-profile experiments: samplers, Borda welfare and the n x p x r grid.

Every profile gets its own seed derived from the master seed and its
``(n, p, index)`` key, so results do not depend on execution order or on
the number of worker processes. The same sampled profile is reused for
every radius of its ``(n, p)`` column, which makes the comparison across
radii paired.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .domain import IssueDomain, IssueOrder, PreferenceProfile, Ranking, plurality_outcome, score
from .dynamics import DEFAULT_CAP, Dynamics, FixedUncertainty, StepEnumerator, Terminal, UniformRandomScheduler, iterate
from .uncertainty import Metric

CSV_SCHEMA_VERSION = 1
CSV_HEADER_LINE = f"# itervote experiment csv v{CSV_SCHEMA_VERSION}"

RAW_COLUMNS = ("n", "p", "r", "profile_index", "seed", "truthful_is_equilibrium", "terminal", "steps",
               "welfare_truthful", "welfare_final", "welfare_pct_change")
CELL_COLUMNS = ("n", "p", "r", "m", "truthful_equilibrium", "non_equilibrium_fraction", "converged", "cycled",
                "capped", "mean_steps", "median_steps", "p90_steps", "max_steps", "mean_welfare_truthful",
                "mean_welfare_final", "mean_welfare_pct_change")


def sample_impartial_culture(n: int, domain: IssueDomain, rng: np.random.Generator) -> PreferenceProfile:
    """``n`` rankings drawn uniformly and independently."""
    return PreferenceProfile(domain, tuple(Ranking(domain, tuple(rng.permutation(domain.size).tolist()))
                                           for _ in range(n)))


def o_legal_ranking(domain: IssueDomain, order: IssueOrder, tables: Mapping) -> Ranking:
    """Conditionally lexicographic ranking.

    ``tables[(issue, context)]`` is the local order (best first) of ``issue``
    given the outcomes ``context`` of the issues before it in ``order``.
    Alternatives are compared issue by issue in ``order``.
    """
    order.check(domain)
    seq = order.order

    def key(alt):
        out = []
        for pos, issue in enumerate(seq):
            local = tables[(issue, tuple(alt[k] for k in seq[:pos]))]
            out.append(local.index(alt[issue]))
        return tuple(out)

    alts = sorted(domain.alternatives(), key=key)
    return Ranking.from_alternatives(domain, alts)


def sample_o_legal_ranking(domain: IssueDomain, order: IssueOrder, rng: np.random.Generator) -> Ranking:
    seq = order.order
    tables = {}
    for pos, issue in enumerate(seq):
        for ctx in itertools.product(*(range(domain.sizes[k]) for k in seq[:pos])):
            tables[(issue, ctx)] = tuple(rng.permutation(domain.sizes[issue]).tolist())
    return o_legal_ranking(domain, order, tables)


def sample_O_legal(n: int, domain: IssueDomain, order: IssueOrder, rng: np.random.Generator) -> PreferenceProfile:
    """``n`` rankings, each O-legal for the shared ``order``."""
    return PreferenceProfile(domain, tuple(sample_o_legal_ranking(domain, order, rng) for _ in range(n)))


def borda_welfare(prefs: PreferenceProfile, outcome: Sequence[int]) -> int:
    """Sum over agents of ``D - position`` with 1-based positions (top scores ``D - 1``)."""
    size = prefs.domain.size
    return sum(size - 1 - r.rank(outcome) for r in prefs.rankings)


@dataclass(frozen=True)
class ExperimentGrid:
    n_values: tuple[int, ...]
    p_values: tuple[int, ...]
    r_values: tuple = (0, 1, 2, 3)
    m: int = 1000
    cap: int = DEFAULT_CAP
    seed: int = 0
    dynamics: Dynamics = Dynamics.LDI
    metric: Metric = Metric.LINF

    def __post_init__(self):
        for name in ("n_values", "p_values", "r_values"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, values)
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.cap < 1:
            raise ValueError("cap must be at least 1")
        if any(n < 1 for n in self.n_values) or any(p < 1 for p in self.p_values):
            raise ValueError("n and p must be positive")
        object.__setattr__(self, "dynamics", Dynamics(self.dynamics))
        object.__setattr__(self, "metric", Metric(self.metric))

    def cells(self) -> list[tuple[int, int, object]]:
        return [(n, p, r) for n in self.n_values for p in self.p_values for r in self.r_values]


@dataclass(frozen=True)
class RunRow:
    n: int
    p: int
    r: object
    profile_index: int
    seed: int
    truthful_is_equilibrium: bool
    terminal: str
    steps: int
    welfare_truthful: int
    welfare_final: Optional[int]
    welfare_pct_change: Optional[float]


@dataclass(frozen=True)
class CellResult:
    n: int
    p: int
    r: object
    m: int
    truthful_equilibrium: int
    converged: int
    cycled: int
    capped: int
    steps: tuple[int, ...] = field(repr=False)
    mean_welfare_truthful: float
    mean_welfare_final: Optional[float]
    mean_welfare_pct_change: Optional[float]

    @property
    def non_equilibrium_fraction(self) -> float:
        return 1 - self.truthful_equilibrium / self.m

    @property
    def mean_steps(self) -> Optional[float]:
        """Mean steps over converged runs that moved at least once."""
        moved = [s for s in self.steps if s > 0]
        return statistics.fmean(moved) if moved else None

    def as_row(self) -> dict:
        moved = sorted(s for s in self.steps if s > 0)
        return {
            "n": self.n, "p": self.p, "r": self.r, "m": self.m,
            "truthful_equilibrium": self.truthful_equilibrium,
            "non_equilibrium_fraction": self.non_equilibrium_fraction,
            "converged": self.converged, "cycled": self.cycled, "capped": self.capped,
            "mean_steps": self.mean_steps,
            "median_steps": statistics.median(moved) if moved else None,
            "p90_steps": moved[math.ceil(0.9 * len(moved)) - 1] if moved else None,
            "max_steps": moved[-1] if moved else None,
            "mean_welfare_truthful": self.mean_welfare_truthful,
            "mean_welfare_final": self.mean_welfare_final,
            "mean_welfare_pct_change": self.mean_welfare_pct_change,
        }


@dataclass
class ExperimentResult:
    grid: ExperimentGrid
    rows: list[RunRow]
    cells: list[CellResult]

    def raw_csv(self) -> str:
        return _csv(RAW_COLUMNS, (asdict(row) for row in self.rows))

    def cells_csv(self) -> str:
        return _csv(CELL_COLUMNS, (c.as_row() for c in self.cells))

    def write(self, out_dir, prefix: str = "experiment") -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        raw, cells = out_dir / f"{prefix}_raw.csv", out_dir / f"{prefix}_cells.csv"
        for path, text in ((raw, self.raw_csv()), (cells, self.cells_csv())):
            try:
                out_dir.mkdir(parents=True, exist_ok=True)
                path.write_text(text, encoding="utf-8")
            except OSError as exc:
                raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
        return raw, cells


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def profile_seed(master: int, n: int, p: int, index: int) -> int:
    return int(np.random.SeedSequence(master, spawn_key=(n, p, index)).generate_state(1, np.uint64)[0])


def scheduler_seed(seed: int, r) -> int:
    r = Fraction(r)
    return int(np.random.SeedSequence([seed, r.numerator, r.denominator]).generate_state(1, np.uint64)[0])


def _percent_change(before: int, after: int) -> Optional[float]:
    if before == 0:
        return None
    return 100.0 * (after - before) / before


def _run_profile(task) -> list[RunRow]:
    grid, n, p, index = task
    seed = profile_seed(grid.seed, n, p, index)
    domain = IssueDomain.binary(p)
    prefs = sample_impartial_culture(n, domain, np.random.default_rng(seed))
    votes = prefs.truthful()
    truthful_outcome = plurality_outcome(score(votes, domain))
    w0 = borda_welfare(prefs, truthful_outcome)
    rows = []
    for r in grid.r_values:
        enumerator = StepEnumerator(prefs, grid.dynamics, FixedUncertainty.uniform(n, p, r, grid.metric))
        result = iterate(enumerator, votes, UniformRandomScheduler(scheduler_seed(seed, r)), grid.cap, record=False)
        converged = result.terminal is Terminal.EQUILIBRIUM
        w1 = borda_welfare(prefs, result.final_outcome) if converged else None
        rows.append(RunRow(n, p, r, index, seed, result.rounds == 0 and converged, result.terminal.value,
                           result.rounds, w0, w1, _percent_change(w0, w1) if converged else None))
    return rows


def _aggregate(grid: ExperimentGrid, rows: list[RunRow]) -> list[CellResult]:
    by_cell: dict = {}
    for row in rows:
        by_cell.setdefault((row.n, row.p, row.r), []).append(row)
    cells = []
    for key in grid.cells():
        group = by_cell[key]
        conv = [row for row in group if row.terminal == Terminal.EQUILIBRIUM.value]
        pct = [row.welfare_pct_change for row in conv if row.welfare_pct_change is not None]
        cells.append(CellResult(
            *key, m=len(group),
            truthful_equilibrium=sum(row.truthful_is_equilibrium for row in group),
            converged=len(conv),
            cycled=sum(row.terminal == Terminal.CYCLE.value for row in group),
            capped=sum(row.terminal == Terminal.CAP.value for row in group),
            steps=tuple(row.steps for row in conv),
            mean_welfare_truthful=statistics.fmean(row.welfare_truthful for row in group),
            mean_welfare_final=statistics.fmean(row.welfare_final for row in conv) if conv else None,
            mean_welfare_pct_change=statistics.fmean(pct) if pct else None,
        ))
    return cells


def run_experiment(grid: ExperimentGrid, workers: int = 1) -> ExperimentResult:
    """Run every cell of ``grid``; output is identical for any ``workers``."""
    tasks = [(grid, n, p, idx) for n in grid.n_values for p in grid.p_values for idx in range(grid.m)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_profile, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    else:
        chunks = [_run_profile(t) for t in tasks]
    order = {r: k for k, r in enumerate(grid.r_values)}
    rows = sorted(itertools.chain.from_iterable(chunks),
                  key=lambda row: (row.n, row.p, order[row.r], row.profile_index))
    return ExperimentResult(grid, rows, _aggregate(grid, rows))
