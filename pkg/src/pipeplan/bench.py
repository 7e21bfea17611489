"""Experiment matrix runner, CSV/JSON result files and summary statistics."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .errors import PipeplanError
from .model import GroupingConfig, Image, Pipeline, edge_counts, objective_cost, validate_config
from .pddl import PddlArtifacts, emit_pddl, parse_plan
from .planning import Plan, build_grouping_task, plan_to_config
from .simulator import SimParams, run_repetitions
from .strategies import STRATEGY_WEIGHTS, StrategyKind, run_strategy
from .workload import WorkloadParams, generate_pipeline

CSV_COLUMNS = (
    "topology", "special_ops", "fib_step", "strategy", "seed", "rep", "cold",
    "group_count", "inter_edges", "plan_cost", "setup_time", "execution_time", "total_time",
    "error",
)
SUMMARY_COLUMNS = (
    "topology", "special_ops", "fib_step", "strategy", "seed", "cache", "n",
    "setup_mean", "setup_std", "execution_mean", "execution_std", "total_mean", "total_std",
)
TIME_METRICS = ("setup_time", "execution_time", "total_time")


@dataclass(frozen=True)
class ExperimentSpec:
    topologies: tuple[str, ...] = ("line", "parallel")
    special_ops: tuple[int, ...] = (2, 4)
    fib_steps: tuple[int, ...] = (1, 2, 3)
    strategies: tuple[str, ...] = tuple(k.value for k in StrategyKind)
    seeds: tuple[int, ...] = (1,)
    reps: int = 5
    sim: SimParams = field(default_factory=SimParams)
    allow_universal: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        for s in self.strategies:
            StrategyKind(s)

    def cells(self) -> list[tuple[str, int, int, str, int]]:
        return list(itertools.product(self.topologies, self.special_ops, self.fib_steps,
                                      self.strategies, self.seeds))


@dataclass
class ResultRow:
    topology: str
    special_ops: int
    fib_step: int
    strategy: str
    seed: int
    rep: int
    cold: bool
    group_count: int | None = None
    inter_edges: int | None = None
    plan_cost: int | None = None
    setup_time: float | None = None
    execution_time: float | None = None
    total_time: float | None = None
    error: str = ""

    @property
    def cell(self) -> tuple:
        return (self.topology, self.special_ops, self.fib_step, self.strategy, self.seed)


def workload_for(topology: str, special_ops: int, fib_step: int, seed: int) -> WorkloadParams:
    return WorkloadParams(topology=topology, special_ops=special_ops, fib_step=fib_step, seed=seed)


def rows_for_config(cell: tuple, config: GroupingConfig, plan: Plan | None,
                    workload: WorkloadParams, sim: SimParams, reps: int) -> list[ResultRow]:
    report = validate_config(config)
    if report:
        raise PipeplanError(f"configuration failed validation: {report[0]}")
    _, inter = edge_counts(config)
    results = run_repetitions(config, workload, sim, reps)
    return [
        ResultRow(*cell, rep=r, cold=res.cold, group_count=len(config.groups), inter_edges=inter,
                  plan_cost=plan.total_cost if plan is not None else None,
                  setup_time=res.setup_time, execution_time=res.execution_time,
                  total_time=res.total_time)
        for r, res in enumerate(results)
    ]


def run_cell(cell: tuple, spec: ExperimentSpec) -> list[ResultRow]:
    topology, special_ops, fib_step, strategy, seed = cell
    try:
        workload = workload_for(topology, special_ops, fib_step, seed)
        pipeline, images = generate_pipeline(workload)
        config, plan = run_strategy(strategy, pipeline, images, seed=seed,
                                    allow_universal=spec.allow_universal)
        return rows_for_config(cell, config, plan, workload, spec.sim, spec.reps)
    except (PipeplanError, ValueError) as exc:
        return [ResultRow(*cell, rep=r, cold=(r == 0), error=str(exc)) for r in range(spec.reps)]


def _run_cell_args(args):
    return run_cell(*args)


def run_matrix(spec: ExperimentSpec, jobs: int = 1) -> list[ResultRow]:
    """Run every cell of the matrix; rows come back in matrix order."""
    cells = spec.cells()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell_args, [(c, spec) for c in cells]))
    else:
        chunks = [run_cell(c, spec) for c in cells]
    return [row for chunk in chunks for row in chunk]


# --- serialization ------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _number(value) -> str:
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.4f}"


def _row_values(row: ResultRow) -> list[str]:
    out = []
    for col in CSV_COLUMNS:
        value = getattr(row, col)
        if col in TIME_METRICS and value is not None:
            out.append(f"{float(value):.4f}")
        else:
            out.append(_fmt(value))
    return out


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(_row_values(row))
    return buf.getvalue()


def rows_to_json(rows: Iterable[ResultRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


def _parse_optional(value: str, kind):
    return None if value == "" else kind(value)


def rows_from_csv(text: str) -> list[ResultRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(ResultRow(
            topology=rec["topology"], special_ops=int(rec["special_ops"]),
            fib_step=int(rec["fib_step"]), strategy=rec["strategy"], seed=int(rec["seed"]),
            rep=int(rec["rep"]), cold=rec["cold"] == "true",
            group_count=_parse_optional(rec["group_count"], int),
            inter_edges=_parse_optional(rec["inter_edges"], int),
            plan_cost=_parse_optional(rec["plan_cost"], int),
            setup_time=_parse_optional(rec["setup_time"], float),
            execution_time=_parse_optional(rec["execution_time"], float),
            total_time=_parse_optional(rec["total_time"], float),
            error=rec.get("error", ""),
        ))
    return rows


def rows_from_json(text: str) -> list[ResultRow]:
    names = {f.name for f in fields(ResultRow)}
    return [ResultRow(**{k: v for k, v in rec.items() if k in names}) for rec in json.loads(text)]


def write_rows(rows: Sequence[ResultRow], path: str | Path | None, fmt: str = "csv") -> str:
    text = rows_to_csv(rows) if fmt == "csv" else rows_to_json(rows)
    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as exc:
            raise PipeplanError(f"cannot write results to {path}: {exc.strerror}") from exc
    return text


def read_rows(path: str | Path) -> list[ResultRow]:
    text = Path(path).read_text()
    return rows_from_json(text) if text.lstrip().startswith("[") else rows_from_csv(text)


# --- summary -------------------------------------------------------------------

@dataclass
class SummaryLine:
    topology: str
    special_ops: int
    fib_step: int
    strategy: str
    seed: int
    cache: str  # "cold" or "warm"
    n: int
    setup_mean: float
    setup_std: float
    execution_mean: float
    execution_std: float
    total_mean: float
    total_std: float


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else math.nan
    return mean, std


def summarize(rows: Sequence[ResultRow]) -> list[SummaryLine]:
    """Mean and sample (n-1) standard deviation per cell and cache state.

    Cold statistics use rep 0, warm statistics the remaining reps. Error rows
    are skipped. A single observation has an undefined std, reported as nan.
    """
    if not rows:
        raise ValueError("cannot summarize an empty result set")
    buckets: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        if row.error:
            continue
        cache = "cold" if row.rep == 0 else "warm"
        buckets.setdefault(row.cell + (cache,), []).append(row)
    out = []
    for key, members in buckets.items():
        stats = []
        for metric in TIME_METRICS:
            stats.extend(_mean_std([float(getattr(r, metric)) for r in members]))
        out.append(SummaryLine(*key, len(members), *stats))
    return out


def summary_to_csv(lines: Iterable[SummaryLine]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for line in lines:
        rec = asdict(line)
        writer.writerow([_number(v) if isinstance(v, float) else v for v in rec.values()])
    return buf.getvalue()


# --- PDDL round trip through files ---------------------------------------------------

def export_pddl(pipeline: Pipeline, images: Sequence[Image], strategy: str,
                out_dir: str | Path, name: str = "pipeline") -> PddlArtifacts:
    """Write domain.pddl and problem.pddl for a planner strategy."""
    weights = STRATEGY_WEIGHTS.get(StrategyKind(strategy))
    if weights is None:
        raise PipeplanError(f"strategy {strategy!r} is not planner-based; use connection or node")
    task = build_grouping_task(pipeline, images, weights)
    artifacts = emit_pddl(task, name)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "domain.pddl").write_text(artifacts.domain_text)
        (out_dir / "problem.pddl").write_text(artifacts.problem_text)
    except OSError as exc:
        raise PipeplanError(f"cannot write PDDL files to {out_dir}: {exc.strerror}") from exc
    return artifacts


def import_plan(plan_text: str, pipeline: Pipeline, images: Sequence[Image], strategy: str,
                ) -> tuple[GroupingConfig, Plan]:
    weights = STRATEGY_WEIGHTS.get(StrategyKind(strategy))
    if weights is None:
        raise PipeplanError(f"strategy {strategy!r} is not planner-based; use connection or node")
    task = build_grouping_task(pipeline, images, weights)
    plan = parse_plan(plan_text, task)
    config = plan_to_config(plan, task)
    if objective_cost(config, weights) != plan.total_cost:
        raise PipeplanError("imported plan cost disagrees with the grouping objective")
    return config, plan
