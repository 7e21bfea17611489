"""Deterministic discrete-event model of deploying and running a grouped pipeline.

Every group is one pod with a single worker that runs its operators' tasks
one at a time. Sources act as generators and emit all rounds at time 0;
sinks are terminators and absorb messages instantly without using a worker.
"""
from __future__ import annotations

import heapq
import json
import random
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

from .errors import InvalidConfigError, PipelineError
from .model import GroupingConfig, validate_config
from .workload import FIBONACCI, GENERATOR, TERMINATOR, WorkloadParams, operator_roles


@dataclass(frozen=True)
class SimParams:
    t_pod: float = 200
    t_pull: float = 1000
    l_intra: float = 1
    l_inter: float = 20
    t_unit: float = 1
    jitter_seed: int | None = None
    jitter: float = 0.1  # max relative perturbation of a work duration

    def __post_init__(self):
        for name in ("t_pod", "t_pull", "l_intra", "l_inter", "t_unit", "jitter"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.l_inter < self.l_intra:
            raise ValueError("l_inter must be at least l_intra")

    @classmethod
    def from_dict(cls, data: dict) -> "SimParams":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise PipelineError(f"unknown simulation parameters: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "SimParams":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class SimResult:
    setup_time: float
    execution_time: float
    total_time: float
    cold: bool
    per_operator_completion: dict[str, float] = field(default_factory=dict)
    terminator_messages: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=None)
def _fib(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def work_units(n: int) -> int:
    """Calls made by the naive recursive Fibonacci on input ``n``: 2*F(n+1) - 1."""
    if n < 1:
        raise ValueError(f"work_units needs n >= 1, got {n}")
    return 2 * _fib(n + 1) - 1


def setup_time(config: GroupingConfig, sim: SimParams, cold: bool) -> float:
    pulls = len(config.distinct_images()) if cold else 0
    return sim.t_pod * len(config.groups) + sim.t_pull * pulls


_ARRIVE, _DONE = 0, 1


def simulate(config: GroupingConfig, workload: WorkloadParams, sim: SimParams,
             cold: bool = True, rep: int = 0) -> SimResult:
    report = validate_config(config)
    if report:
        raise InvalidConfigError(report)
    pipeline = config.pipeline
    roles = operator_roles(pipeline)
    owner = config.group_of()
    succ = {op.id: pipeline.successors(op.id) for op in pipeline.operators}
    jitter_rng = (random.Random(f"{sim.jitter_seed}:{rep}")
                  if sim.jitter_seed is not None else None)

    def latency(a: str, b: str) -> float:
        return sim.l_intra if owner[a] == owner[b] else sim.l_inter

    # event: (time, kind, op_id, round, n, seq)
    events: list[tuple] = []
    seq = 0

    def push(time, kind, op_id, rnd, n):
        nonlocal seq
        heapq.heappush(events, (time, kind, op_id, rnd, n, seq))
        seq += 1

    for op in pipeline.operators:
        if roles[op.id] != GENERATOR:
            continue
        for rnd in range(workload.rounds):
            for dst in succ[op.id]:
                push(latency(op.id, dst), _ARRIVE, dst, rnd, workload.base_n)

    queues: dict[str, list] = {g.id: [] for g in config.groups}
    busy: dict[str, bool] = {g.id: False for g in config.groups}
    group_order = [g.id for g in config.groups]
    completion: dict[str, float] = {}
    absorbed = 0
    last = 0

    while events:
        now = events[0][0]
        while events and events[0][0] == now:
            _, kind, op_id, rnd, n, _ = heapq.heappop(events)
            last = now
            if kind == _DONE:
                busy[owner[op_id]] = False
                completion[op_id] = now
                for dst in succ[op_id]:
                    push(now + latency(op_id, dst), _ARRIVE, dst, rnd, n + workload.fib_step)
            elif roles[op_id] == FIBONACCI:
                heapq.heappush(queues[owner[op_id]], (now, op_id, rnd, n))
            else:
                # terminators (and generators reached by a back edge) absorb instantly
                absorbed += roles[op_id] == TERMINATOR
                completion[op_id] = now
        for gid in group_order:
            if busy[gid] or not queues[gid]:
                continue
            _, op_id, rnd, n = heapq.heappop(queues[gid])
            duration = work_units(n) * sim.t_unit
            if jitter_rng is not None:
                duration *= 1 + jitter_rng.uniform(-sim.jitter, sim.jitter)
            busy[gid] = True
            push(now + duration, _DONE, op_id, rnd, n)

    setup = setup_time(config, sim, cold)
    return SimResult(setup, last, setup + last, cold, completion, absorbed)


def run_repetitions(config: GroupingConfig, workload: WorkloadParams, sim: SimParams,
                    reps: int) -> list[SimResult]:
    """First repetition is a cold start, the rest are warm."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    return [simulate(config, workload, sim, cold=(r == 0), rep=r) for r in range(reps)]


