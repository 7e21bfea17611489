"""Synthetic Fibonacci pipelines (line and parallel) and their image catalog."""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from functools import lru_cache

from .errors import PipelineError
from .model import Edge, Image, Operator, Pipeline

DEFAULT_TAG = "golang"
SPECIAL_TAGS = ("spt-1", "spt-2", "spt-3")
GENERATOR = "generator"
FIBONACCI = "fibonacci"
TERMINATOR = "terminator"
TOPOLOGIES = ("line", "parallel")


@dataclass(frozen=True)
class WorkloadParams:
    topology: str = "line"
    special_ops: int = 1
    fib_step: int = 1
    base_n: int = 5
    rounds: int = 5
    lines: int = 3          # parallel only
    ops_per_line: int = 4   # parallel only
    line_length: int = 12   # line only
    seed: int = 0
    # images also carry the default tag and special operators keep it
    literal_tags: bool = False

    def validate(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise PipelineError(f"unknown topology {self.topology!r}")
        if self.special_ops < 1:
            raise PipelineError("special_ops must be at least 1")
        if self.fib_step < 1:
            raise PipelineError("fib_step must be at least 1")
        if self.base_n < 1:
            raise PipelineError("base_n must be at least 1")
        if self.rounds < 0:
            raise PipelineError("rounds must be non-negative")
        if self.lines < 1 or self.ops_per_line < 1 or self.line_length < 1:
            raise PipelineError("topology sizes must be positive")
        if self.special_ops > self.computing_ops:
            raise PipelineError(
                f"special_ops={self.special_ops} exceeds the {self.computing_ops} computing operators")

    @property
    def computing_ops(self) -> int:
        return self.line_length if self.topology == "line" else self.lines * self.ops_per_line


def image_catalog(literal_tags: bool = False) -> tuple[Image, ...]:
    images = [Image("img-default", frozenset({DEFAULT_TAG}))]
    for tag in SPECIAL_TAGS:
        tags = {tag, DEFAULT_TAG} if literal_tags else {tag}
        images.append(Image(f"img-{tag}", frozenset(tags)))
    return tuple(images)


def _default_op(op_id: str) -> Operator:
    return Operator(op_id, frozenset({DEFAULT_TAG}), "golang")


def generate_pipeline(params: WorkloadParams) -> tuple[Pipeline, tuple[Image, ...]]:
    params.validate()
    if params.topology == "line":
        chains = [[f"fib-{i:02d}" for i in range(1, params.line_length + 1)]]
    else:
        chains = [[f"fib-{l}-{i}" for i in range(1, params.ops_per_line + 1)]
                  for l in range(1, params.lines + 1)]
    ops = [_default_op("gen")]
    edges = []
    for chain in chains:
        ops.extend(_default_op(o) for o in chain)
        edges.append(Edge("gen", chain[0]))
        edges.extend(Edge(a, b) for a, b in zip(chain, chain[1:]))
    ops.append(_default_op("term"))
    edges.extend(Edge(chain[-1], "term") for chain in chains)
    edges.append(Edge("gen", "term"))
    pipeline = Pipeline(tuple(ops), _edge_order(edges, [o.id for o in ops]))
    pipeline = assign_special_tags(pipeline, params.special_ops, params.seed, params.literal_tags)
    return pipeline, image_catalog(params.literal_tags)


def _edge_order(edges: list[Edge], order: list[str]) -> tuple[Edge, ...]:
    pos = {o: i for i, o in enumerate(order)}
    return tuple(sorted(edges, key=lambda e: (pos[e.src], pos[e.dst])))


def operator_roles(pipeline: Pipeline) -> dict[str, str]:
    """Classify operators by position: sources generate, sinks terminate."""
    has_in = {e.dst for e in pipeline.edges}
    has_out = {e.src for e in pipeline.edges}
    roles = {}
    for op in pipeline.operators:
        if op.id not in has_in:
            roles[op.id] = GENERATOR
        elif op.id not in has_out:
            roles[op.id] = TERMINATOR
        else:
            roles[op.id] = FIBONACCI
    return roles


def assign_special_tags(pipeline: Pipeline, n: int, seed: int,
                        literal_tags: bool = False) -> Pipeline:
    """Give ``n`` randomly chosen Fibonacci operators a special tag.

    Tags cycle spt-1, spt-2, spt-3, spt-1, ... in selection order. Special
    tags left over from an earlier assignment are reset to the default tag.
    """
    roles = operator_roles(pipeline)
    fibs = [op.id for op in pipeline.operators if roles[op.id] == FIBONACCI]
    if n < 1:
        raise PipelineError("at least one special operator is required")
    if n > len(fibs):
        raise PipelineError(f"cannot tag {n} operators: only {len(fibs)} Fibonacci operators")
    chosen = random.Random(seed).sample(fibs, n)
    special = {op_id: SPECIAL_TAGS[i % len(SPECIAL_TAGS)] for i, op_id in enumerate(chosen)}
    ops = []
    for op in pipeline.operators:
        if op.id in special:
            tags = {special[op.id], DEFAULT_TAG} if literal_tags else {special[op.id]}
            op = replace(op, tags=frozenset(tags))
        elif op.tags & set(SPECIAL_TAGS):
            op = replace(op, tags=frozenset({DEFAULT_TAG}))
        ops.append(op)
    return Pipeline(tuple(ops), pipeline.edges, pipeline.groups)


def fib_argument(pipeline: Pipeline, op_id: str, base_n: int = 5, fib_step: int = 1) -> int:
    roles = operator_roles(pipeline)
    if roles.get(op_id) != FIBONACCI:
        raise PipelineError(f"{op_id!r} is not a Fibonacci operator")

    @lru_cache(maxsize=None)
    def depth(o: str) -> int:
        preds = [p for p in pipeline.predecessors(o) if roles[p] == FIBONACCI]
        return 1 + max(depth(p) for p in preds) if preds else 0

    return base_n + depth(op_id) * fib_step


def random_instance(seed: int, max_ops: int = 8, max_images: int = 3,
                    edge_prob: float = 0.35, tag_pool: int = 4) -> tuple[Pipeline, tuple[Image, ...]]:
    """Small random grouping instance in which every operator is satisfiable."""
    rng = random.Random(seed)
    tags = [f"t{i}" for i in range(1, tag_pool + 1)]
    images = []
    for i in range(rng.randint(1, max_images)):
        k = rng.randint(1, tag_pool)
        images.append(Image(f"img-{i + 1}", frozenset(rng.sample(tags, k))))
    ops = []
    for i in range(rng.randint(1, max_ops)):
        host = rng.choice(images)
        k = rng.randint(1, min(2, len(host.tags)))
        ops.append(Operator(f"op{i + 1}", frozenset(rng.sample(sorted(host.tags), k))))
    edges = []
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            if rng.random() < edge_prob:
                a, b = (ops[i].id, ops[j].id) if rng.random() < 0.5 else (ops[j].id, ops[i].id)
                edges.append(Edge(a, b))
    return Pipeline(tuple(ops), tuple(edges)), tuple(images)
