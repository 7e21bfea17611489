"""The four grouping strategies: connection, node, random and default."""
from __future__ import annotations

import random
from enum import Enum
from typing import Sequence

from .errors import InfeasibleBaselineError, InvalidConfigError, UnsatisfiableOperatorError
from .model import (
    CONNECTION_WEIGHTS,
    NODE_WEIGHTS,
    Group,
    GroupingConfig,
    Image,
    Pipeline,
    StrategyWeights,
    satisfies,
    universal_image,
    validate_config,
)
from .planning import Plan, build_grouping_task, plan_to_config, solve_optimal


class StrategyKind(str, Enum):
    CONNECTION = "connection"
    NODE = "node"
    RANDOM = "random"
    DEFAULT = "default"


STRATEGY_WEIGHTS = {
    StrategyKind.CONNECTION: CONNECTION_WEIGHTS,
    StrategyKind.NODE: NODE_WEIGHTS,
}


def plan_strategy(pipeline: Pipeline, images: Sequence[Image],
                  weights: StrategyWeights) -> tuple[GroupingConfig, Plan]:
    task = build_grouping_task(pipeline, images, weights)
    plan = solve_optimal(task)
    return plan_to_config(plan, task), plan


def connection_strategy(pipeline: Pipeline, images: Sequence[Image]) -> GroupingConfig:
    return plan_strategy(pipeline, images, CONNECTION_WEIGHTS)[0]


def node_strategy(pipeline: Pipeline, images: Sequence[Image]) -> GroupingConfig:
    return plan_strategy(pipeline, images, NODE_WEIGHTS)[0]


def random_strategy(pipeline: Pipeline, images: Sequence[Image], seed: int) -> GroupingConfig:
    """Random baseline: draw an image, then a random-size subset of what it can host.

    Repeats until every operator is grouped. Pre-assigned groups are kept.
    """
    rng = random.Random(seed)
    images = list(images)
    fixed = {o for g in pipeline.groups for o in g.operator_ids}
    ungrouped = [op for op in pipeline.operators if op.id not in fixed]
    for op in ungrouped:
        if not any(satisfies(img, op) for img in images):
            raise UnsatisfiableOperatorError(op.id)
    groups = list(pipeline.groups)
    taken = {g.id for g in groups}
    counter = 0
    while ungrouped:
        image = rng.choice(images)
        hostable = [op for op in ungrouped if satisfies(image, op)]
        if not hostable:
            continue
        m = rng.randint(1, len(hostable))
        picked = {op.id for op in rng.sample(hostable, m)}
        counter += 1
        gid = f"r{counter}"
        while gid in taken:
            gid += "'"
        groups.append(Group(gid, frozenset(picked), image.id))
        ungrouped = [op for op in ungrouped if op.id not in picked]
    return GroupingConfig(pipeline, tuple(groups), tuple(images))


def default_strategy(pipeline: Pipeline, images: Sequence[Image],
                     allow_universal: bool = False) -> GroupingConfig:
    """Everything not pre-assigned goes into one group.

    The first catalog image supporting all of those operators is used. If none
    exists and ``allow_universal`` is set, a synthetic simulation-only image
    with the union of the required tags is added to the configuration.
    """
    images = tuple(images)
    fixed = {o for g in pipeline.groups for o in g.operator_ids}
    rest = [op for op in pipeline.operators if op.id not in fixed]
    groups = list(pipeline.groups)
    if rest:
        image = next((img for img in images if all(satisfies(img, op) for op in rest)), None)
        if image is None:
            if not allow_universal:
                raise InfeasibleBaselineError(
                    "default baseline infeasible: no single image supports every operator")
            image = universal_image(rest)
            images = images + (image,)
        gid = "default"
        while gid in {g.id for g in groups}:
            gid += "'"
        groups.append(Group(gid, frozenset(op.id for op in rest), image.id))
    return GroupingConfig(pipeline, tuple(groups), images)


def run_strategy(kind: StrategyKind | str, pipeline: Pipeline, images: Sequence[Image], *,
                 seed: int = 0, allow_universal: bool = False) -> tuple[GroupingConfig, Plan | None]:
    """Dispatch by name; returns the configuration and, for planner strategies, the plan."""
    kind = StrategyKind(kind)
    if kind in STRATEGY_WEIGHTS:
        config, plan = plan_strategy(pipeline, images, STRATEGY_WEIGHTS[kind])
    elif kind is StrategyKind.RANDOM:
        config, plan = random_strategy(pipeline, images, seed), None
    else:
        config, plan = default_strategy(pipeline, images, allow_universal), None
    report = validate_config(config)
    if report:
        raise InvalidConfigError(report)
    return config, plan
