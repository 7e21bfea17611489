"""Optimal grouping of data-pipeline operators onto container images."""
from .model import (
    CONNECTION_WEIGHTS,
    NODE_WEIGHTS,
    Edge,
    Group,
    GroupingConfig,
    Image,
    Operator,
    Pipeline,
    StrategyWeights,
    edge_counts,
    objective_cost,
    satisfies,
    validate_config,
)
from .planning import brute_force_grouping, build_grouping_task, plan_to_config, solve_optimal
from .simulator import SimParams, run_repetitions, simulate, work_units
from .strategies import (
    StrategyKind,
    connection_strategy,
    default_strategy,
    node_strategy,
    random_strategy,
    run_strategy,
)
from .workload import WorkloadParams, generate_pipeline

__version__ = "0.1.0"

__all__ = [
    "CONNECTION_WEIGHTS", "NODE_WEIGHTS", "Edge", "Group", "GroupingConfig", "Image", "Operator",
    "Pipeline", "StrategyWeights", "edge_counts", "objective_cost", "satisfies", "validate_config",
    "brute_force_grouping", "build_grouping_task", "plan_to_config", "solve_optimal",
    "SimParams", "run_repetitions", "simulate", "work_units",
    "StrategyKind", "connection_strategy", "default_strategy", "node_strategy", "random_strategy",
    "run_strategy", "WorkloadParams", "generate_pipeline",
]
