"""Command-line entry point: ``pipeplan <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import bench
from .errors import PipeplanError
from .model import (
    catalog_to_dict,
    config_from_dict,
    config_to_dict,
    dumps,
    edge_counts,
    load_catalog,
    load_pipeline,
    pipeline_to_dict,
)
from .simulator import SimParams, run_repetitions
from .strategies import StrategyKind, run_strategy
from .workload import TOPOLOGIES, WorkloadParams, generate_pipeline

STRATEGIES = [k.value for k in StrategyKind]


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise PipeplanError(f"cannot write {path}: {exc.strerror}") from exc


def _sim_params(args) -> SimParams:
    sim = SimParams.load(args.sim_params) if args.sim_params else SimParams()
    overrides = {name: getattr(args, name) for name in
                 ("t_pod", "t_pull", "l_intra", "l_inter", "t_unit", "jitter_seed")
                 if getattr(args, name) is not None}
    return replace(sim, **overrides)


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sim-params", help="JSON file with simulator parameters")
    p.add_argument("--t-pod", type=float)
    p.add_argument("--t-pull", type=float)
    p.add_argument("--l-intra", type=float)
    p.add_argument("--l-inter", type=float)
    p.add_argument("--t-unit", type=float)
    p.add_argument("--jitter-seed", type=int)


def _add_workload_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", choices=TOPOLOGIES, default="line")
    p.add_argument("--special-ops", type=int, default=1)
    p.add_argument("--fib-step", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--base-n", type=int, default=5)
    p.add_argument("--literal-tags", action="store_true",
                   help="images also carry the default tag (single-group trivially feasible)")


def _workload(args) -> WorkloadParams:
    return WorkloadParams(topology=args.topology, special_ops=args.special_ops,
                          fib_step=args.fib_step, seed=args.seed, rounds=args.rounds,
                          base_n=args.base_n, literal_tags=args.literal_tags)


def _instance(args):
    """Pipeline and catalog either from files or from the workload generator."""
    if getattr(args, "pipeline", None):
        if not args.images:
            raise PipeplanError("--pipeline needs --images")
        return load_pipeline(args.pipeline), load_catalog(args.images)
    return generate_pipeline(_workload(args))


# --- commands -------------------------------------------------------------------

def cmd_generate(args) -> int:
    pipeline, images = generate_pipeline(_workload(args))
    _emit(dumps(pipeline_to_dict(pipeline)), args.out)
    images_path = args.images or (str(Path(args.out).with_name("images.json")) if args.out else None)
    if images_path:
        _emit(dumps(catalog_to_dict(images)), images_path)
    return 0


def cmd_optimize(args) -> int:
    pipeline, images = _instance(args)
    if args.planner == "pddl-export":
        if not args.out:
            raise PipeplanError("--planner pddl-export needs --out DIR")
        bench.export_pddl(pipeline, images, args.strategy, args.out)
        print(f"wrote {args.out}/domain.pddl and {args.out}/problem.pddl", file=sys.stderr)
        return 0
    config, plan = run_strategy(args.strategy, pipeline, images, seed=args.seed,
                                allow_universal=args.allow_universal_image)
    intra, inter = edge_counts(config)
    cost = f", plan cost {plan.total_cost}" if plan else ""
    print(f"{args.strategy}: {len(config.groups)} groups, {intra} intra / {inter} inter edges{cost}",
          file=sys.stderr)
    _emit(dumps(config_to_dict(config)), args.out)
    return 0


def cmd_simulate(args) -> int:
    data = json.loads(Path(args.config).read_text())
    config = config_from_dict(data, load_catalog(args.images))
    workload = WorkloadParams(fib_step=args.fib_step, base_n=args.base_n, rounds=args.rounds)
    results = run_repetitions(config, workload, _sim_params(args), args.reps)
    _, inter = edge_counts(config)
    if args.format == "json":
        payload = [dict(r.to_dict(), rep=i, group_count=len(config.groups), inter_edges=inter)
                   for i, r in enumerate(results)]
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = ["rep,cold,group_count,inter_edges,setup_time,execution_time,total_time"]
        for i, r in enumerate(results):
            lines.append(f"{i},{'true' if r.cold else 'false'},{len(config.groups)},{inter},"
                         f"{r.setup_time:.4f},{r.execution_time:.4f},{r.total_time:.4f}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_bench(args) -> int:
    spec = bench.ExperimentSpec(
        topologies=tuple(args.topology), special_ops=tuple(args.special_ops),
        fib_steps=tuple(args.fib_step), strategies=tuple(args.strategy), seeds=tuple(args.seed),
        reps=args.reps, sim=_sim_params(args), allow_universal=args.allow_universal_image)
    rows = bench.run_matrix(spec, jobs=args.jobs)
    text = bench.write_rows(rows, args.out, args.format)
    if args.out is None:
        sys.stdout.write(text)
    if args.summary:
        _emit(bench.summary_to_csv(bench.summarize(rows)), args.summary)
    errors = sum(1 for r in rows if r.error)
    if errors:
        print(f"{errors} error rows", file=sys.stderr)
    return 1 if errors and args.strict else 0


def cmd_pddl_export(args) -> int:
    pipeline, images = _instance(args)
    bench.export_pddl(pipeline, images, args.strategy, args.out)
    print(f"wrote {args.out}/domain.pddl and {args.out}/problem.pddl", file=sys.stderr)
    return 0


def cmd_pddl_import(args) -> int:
    pipeline, images = _instance(args)
    config, plan = bench.import_plan(Path(args.plan).read_text(), pipeline, images, args.strategy)
    if args.config_out:
        _emit(dumps(config_to_dict(config)), args.config_out)
    workload = _workload(args)
    cell = (args.topology, args.special_ops, args.fib_step, args.strategy, args.seed)
    rows = bench.rows_for_config(cell, config, plan, workload, _sim_params(args), args.reps)
    text = bench.write_rows(rows, args.out, args.format)
    if args.out is None:
        sys.stdout.write(text)
    return 0


def cmd_summarize(args) -> int:
    rows = bench.read_rows(getattr(args, "in"))
    _emit(bench.summary_to_csv(bench.summarize(rows)), args.out)
    return 0


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pipeplan",
                                     description="Group pipeline operators onto images and benchmark the groupings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic pipeline and its image catalog")
    _add_workload_flags(p)
    p.add_argument("--out", help="pipeline JSON path (stdout if omitted)")
    p.add_argument("--images", help="catalog JSON path (default: images.json next to --out)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optimize", help="group a pipeline with one strategy")
    _add_workload_flags(p)
    p.add_argument("--pipeline", help="pipeline JSON (otherwise generated from workload flags)")
    p.add_argument("--images", help="image catalog JSON")
    p.add_argument("--strategy", choices=STRATEGIES, default="connection")
    p.add_argument("--allow-universal-image", action="store_true")
    p.add_argument("--planner", choices=("builtin", "pddl-export"), default="builtin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="simulate a grouped pipeline")
    p.add_argument("--config", required=True, help="grouped pipeline JSON from 'optimize'")
    p.add_argument("--images", required=True)
    p.add_argument("--fib-step", type=int, default=1)
    p.add_argument("--base-n", type=int, default=5)
    p.add_argument("--rounds", type=int, default=5)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    _add_sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run the experiment matrix")
    p.add_argument("--topology", nargs="+", choices=TOPOLOGIES, default=list(TOPOLOGIES))
    p.add_argument("--special-ops", nargs="+", type=int, default=[2, 4])
    p.add_argument("--fib-step", nargs="+", type=int, default=[1, 2, 3])
    p.add_argument("--strategy", nargs="+", choices=STRATEGIES, default=STRATEGIES)
    p.add_argument("--seed", nargs="+", type=int, default=[1])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--allow-universal-image", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--summary", help="also write a summary CSV here")
    p.add_argument("--strict", action="store_true", help="exit nonzero if any row is an error row")
    p.add_argument("--jobs", type=int, default=1)
    _add_sim_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("pddl", help="PDDL export/import")
    psub = p.add_subparsers(dest="pddl_command", required=True)
    e = psub.add_parser("export", help="write domain.pddl and problem.pddl")
    _add_workload_flags(e)
    e.add_argument("--pipeline")
    e.add_argument("--images")
    e.add_argument("--strategy", choices=("connection", "node"), default="connection")
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=cmd_pddl_export)
    i = psub.add_parser("import", help="read an external plan and simulate the grouping")
    _add_workload_flags(i)
    i.add_argument("--pipeline")
    i.add_argument("--images")
    i.add_argument("--strategy", choices=("connection", "node"), default="connection")
    i.add_argument("--plan", required=True)
    i.add_argument("--reps", type=int, default=5)
    i.add_argument("--format", choices=("csv", "json"), default="csv")
    i.add_argument("--out")
    i.add_argument("--config-out", help="also write the grouped pipeline JSON")
    _add_sim_flags(i)
    i.set_defaults(func=cmd_pddl_import)

    p = sub.add_parser("summarize", help="mean/std per cell and cache state")
    p.add_argument("--in", required=True, help="results CSV or JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_summarize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PipeplanError, ValueError, OSError) as exc:
        print(f"pipeplan: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
