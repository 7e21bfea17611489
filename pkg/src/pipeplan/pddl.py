"""PDDL export of grouping tasks and import of external plan files.

The emitted domain targets the numeric fragment with conditional effects:
the state-dependent assignment cost becomes two quantified ``when`` effects
that increase ``total-cost`` once per already-placed neighbour. The built-in
solver in :mod:`pipeplan.planning` remains the reference semantics; plans
read back are re-validated against the ground task, and any cost reported
by the external planner is ignored.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InapplicableActionError, PipelineError, PlanParseError
from .planning import ASSIGN, CREATE, GroupingTask, Plan, apply

_VALID = re.compile(r"^[a-z][a-z0-9_-]*$")
_ARITY = {CREATE: 2, ASSIGN: 2}


@dataclass(frozen=True)
class PddlArtifacts:
    domain_text: str
    problem_text: str


def pddl_name(token: str) -> str:
    name = re.sub(r"[^a-z0-9_-]", "-", token.lower())
    if not name or not name[0].isalpha():
        name = "x-" + name
    return name


class NameTable:
    """Bijection between task identifiers and PDDL object names."""

    def __init__(self, task: GroupingTask):
        self.to_pddl: dict[tuple[str, str], str] = {}
        self.from_pddl: dict[str, tuple[str, str]] = {}
        tags = sorted({t for op in task.pipeline.operators for t in op.tags}
                      | {t for img in task.images for t in img.tags})
        for kind, values in (("operator", task.order), ("group", task.group_names),
                             ("image", [img.id for img in task.images]), ("tag", tags)):
            for value in values:
                name = pddl_name(value)
                if name in self.from_pddl:
                    other = self.from_pddl[name]
                    raise PipelineError(
                        f"PDDL name clash: {kind} {value!r} and {other[0]} {other[1]!r} both map to {name!r}")
                self.to_pddl[(kind, value)] = name
                self.from_pddl[name] = (kind, value)

    def name(self, kind: str, value: str) -> str:
        return self.to_pddl[(kind, value)]

    def lookup(self, name: str) -> tuple[str, str] | None:
        return self.from_pddl.get(name)


def emit_domain(task: GroupingTask) -> str:
    w = task.weights
    return f"""; operator grouping with state-dependent assignment costs
(define (domain pipeline-grouping)
  (:requirements :typing :negative-preconditions :disjunctive-preconditions
                 :quantified-preconditions :conditional-effects :numeric-fluents)
  (:types operator group image tag)
  (:predicates
    (edge ?a - operator ?b - operator)
    (requires ?o - operator ?t - tag)
    (supports ?i - image ?t - tag)
    (order-succ ?o - operator ?p - operator)
    (group-pred ?h - group ?g - group)
    (free-operator ?o - operator)
    (free-group ?g - group)
    (pinned ?o - operator ?g - group)
    (pinned-image ?g - group ?i - image)
    (next ?o - operator)
    (assigned ?o - operator)
    (in-group ?o - operator ?g - group)
    (group-exists ?g - group)
    (group-image ?g - group ?i - image)
    (group-empty ?g - group))
  (:functions (total-cost))

  (:action create-group
    :parameters (?g - group ?i - image)
    :precondition (and (not (group-exists ?g))
                       (or (free-group ?g) (pinned-image ?g ?i))
                       (forall (?h - group)
                         (imply (group-pred ?h ?g)
                                (and (group-exists ?h) (not (group-empty ?h))))))
    :effect (and (group-exists ?g) (group-image ?g ?i) (group-empty ?g)
                 (increase (total-cost) {w.group_cost})))

  (:action assign-operator
    :parameters (?o - operator ?g - group)
    :precondition (and (next ?o) (group-exists ?g)
                       (or (and (free-operator ?o) (free-group ?g)) (pinned ?o ?g))
                       (exists (?i - image)
                         (and (group-image ?g ?i)
                              (forall (?t - tag) (imply (requires ?o ?t) (supports ?i ?t))))))
    :effect (and (assigned ?o) (in-group ?o ?g) (not (next ?o)) (not (group-empty ?g))
                 (forall (?p - operator) (when (order-succ ?o ?p) (next ?p)))
                 (forall (?p - operator)
                   (when (and (or (edge ?o ?p) (edge ?p ?o)) (in-group ?p ?g))
                         (increase (total-cost) {w.intra})))
                 (forall (?p - operator)
                   (when (and (or (edge ?o ?p) (edge ?p ?o)) (assigned ?p) (not (in-group ?p ?g)))
                         (increase (total-cost) {w.inter})))))
)
"""


def emit_problem(task: GroupingTask, name: str = "pipeline") -> str:
    names = NameTable(task)
    op = lambda o: names.name("operator", o)  # noqa: E731
    grp = lambda g: names.name("group", g)  # noqa: E731
    img = lambda i: names.name("image", i)  # noqa: E731
    tag = lambda t: names.name("tag", t)  # noqa: E731
    tags = sorted({k[1] for k in names.to_pddl if k[0] == "tag"}, key=tag)

    lines = [f"(define (problem {pddl_name(name)})", "  (:domain pipeline-grouping)", "  (:objects"]
    lines.append("    " + " ".join(op(o) for o in task.order) + " - operator")
    lines.append("    " + " ".join(grp(g) for g in task.group_names) + " - group")
    lines.append("    " + " ".join(img(i.id) for i in task.images) + " - image")
    lines.append("    " + " ".join(tag(t) for t in tags) + " - tag)")
    init = ["(= (total-cost) 0)"]
    if task.order:
        init.append(f"(next {op(task.order[0])})")
    init += [f"(order-succ {op(a)} {op(b)})" for a, b in zip(task.order, task.order[1:])]
    init += [f"(edge {op(e.src)} {op(e.dst)})" for e in task.pipeline.edges]
    for o in task.order:
        init += [f"(requires {op(o)} {tag(t)})" for t in sorted(task.pipeline.operator(o).tags)]
    for i in task.images:
        init += [f"(supports {img(i.id)} {tag(t)})" for t in sorted(i.tags)]
    init += [f"(group-pred {grp(a)} {grp(b)})"
             for a, b in zip(task.group_names, task.group_names[1:])]
    for o in task.order:
        k = task.pinned.get(o)
        init.append(f"(pinned {op(o)} {grp(task.group_names[k - 1])})" if k else f"(free-operator {op(o)})")
    for k, g in enumerate(task.group_names, start=1):
        if k <= task.n_fixed:
            init.append(f"(pinned-image {grp(g)} {img(task.fixed_images[k - 1])})")
        else:
            init.append(f"(free-group {grp(g)})")
    lines.append("  (:init")
    lines += ["    " + fact for fact in init]
    lines[-1] += ")"
    lines.append("  (:goal (and")
    lines += [f"    (assigned {op(o)})" for o in task.order]
    lines.append("    (forall (?g - group) (not (group-empty ?g)))))")
    lines.append("  (:metric minimize (total-cost))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def emit_pddl(task: GroupingTask, name: str = "pipeline") -> PddlArtifacts:
    return PddlArtifacts(emit_domain(task), emit_problem(task, name))


def serialize_plan(plan: Plan, task: GroupingTask) -> str:
    names = NameTable(task)
    kinds = {CREATE: ("group", "image"), ASSIGN: ("operator", "group")}
    out = []
    for action in plan.actions:
        args = [names.name(k, a) for k, a in zip(kinds[action.name], action.args)]
        out.append("(" + " ".join([action.name, *args]) + ")")
    out.append(f"; cost = {plan.total_cost} (general cost)")
    return "\n".join(out) + "\n"


_STEP_PREFIX = re.compile(r"^\d+(\.\d+)?\s*:\s*")


def parse_plan(text: str, task: GroupingTask) -> Plan:
    """Read one action per line, ``;`` comments ignored, and validate it against ``task``."""
    names = NameTable(task)
    kinds = {CREATE: ("group", "image"), ASSIGN: ("operator", "group")}
    actions = []
    state = task.initial
    total = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        line = _STEP_PREFIX.sub("", line)
        if not (line.startswith("(") and line.endswith(")")):
            raise PlanParseError(f"expected an s-expression, got {raw.strip()!r}", lineno)
        tokens = line[1:-1].lower().split()
        if not tokens:
            raise PlanParseError("empty action", lineno)
        name, args = tokens[0], tokens[1:]
        if name not in _ARITY:
            raise PlanParseError(f"unknown action {name!r}", lineno)
        if len(args) != _ARITY[name]:
            raise PlanParseError(f"{name} takes {_ARITY[name]} arguments, got {len(args)}", lineno)
        ids = []
        for kind, arg in zip(kinds[name], args):
            entry = names.lookup(arg)
            if entry is None or entry[0] != kind:
                raise PlanParseError(f"{arg!r} is not a known {kind}", lineno)
            ids.append(entry[1])
        action = task.actions.get((name, tuple(ids)))
        if action is None:
            raise PlanParseError(f"action {line} is not allowed in this task", lineno)
        try:
            total += action.cost(state)
            state = apply(state, action)
        except InapplicableActionError:
            raise PlanParseError(f"inapplicable action {line}", lineno) from None
        actions.append(action)
    if not task.is_goal(state):
        raise PlanParseError("plan does not reach the goal: some operators are unassigned "
                             "or a created group is empty")
    return Plan(tuple(actions), total)
