"""Planning with state-dependent action costs, specialised to operator grouping.

The generic layer is small: facts are ground tuples ``(predicate, *args)``,
states are frozensets of facts under the closed-world assumption, and an
action's cost is a function of the state it is applied in.

The grouping encoding uses these predicates::

    (next ?o)              ?o is the operator to be assigned next
    (assigned ?o)          ?o sits in some group
    (in-group ?o ?g)       ?o sits in group ?g
    (group-exists ?g)
    (group-image ?g ?i)
    (group-empty ?g)       ?g was created and has no member yet
    (can-host ?g ?o)       the image chosen for ?g supports every tag of ?o

Operators are assigned in a fixed order and groups are created with
contiguous indices, so each grouping has a single canonical plan prefix.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import (
    InapplicableActionError,
    InvalidConfigError,
    NoPlanError,
    OracleTooLargeError,
    PipelineError,
    UnsatisfiableOperatorError,
)
from .model import (
    Group,
    GroupingConfig,
    Image,
    Pipeline,
    StrategyWeights,
    satisfies,
    validate_config,
)

Fact = tuple  # (predicate, *args), all str
State = frozenset

CREATE = "create-group"
ASSIGN = "assign-operator"


@dataclass(frozen=True)
class Condition:
    positive: frozenset = frozenset()
    negative: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "positive", frozenset(self.positive))
        object.__setattr__(self, "negative", frozenset(self.negative))
        if self.positive & self.negative:
            raise ValueError("condition requires and forbids the same fact")

    def holds(self, state: State) -> bool:
        return self.positive <= state and not (self.negative & state)


def _zero_cost(state: State) -> int:
    return 0


@dataclass(frozen=True)
class ActionInstance:
    name: str
    args: tuple[str, ...] = ()
    pre: Condition = field(default_factory=Condition, compare=False)
    add: frozenset = field(default=frozenset(), compare=False)
    delete: frozenset = field(default=frozenset(), compare=False)
    cost: Callable[[State], int] = field(default=_zero_cost, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        object.__setattr__(self, "add", frozenset(self.add))
        object.__setattr__(self, "delete", frozenset(self.delete))
        if self.add & self.delete:
            raise ValueError(f"action {self} adds and deletes the same fact")

    def __str__(self):
        return "(" + " ".join((self.name,) + self.args) + ")"


def apply(state: State, action: ActionInstance) -> State:
    if not action.pre.holds(state):
        raise InapplicableActionError(f"inapplicable action {action}")
    return (state | action.add) - action.delete


def plan_cost(actions: Iterable[ActionInstance], initial: State) -> int:
    """Sum of action costs, each evaluated in the state the action is applied in."""
    state = frozenset(initial)
    total = 0
    for action in actions:
        total += action.cost(state)
        state = apply(state, action)
    return total


@dataclass(frozen=True)
class Plan:
    actions: tuple[ActionInstance, ...]
    total_cost: int

    def __len__(self):
        return len(self.actions)

    def lines(self) -> list[str]:
        return [str(a) for a in self.actions]


class GroupingTask:
    """Ground planning task for grouping ``pipeline`` onto ``images``.

    Pre-assigned groups of the pipeline occupy indices 1..p with their image
    fixed; their members come first in the assignment order and may only join
    their own group. Free operators follow in declaration order and may only
    join groups p+1 and above.
    """

    def __init__(self, pipeline: Pipeline, images: Sequence[Image],
                 weights: StrategyWeights, max_groups: int | None = None):
        if not images:
            raise PipelineError("image catalog is empty")
        self.pipeline = pipeline
        self.images = tuple(images)
        self.weights = weights
        image_map = {img.id: img for img in self.images}
        if len(image_map) != len(self.images):
            raise PipelineError("duplicate image ids in catalog")

        ops = {op.id: op for op in pipeline.operators}
        fixed_members: list[list[str]] = []
        self.pinned: dict[str, int] = {}
        for k, g in enumerate(pipeline.groups, start=1):
            img = image_map.get(g.image_id)
            if img is None:
                raise PipelineError(f"pre-assigned group {g.id!r} uses unknown image {g.image_id!r}")
            for op_id in g.operator_ids:
                if not satisfies(img, ops[op_id]):
                    raise PipelineError(
                        f"pre-assigned group {g.id!r}: image {img.id!r} does not support {op_id!r}")
                self.pinned[op_id] = k
            fixed_members.append([o for o in pipeline.operator_ids if o in g.operator_ids])
        self.n_fixed = len(pipeline.groups)
        self.fixed_images = [g.image_id for g in pipeline.groups]
        free = [o for o in pipeline.operator_ids if o not in self.pinned]
        for op_id in free:
            if not any(satisfies(img, ops[op_id]) for img in self.images):
                raise UnsatisfiableOperatorError(op_id)
        self.order: list[str] = [o for members in fixed_members for o in members] + free
        self.index = {o: i for i, o in enumerate(self.order)}

        if max_groups is None:
            max_groups = self.n_fixed + len(free)
        max_groups = max(1, max_groups)
        if max_groups < self.n_fixed:
            raise PipelineError(f"max_groups={max_groups} is below the {self.n_fixed} pre-assigned groups")
        self.max_groups = max_groups
        self.group_names = [f"g{k}" for k in range(1, max_groups + 1)]

        self.neighbors: dict[str, frozenset[str]] = {
            o: frozenset(pipeline.neighbors(o)) for o in self.order
        }
        self.actions: dict[tuple[str, tuple[str, ...]], ActionInstance] = {}
        self._ground(ops)

        self.initial: State = frozenset({("next", self.order[0])}) if self.order else frozenset()
        self.goal = Condition(
            positive={("assigned", o) for o in self.order},
            negative={("group-empty", g) for g in self.group_names},
        )

    # -- grounding ---------------------------------------------------------

    def _ground(self, ops) -> None:
        w = self.weights
        for k in range(1, self.max_groups + 1):
            g = self.group_names[k - 1]
            if k <= self.n_fixed:
                candidates = [self.image(self.fixed_images[k - 1])]
            else:
                candidates = sorted(self.images, key=lambda i: i.id)
            for img in candidates:
                if k <= self.n_fixed:
                    hostable = [o for o in self.order if self.pinned.get(o) == k]
                else:
                    hostable = [o for o in self.order
                                if o not in self.pinned and satisfies(img, ops[o])]
                pos, neg = set(), {("group-exists", g)}
                if k > 1:
                    prev = self.group_names[k - 2]
                    pos.add(("group-exists", prev))
                    neg.add(("group-empty", prev))
                add = {("group-exists", g), ("group-image", g, img.id), ("group-empty", g)}
                add |= {("can-host", g, o) for o in hostable}
                self._register(ActionInstance(
                    CREATE, (g, img.id), Condition(pos, neg), add, frozenset(),
                    _constant(w.group_cost)))

        for i, o in enumerate(self.order):
            nxt = self.order[i + 1] if i + 1 < len(self.order) else None
            pin = self.pinned.get(o)
            ks = [pin] if pin is not None else range(self.n_fixed + 1, self.max_groups + 1)
            for k in ks:
                g = self.group_names[k - 1]
                add = {("assigned", o), ("in-group", o, g)}
                if nxt is not None:
                    add.add(("next", nxt))
                self._register(ActionInstance(
                    ASSIGN, (o, g),
                    Condition({("next", o), ("can-host", g, o)}),
                    add, {("next", o), ("group-empty", g)},
                    _assign_cost(self.neighbors[o], g, w)))

    def _register(self, action: ActionInstance) -> None:
        self.actions[(action.name, action.args)] = action

    # -- lookups -------------------------------------------------------------

    def image(self, image_id: str) -> Image:
        for img in self.images:
            if img.id == image_id:
                return img
        raise KeyError(image_id)

    def action(self, name: str, args: Sequence[str]) -> ActionInstance:
        return self.actions[(name, tuple(args))]

    def group_id(self, k: int) -> str:
        """Config-level id for group index ``k`` (1-based)."""
        if k <= self.n_fixed:
            return self.pipeline.groups[k - 1].id
        taken = {g.id for g in self.pipeline.groups}
        name = f"g{k}"
        while name in taken:
            name += "'"
        return name

    def is_goal(self, state: State) -> bool:
        return self.goal.holds(state)


def _constant(value: int) -> Callable[[State], int]:
    def cost(state: State) -> int:
        return value
    return cost


def _assign_cost(neighbors: frozenset[str], group: str, w: StrategyWeights) -> Callable[[State], int]:
    # each edge is charged once, when its second endpoint is placed
    def cost(state: State) -> int:
        total = 0
        for j in neighbors:
            if ("in-group", j, group) in state:
                total += w.intra
            elif ("assigned", j) in state:
                total += w.inter
        return total
    return cost


def build_grouping_task(pipeline: Pipeline, images: Sequence[Image],
                        weights: StrategyWeights, max_groups: int | None = None) -> GroupingTask:
    return GroupingTask(pipeline, images, weights, max_groups)


# --- optimal search -----------------------------------------------------------

@dataclass
class _Node:
    parent: int
    steps: tuple[tuple[str, tuple[str, ...]], ...]
    cursor: int
    assign: tuple[int, ...]      # group index per placed operator, in task order
    group_images: tuple[str, ...]


def solve_optimal(task: GroupingTask, lower_bound: bool = False) -> Plan:
    """Uniform-cost search for a minimum-cost grouping plan.

    Each expansion places the next operator, either joining an existing group
    or creating a fresh group immediately followed by the assignment. Every
    reachable configuration has such a plan with the same cost, so optimality
    is preserved. Duplicate detection keys states on what still influences
    future costs: the groups of operators that have unplaced neighbours, and
    the images of groups that can still be joined.

    With ``lower_bound`` the search becomes A* using (edges still to be
    charged) x min(intra, inter), which is consistent.
    """
    w = task.weights
    order = task.order
    n = len(order)
    idx = task.index
    prev_nbrs = [sorted(idx[j] for j in task.neighbors[o] if idx[j] < i) for i, o in enumerate(order)]
    frontier = [[j for j in range(c) if any(idx[x] >= c for x in task.neighbors[order[j]])]
                for c in range(n + 1)]
    remaining_edges = [sum(len(prev_nbrs[i]) for i in range(c, n)) for c in range(n + 1)]
    edge_floor = min(w.intra, w.inter)
    capped = task.max_groups < n
    op_objs = {op.id: op for op in task.pipeline.operators}
    hosts = {img.id: {o for o in order if satisfies(img, op_objs[o])} for img in task.images}
    images_sorted = sorted(img.id for img in task.images)
    p = task.n_fixed

    def key_of(node: _Node):
        c = node.cursor
        by_group: dict[int, list[int]] = {}
        for j in frontier[c]:
            by_group.setdefault(node.assign[j], []).append(j)
        fixed = tuple((k, tuple(by_group.get(k, ()))) for k in range(1, min(p, len(node.group_images)) + 1))
        busy = sorted((node.group_images[k - 1], tuple(m)) for k, m in by_group.items() if k > p)
        idle = sorted({node.group_images[k - 1] for k in range(p + 1, len(node.group_images) + 1)
                       if k not in by_group})
        return (c, fixed, tuple(busy), tuple(idle), len(node.group_images) if capped else None)

    def h(cursor: int) -> int:
        return remaining_edges[cursor] * edge_floor if lower_bound else 0

    nodes = [_Node(-1, (), 0, (), ())]
    counter = itertools.count()
    frontier_heap = [(h(0), 0, next(counter), 0)]
    closed = set()
    while frontier_heap:
        f, g, _, nid = heapq.heappop(frontier_heap)
        node = nodes[nid]
        key = key_of(node)
        if key in closed:
            continue
        closed.add(key)
        if node.cursor == n:
            return Plan(tuple(_reconstruct(task, nodes, nid)), g)

        i = node.cursor
        o = order[i]
        pin = task.pinned.get(o)

        def edge_cost(k: int) -> int:
            return sum(w.intra if node.assign[j] == k else w.inter for j in prev_nbrs[i])

        succ = []
        for k, img in enumerate(node.group_images, start=1):
            allowed = (k == pin) if pin is not None else k > p
            if allowed and o in hosts[img]:
                succ.append((edge_cost(k), ((ASSIGN, (o, task.group_names[k - 1])),), k, img))
        k_new = len(node.group_images) + 1
        if k_new <= task.max_groups:
            if pin is not None:
                choices = [task.fixed_images[k_new - 1]] if k_new == pin else []
            else:
                choices = [im for im in images_sorted if o in hosts[im]] if k_new > p else []
            gname = task.group_names[k_new - 1] if k_new <= len(task.group_names) else None
            for img in choices:
                succ.append((w.group_cost + edge_cost(k_new),
                             ((CREATE, (gname, img)), (ASSIGN, (o, gname))), k_new, img))
        # assign-operator sorts before create-group; insertion order breaks cost ties
        for step_cost, steps, k, img in succ:
            images_after = node.group_images if k <= len(node.group_images) else node.group_images + (img,)
            child = _Node(nid, steps, i + 1, node.assign + (k,), images_after)
            nodes.append(child)
            g2 = g + step_cost
            heapq.heappush(frontier_heap, (g2 + h(i + 1), g2, next(counter), len(nodes) - 1))
    raise NoPlanError("no plan: the grouping task has no solution within max_groups")


def _reconstruct(task: GroupingTask, nodes: list[_Node], nid: int) -> list[ActionInstance]:
    chunks = []
    while nid > 0:
        node = nodes[nid]
        chunks.append(node.steps)
        nid = node.parent
    return [task.action(name, args) for steps in reversed(chunks) for name, args in steps]


# --- plan <-> configuration -----------------------------------------------------

def execute_plan(task: GroupingTask, actions: Sequence[ActionInstance]) -> tuple[State, int]:
    """Apply ``actions`` from the initial state; return the final state and cost."""
    state = task.initial
    total = 0
    for pos, action in enumerate(actions, start=1):
        try:
            total += action.cost(state)
            state = apply(state, action)
        except InapplicableActionError as exc:
            raise InapplicableActionError(f"step {pos}: {exc}") from None
    return state, total


def plan_to_config(plan: Plan, task: GroupingTask) -> GroupingConfig:
    state, _ = execute_plan(task, plan.actions)
    if not task.is_goal(state):
        raise InapplicableActionError("plan does not reach the goal")
    groups = []
    for k, g in enumerate(task.group_names, start=1):
        if ("group-exists", g) not in state:
            continue
        image = next(f[2] for f in state if f[0] == "group-image" and f[1] == g)
        members = frozenset(f[1] for f in state if f[0] == "in-group" and f[2] == g)
        groups.append(Group(task.group_id(k), members, image))
    config = GroupingConfig(task.pipeline, tuple(groups), task.images)
    report = validate_config(config)
    if report:
        raise InvalidConfigError(report)
    return config


def config_to_plan(config: GroupingConfig, task: GroupingTask) -> Plan:
    """Re-encode a configuration as the canonical plan that produces it."""
    report = validate_config(config)
    if report:
        raise InvalidConfigError(report)
    owner = {op: g for g in config.groups for op in g.operator_ids}
    index_of: dict[str, int] = {}
    for k, fixed in enumerate(task.pipeline.groups, start=1):
        match = owner[next(iter(fixed.operator_ids))]
        index_of[match.id] = k
    actions = []
    created = 0
    for o in task.order:
        group = owner[o]
        if group.id not in index_of:
            index_of[group.id] = max([task.n_fixed, *index_of.values()]) + 1
        k = index_of[group.id]
        if k > task.max_groups:
            raise NoPlanError(f"configuration needs more than max_groups={task.max_groups} groups")
        gname = task.group_names[k - 1]
        if k > created:
            actions.append(task.action(CREATE, (gname, group.image_id)))
            created = k
        actions.append(task.action(ASSIGN, (o, gname)))
    _, cost = execute_plan(task, actions)
    return Plan(tuple(actions), cost)


# --- brute-force oracle -----------------------------------------------------------

ORACLE_CAP = 10


def brute_force_grouping(pipeline: Pipeline, images: Sequence[Image], weights: StrategyWeights,
                         cap: int = ORACLE_CAP) -> tuple[GroupingConfig, int]:
    """Enumerate every set partition of the free operators and keep the cheapest.

    Pre-assigned groups are kept as they are. The image of a block does not
    enter the objective, so the first catalog image supporting the whole
    block is used.
    """
    ops = list(pipeline.operators)
    if len(ops) > cap:
        raise OracleTooLargeError(f"instance too large for oracle: {len(ops)} operators > cap {cap}")
    fixed_of = {o: g.id for g in pipeline.groups for o in g.operator_ids}
    free = [op for op in ops if op.id not in fixed_of]
    for op in free:
        if not any(satisfies(img, op) for img in images):
            raise UnsatisfiableOperatorError(op.id)
    pos = {op.id: i for i, op in enumerate(free)}
    fixed_edges_intra = fixed_edges_inter = 0
    mixed = []  # edges with at least one free endpoint
    for e in pipeline.edges:
        if e.src in fixed_of and e.dst in fixed_of:
            if fixed_of[e.src] == fixed_of[e.dst]:
                fixed_edges_intra += 1
            else:
                fixed_edges_inter += 1
        else:
            mixed.append(e)

    best_cost = None
    best_labels = None
    labels = [0] * len(free)
    block_images: list[list[Image]] = []

    def evaluate() -> int:
        intra = fixed_edges_intra
        inter = fixed_edges_inter
        for e in mixed:
            if e.src in pos and e.dst in pos and labels[pos[e.src]] == labels[pos[e.dst]]:
                intra += 1
            else:
                inter += 1
        n_groups = len(pipeline.groups) + len(block_images)
        return weights.group_cost * n_groups + weights.intra * intra + weights.inter * inter

    def rec(i: int) -> None:
        nonlocal best_cost, best_labels
        if i == len(free):
            cost = evaluate()
            if best_cost is None or cost < best_cost:
                best_cost, best_labels = cost, (list(labels), [imgs[0] for imgs in block_images])
            return
        op = free[i]
        for b in range(len(block_images)):
            narrowed = [img for img in block_images[b] if satisfies(img, op)]
            if not narrowed:
                continue
            saved = block_images[b]
            block_images[b] = narrowed
            labels[i] = b
            rec(i + 1)
            block_images[b] = saved
        fresh = [img for img in images if satisfies(img, op)]
        block_images.append(fresh)
        labels[i] = len(block_images) - 1
        rec(i + 1)
        block_images.pop()

    rec(0)
    assert best_labels is not None
    label_list, block_imgs = best_labels
    groups = list(pipeline.groups)
    taken = {g.id for g in groups}
    for b, img in enumerate(block_imgs):
        gid = f"b{b + 1}"
        while gid in taken:
            gid += "'"
        members = frozenset(op.id for op, lab in zip(free, label_list) if lab == b)
        groups.append(Group(gid, members, img.id))
    return GroupingConfig(pipeline, tuple(groups), tuple(images)), best_cost
