"""Pipeline formalism: operators, images, groups, and the grouping objective.

All values are immutable. Operators keep their declaration order, which the
planner relies on as its fixed assignment order.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InvalidConfigError, PipelineError

UNIVERSAL_IMAGE_ID = "img-universal"


@dataclass(frozen=True)
class Operator:
    id: str
    tags: frozenset[str]
    sdk: str = "golang"

    def __post_init__(self):
        object.__setattr__(self, "tags", frozenset(self.tags))
        if not self.id:
            raise PipelineError("operator id must be non-empty")
        if not self.tags:
            raise PipelineError(f"operator {self.id!r} has no required tags")
        if any(not t for t in self.tags):
            raise PipelineError(f"operator {self.id!r} has an empty tag name")


@dataclass(frozen=True)
class Image:
    id: str
    tags: frozenset[str]
    # synthetic images exist only to make the single-group baseline simulable
    simulation_only: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tags", frozenset(self.tags))
        if not self.id:
            raise PipelineError("image id must be non-empty")
        if not self.tags:
            raise PipelineError(f"image {self.id!r} has no tags")


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str


@dataclass(frozen=True)
class Group:
    id: str
    operator_ids: frozenset[str]
    image_id: str

    def __post_init__(self):
        object.__setattr__(self, "operator_ids", frozenset(self.operator_ids))
        if not self.operator_ids:
            raise PipelineError(f"group {self.id!r} is empty")


@dataclass(frozen=True)
class Pipeline:
    operators: tuple[Operator, ...]
    edges: tuple[Edge, ...] = ()
    groups: tuple[Group, ...] = ()  # pre-assigned, treated as fixed

    def __post_init__(self):
        object.__setattr__(self, "operators", tuple(self.operators))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "groups", tuple(self.groups))
        ids = [op.id for op in self.operators]
        dupes = [i for i, c in Counter(ids).items() if c > 1]
        if dupes:
            raise PipelineError(f"duplicate operator ids: {sorted(dupes)}")
        known = set(ids)
        seen = set()
        for e in self.edges:
            if e.src not in known or e.dst not in known:
                raise PipelineError(f"edge {e.src}->{e.dst} references an unknown operator")
            if e.src == e.dst:
                raise PipelineError(f"self-loop on {e.src!r}")
            if (e.src, e.dst) in seen:
                raise PipelineError(f"duplicate edge {e.src}->{e.dst}")
            seen.add((e.src, e.dst))
        placed: set[str] = set()
        gids = set()
        for g in self.groups:
            if g.id in gids:
                raise PipelineError(f"duplicate group id {g.id!r}")
            gids.add(g.id)
            unknown = g.operator_ids - known
            if unknown:
                raise PipelineError(f"group {g.id!r} references unknown operators {sorted(unknown)}")
            overlap = g.operator_ids & placed
            if overlap:
                raise PipelineError(f"pre-assigned groups overlap on {sorted(overlap)}")
            placed |= g.operator_ids

    @property
    def operator_ids(self) -> list[str]:
        return [op.id for op in self.operators]

    def operator(self, op_id: str) -> Operator:
        for op in self.operators:
            if op.id == op_id:
                return op
        raise KeyError(op_id)

    def neighbors(self, op_id: str) -> set[str]:
        out = set()
        for e in self.edges:
            if e.src == op_id:
                out.add(e.dst)
            elif e.dst == op_id:
                out.add(e.src)
        return out

    def successors(self, op_id: str) -> list[str]:
        return [e.dst for e in self.edges if e.src == op_id]

    def predecessors(self, op_id: str) -> list[str]:
        return [e.src for e in self.edges if e.dst == op_id]


@dataclass(frozen=True)
class StrategyWeights:
    intra: int
    inter: int
    group_cost: int

    def __post_init__(self):
        for name in ("intra", "inter", "group_cost"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"weight {name} must be a non-negative integer, got {value!r}")


CONNECTION_WEIGHTS = StrategyWeights(intra=5, inter=20, group_cost=50)
NODE_WEIGHTS = StrategyWeights(intra=5, inter=5, group_cost=1000)


@dataclass(frozen=True)
class Violation:
    kind: str  # "missing", "duplicate assignment", "unknown operator", "unknown image", "tag unsatisfied"
    operator_id: str | None = None
    group_id: str | None = None
    detail: str = ""

    def __str__(self):
        where = ", ".join(x for x in (
            f"operator {self.operator_id!r}" if self.operator_id else "",
            f"group {self.group_id!r}" if self.group_id else "",
        ) if x)
        return f"{self.kind} ({where}){': ' + self.detail if self.detail else ''}"


@dataclass(frozen=True)
class GroupingConfig:
    pipeline: Pipeline
    groups: tuple[Group, ...]
    images: tuple[Image, ...]  # catalog the group image ids resolve against

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "images", tuple(self.images))

    @property
    def image_map(self) -> dict[str, Image]:
        return {img.id: img for img in self.images}

    def group_of(self) -> dict[str, str]:
        """Operator id -> group id (last one wins on duplicates)."""
        return {op: g.id for g in self.groups for op in g.operator_ids}

    def distinct_images(self) -> set[str]:
        return {g.image_id for g in self.groups}


def satisfies(image: Image, operator: Operator) -> bool:
    return operator.tags <= image.tags


def validate_config(config: GroupingConfig) -> list[Violation]:
    report: list[Violation] = []
    images = config.image_map
    pipeline = config.pipeline
    known = {op.id: op for op in pipeline.operators}
    owner: dict[str, str] = {}
    for g in config.groups:
        image = images.get(g.image_id)
        if image is None:
            report.append(Violation("unknown image", group_id=g.id, detail=g.image_id))
        for op_id in sorted(g.operator_ids):
            if op_id not in known:
                report.append(Violation("unknown operator", op_id, g.id))
                continue
            if op_id in owner:
                report.append(Violation("duplicate assignment", op_id, g.id,
                                        f"already in group {owner[op_id]!r}"))
            else:
                owner[op_id] = g.id
            if image is not None and not satisfies(image, known[op_id]):
                missing = sorted(known[op_id].tags - image.tags)
                report.append(Violation("tag unsatisfied", op_id, g.id,
                                        f"image {image.id!r} lacks {missing}"))
    for op in pipeline.operators:
        if op.id not in owner:
            report.append(Violation("missing", op.id))
    # pre-assigned groups must survive intact
    for fixed in pipeline.groups:
        if not any(g.operator_ids == fixed.operator_ids and g.image_id == fixed.image_id
                   for g in config.groups):
            report.append(Violation("pre-assigned group altered", group_id=fixed.id))
    return report


def _require_valid(config: GroupingConfig) -> None:
    report = validate_config(config)
    if report:
        raise InvalidConfigError(report)


def edge_counts(config: GroupingConfig) -> tuple[int, int]:
    """Return (intra, inter) edge counts for a valid configuration."""
    _require_valid(config)
    owner = config.group_of()
    intra = sum(1 for e in config.pipeline.edges if owner[e.src] == owner[e.dst])
    return intra, len(config.pipeline.edges) - intra


def objective_cost(config: GroupingConfig, weights: StrategyWeights) -> int:
    intra, inter = edge_counts(config)
    return weights.group_cost * len(config.groups) + weights.intra * intra + weights.inter * inter


def universal_image(operators: Iterable[Operator]) -> Image:
    tags = frozenset().union(*(op.tags for op in operators))
    return Image(UNIVERSAL_IMAGE_ID, tags, simulation_only=True)


# --- JSON (de)serialization --------------------------------------------------

def pipeline_to_dict(pipeline: Pipeline, groups: Sequence[Group] | None = None) -> dict:
    out = {
        "operators": [
            {"id": op.id, "sdk": op.sdk, "tags": sorted(op.tags)} for op in pipeline.operators
        ],
        "edges": [{"from": e.src, "to": e.dst} for e in pipeline.edges],
    }
    groups = pipeline.groups if groups is None else groups
    if groups:
        out["groups"] = [_group_to_dict(g, pipeline) for g in groups]
    return out


def _group_to_dict(group: Group, pipeline: Pipeline) -> dict:
    order = {op_id: i for i, op_id in enumerate(pipeline.operator_ids)}
    members = sorted(group.operator_ids, key=lambda o: (order.get(o, len(order)), o))
    return {"id": group.id, "operators": members, "image": group.image_id}


def pipeline_from_dict(data: Mapping) -> Pipeline:
    try:
        operators = tuple(
            Operator(o["id"], frozenset(o["tags"]), o.get("sdk", "golang"))
            for o in data["operators"]
        )
        edges = tuple(Edge(e["from"], e["to"]) for e in data.get("edges", []))
        groups = tuple(
            Group(g["id"], frozenset(g["operators"]), g["image"]) for g in data.get("groups", [])
        )
    except (KeyError, TypeError) as exc:
        raise PipelineError(f"malformed pipeline JSON: {exc!r}") from exc
    return Pipeline(operators, edges, groups)


def catalog_to_dict(images: Sequence[Image]) -> dict:
    return {"images": [_image_to_dict(img) for img in images]}


def _image_to_dict(img: Image) -> dict:
    d = {"id": img.id, "tags": sorted(img.tags)}
    if img.simulation_only:
        d["simulation_only"] = True
    return d


def catalog_from_dict(data: Mapping) -> tuple[Image, ...]:
    try:
        images = tuple(
            Image(i["id"], frozenset(i["tags"]), bool(i.get("simulation_only", False)))
            for i in data["images"]
        )
    except (KeyError, TypeError) as exc:
        raise PipelineError(f"malformed image catalog JSON: {exc!r}") from exc
    ids = [img.id for img in images]
    if len(set(ids)) != len(ids):
        raise PipelineError("duplicate image ids in catalog")
    return images


def config_to_dict(config: GroupingConfig) -> dict:
    """Grouped pipeline JSON: the pipeline schema with every group filled in.

    Synthetic images that are not part of any catalog file travel along under
    ``synthetic_images`` so the file can be simulated on its own.
    """
    out = pipeline_to_dict(config.pipeline, config.groups)
    used = config.distinct_images()
    synthetic = [img for img in config.images if img.simulation_only and img.id in used]
    if synthetic:
        out["synthetic_images"] = [_image_to_dict(img) for img in synthetic]
    return out


def config_from_dict(data: Mapping, images: Sequence[Image]) -> GroupingConfig:
    """Inverse of :func:`config_to_dict`; every group becomes part of the config."""
    grouped = pipeline_from_dict(data)
    synthetic = catalog_from_dict({"images": data.get("synthetic_images", [])})
    base = Pipeline(grouped.operators, grouped.edges)
    return GroupingConfig(base, grouped.groups, tuple(images) + synthetic)


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def load_pipeline(path: str | Path) -> Pipeline:
    return pipeline_from_dict(json.loads(Path(path).read_text()))


def load_catalog(path: str | Path) -> tuple[Image, ...]:
    return catalog_from_dict(json.loads(Path(path).read_text()))
