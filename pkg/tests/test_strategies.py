import pytest

from pipeplan.errors import InfeasibleBaselineError, UnsatisfiableOperatorError
from pipeplan.model import (
    CONNECTION_WEIGHTS,
    NODE_WEIGHTS,
    Edge,
    Group,
    Image,
    Pipeline,
    edge_counts,
    objective_cost,
    pipeline_from_dict,
    catalog_from_dict,
    validate_config,
)
from pipeplan.planning import brute_force_grouping
from pipeplan.strategies import (
    StrategyKind,
    connection_strategy,
    default_strategy,
    node_strategy,
    random_strategy,
    run_strategy,
)
from pipeplan.workload import WorkloadParams, generate_pipeline, random_instance

from conftest import DEFAULT_IMAGE, chain, op

# two groups either way, but the node profile does not care where the cut falls
NODE_BLIND = (
    {"operators": [{"id": "op1", "tags": ["t3", "t4"]}, {"id": "op2", "tags": ["t3"]},
                   {"id": "op3", "tags": ["t4"]}, {"id": "op4", "tags": ["t2", "t4"]},
                   {"id": "op5", "tags": ["t2"]}, {"id": "op6", "tags": ["t1"]},
                   {"id": "op7", "tags": ["t1"]}],
     "edges": [{"from": "op1", "to": "op3"}, {"from": "op4", "to": "op1"}, {"from": "op1", "to": "op7"},
               {"from": "op2", "to": "op5"}, {"from": "op3", "to": "op5"}, {"from": "op3", "to": "op6"},
               {"from": "op3", "to": "op7"}, {"from": "op4", "to": "op5"}, {"from": "op6", "to": "op4"},
               {"from": "op4", "to": "op7"}, {"from": "op6", "to": "op5"}, {"from": "op6", "to": "op7"}]},
    {"images": [{"id": "img-1", "tags": ["t1", "t3", "t4"]}, {"id": "img-2", "tags": ["t1", "t2", "t4"]}]},
)


def line_with_special(position, tag="spt-1", length=14):
    ids = [f"o{i:02d}" for i in range(length)]
    ops = [op(i, tag) if k == position else op(i) for k, i in enumerate(ids)]
    edges = [Edge(a, b) for a, b in zip(ids, ids[1:])]
    return Pipeline(tuple(ops), tuple(edges))


EXCLUSIVE = (DEFAULT_IMAGE, Image("img-spt-1", {"spt-1"}), Image("img-spt-2", {"spt-2"}))


class TestConnection:
    def test_interior_special(self):
        cfg = connection_strategy(line_with_special(6), EXCLUSIVE)
        assert edge_counts(cfg)[1] == 2
        assert len(cfg.groups) == 2

    def test_all_default(self):
        cfg = connection_strategy(chain(*"ABCDEF"), (DEFAULT_IMAGE,))
        assert len(cfg.groups) == 1 and edge_counts(cfg)[1] == 0

    def test_two_req(self, two_req):
        cfg = connection_strategy(*two_req)
        assert len(cfg.groups) == 2
        assert edge_counts(cfg)[1] == 1

    def test_unsatisfiable(self):
        with pytest.raises(UnsatisfiableOperatorError):
            connection_strategy(Pipeline((op("x", "spt-9"),)), EXCLUSIVE)


class TestNode:
    def test_all_default(self):
        assert len(node_strategy(chain(*"ABCDEF"), (DEFAULT_IMAGE,)).groups) == 1

    def test_two_special_tags_interior(self):
        ops = [op(f"o{i}") for i in range(10)]
        ops[3] = op("o3", "spt-1")
        ops[6] = op("o6", "spt-2")
        p = Pipeline(tuple(ops), tuple(Edge(f"o{i}", f"o{i + 1}") for i in range(9)))
        cfg = node_strategy(p, EXCLUSIVE)
        assert len(cfg.groups) == 3
        oracle_cfg, _ = brute_force_grouping(p, EXCLUSIVE, NODE_WEIGHTS)
        assert len(cfg.groups) == len(oracle_cfg.groups)

    def test_ignores_cut_placement(self):
        p, images = pipeline_from_dict(NODE_BLIND[0]), catalog_from_dict(NODE_BLIND[1])
        node, conn = node_strategy(p, images), connection_strategy(p, images)
        assert len(node.groups) == len(conn.groups) == 2
        assert edge_counts(node)[1] > edge_counts(conn)[1]


@pytest.mark.parametrize("seed", range(40))
def test_tradeoff_exact_on_small_instances(seed):
    pipeline, images = random_instance(seed, edge_prob=0.5)
    conn, node = connection_strategy(pipeline, images), node_strategy(pipeline, images)
    assert edge_counts(conn)[1] <= edge_counts(node)[1]
    assert len(node.groups) <= len(conn.groups)
    oracle_node, _ = brute_force_grouping(pipeline, images, NODE_WEIGHTS)
    assert len(node.groups) == len(oracle_node.groups)


def test_connection_fewer_groups_than_random_mostly():
    wins = total = 0
    for seed in range(30):
        pipeline, images = random_instance(seed, edge_prob=0.5)
        conn = len(connection_strategy(pipeline, images).groups)
        for rseed in range(10):
            total += 1
            wins += conn <= len(random_strategy(pipeline, images, rseed).groups)
    assert wins / total > 0.5


class TestRandom:
    def test_single(self):
        for seed in range(20):
            cfg = random_strategy(Pipeline((op("x"),)), (DEFAULT_IMAGE,), seed)
            assert [g.operator_ids for g in cfg.groups] == [frozenset({"x"})]

    def test_nothing_to_group(self):
        fixed = Pipeline((op("x"),), (), (Group("mine", {"x"}, "img-default"),))
        cfg = random_strategy(fixed, (DEFAULT_IMAGE,), 0)
        assert [g.id for g in cfg.groups] == ["mine"]

    def test_seeded_identical(self):
        p, images = generate_pipeline(WorkloadParams(topology="parallel", special_ops=4, seed=2))
        assert random_strategy(p, images, 42) == random_strategy(p, images, 42)

    @pytest.mark.parametrize("topology", ["line", "parallel"])
    def test_valid_many_seeds(self, topology):
        p, images = generate_pipeline(WorkloadParams(topology=topology, special_ops=4, seed=1))
        for seed in range(300):
            assert validate_config(random_strategy(p, images, seed)) == []

    def test_unsatisfiable(self):
        with pytest.raises(UnsatisfiableOperatorError):
            random_strategy(Pipeline((op("x", "spt-9"),)), EXCLUSIVE, 0)


class TestDefault:
    def test_default_image(self):
        cfg = default_strategy(chain(*"ABC"), (DEFAULT_IMAGE,))
        assert [(len(g.operator_ids), g.image_id) for g in cfg.groups] == [(3, "img-default")]

    def test_universal(self):
        p, images = generate_pipeline(WorkloadParams(special_ops=2, seed=1))
        cfg = default_strategy(p, images, allow_universal=True)
        assert len(cfg.groups) == 1
        img = cfg.image_map[cfg.groups[0].image_id]
        assert img.simulation_only
        assert img.tags == {"golang", "spt-1", "spt-2"}
        assert validate_config(cfg) == []

    def test_infeasible(self):
        p, images = generate_pipeline(WorkloadParams(special_ops=2, seed=1))
        with pytest.raises(InfeasibleBaselineError, match="default baseline infeasible"):
            default_strategy(p, images)


@pytest.mark.parametrize("kind", list(StrategyKind))
@pytest.mark.parametrize("topology", ["line", "parallel"])
def test_every_strategy_valid(kind, topology):
    p, images = generate_pipeline(WorkloadParams(topology=topology, special_ops=4, seed=3))
    cfg, plan = run_strategy(kind, p, images, seed=3, allow_universal=True)
    assert validate_config(cfg) == []
    if kind in (StrategyKind.CONNECTION, StrategyKind.NODE):
        weights = CONNECTION_WEIGHTS if kind is StrategyKind.CONNECTION else NODE_WEIGHTS
        assert plan.total_cost == objective_cost(cfg, weights)
    else:
        assert plan is None
