import re
from pathlib import Path

import pytest

from pipeplan.errors import PipelineError, PlanParseError
from pipeplan.model import CONNECTION_WEIGHTS, NODE_WEIGHTS, Edge, Group, Operator, Pipeline
from pipeplan.pddl import emit_domain, emit_pddl, emit_problem, parse_plan, pddl_name, serialize_plan
from pipeplan.planning import build_grouping_task, plan_to_config, solve_optimal
from pipeplan.workload import WorkloadParams, generate_pipeline, random_instance

from conftest import DEFAULT_IMAGE, chain, op

FIXTURES = Path(__file__).parent / "fixtures"


def task_for(pipeline, images=(DEFAULT_IMAGE,), weights=CONNECTION_WEIGHTS):
    return build_grouping_task(pipeline, images, weights)


def init_facts(problem, pred):
    init = problem.split("(:init", 1)[1].split("(:goal", 1)[0]
    return re.findall(rf"\({pred} [^()]*\)", init)


def balanced(text):
    depth = 0
    for ch in re.sub(r";[^\n]*", "", text):
        depth += {"(": 1, ")": -1}.get(ch, 0)
        if depth < 0:
            return False
    return depth == 0


class TestEmit:
    def test_single_operator(self):
        problem = emit_problem(task_for(Pipeline((op("x"),))))
        assert init_facts(problem, "edge") == []
        assert "(assigned x)" in problem
        assert balanced(problem)

    def test_line_edges(self):
        problem = emit_problem(task_for(chain("a", "b", "c")))
        assert init_facts(problem, "edge") == ["(edge a b)", "(edge b c)"]
        assert len(init_facts(problem, "requires")) == 3
        assert len(init_facts(problem, "free-group")) == 3

    def test_weights_in_domain(self):
        t = task_for(chain("a", "b"), weights=NODE_WEIGHTS)
        domain = emit_domain(t)
        assert "(increase (total-cost) 1000)" in domain
        assert "(increase (total-cost) 5)" in domain

    def test_pinned_group_facts(self):
        p = Pipeline((op("a"), op("b")), (Edge("a", "b"),), (Group("keep", {"b"}, "img-default"),))
        problem = emit_problem(task_for(p))
        assert init_facts(problem, "pinned") == ["(pinned b g1)"]
        assert init_facts(problem, "pinned-image") == ["(pinned-image g1 img-default)"]
        assert init_facts(problem, "free-operator") == ["(free-operator a)"]

    def test_balanced_and_deterministic(self):
        for seed in range(10):
            t = task_for(*random_instance(seed))
            a, b = emit_pddl(t, "x"), emit_pddl(t, "x")
            assert a == b
            assert balanced(a.domain_text) and balanced(a.problem_text)

    def test_name_clash(self):
        p = Pipeline((op("A"), op("a")))
        with pytest.raises(PipelineError):
            emit_problem(task_for(p))

    def test_name_sanitized(self):
        assert re.fullmatch(r"[a-z][a-z0-9_-]*", pddl_name("Op 1.x"))


class TestGolden:
    def artifacts(self):
        p, images = generate_pipeline(WorkloadParams(topology="line", special_ops=1, seed=1))
        return emit_pddl(build_grouping_task(p, images, CONNECTION_WEIGHTS), "pipeline")

    def test_domain(self):
        assert self.artifacts().domain_text == (FIXTURES / "line_seed1_domain.pddl").read_text()

    def test_problem(self):
        assert self.artifacts().problem_text == (FIXTURES / "line_seed1_problem.pddl").read_text()


class TestParse:
    def test_minimal_plan(self):
        t = task_for(Pipeline((Operator("op1", frozenset({"golang"})),)))
        plan = parse_plan("(create-group g1 img-default)\n(assign-operator op1 g1)\n", t)
        cfg = plan_to_config(plan, t)
        assert [sorted(g.operator_ids) for g in cfg.groups] == [["op1"]]
        assert plan.total_cost == 50

    def test_comments_prefix_and_case(self):
        t = task_for(chain("a", "b"))
        text = ("; found by some planner\n0: (CREATE-GROUP g1 img-default)\n"
                "1: (assign-operator a g1)  ; first\n\n(assign-operator b g1)\n; cost = 999\n")
        assert parse_plan(text, t).total_cost == 55

    @pytest.mark.parametrize("text, line, needle", [
        ("(create-group g1 img-default)\n(frobnicate a)\n", 2, "unknown action"),
        ("(create-group g1)\n", 1, "takes 2 arguments"),
        ("(create-group g1 img-zzz)\n", 1, "not a known image"),
        ("(create-group g1 img-default)\n(assign-operator b g1)\n", 2, "inapplicable"),
        ("(create-group g2 img-default)\n", 1, "inapplicable"),
        ("create-group g1 img-default\n", 1, "s-expression"),
    ])
    def test_errors_name_line(self, text, line, needle):
        with pytest.raises(PlanParseError, match=needle) as info:
            parse_plan(text, task_for(chain("a", "b")))
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_incomplete(self):
        with pytest.raises(PlanParseError, match="does not reach the goal"):
            parse_plan("(create-group g1 img-default)\n(assign-operator a g1)\n", task_for(chain("a", "b")))

    def test_empty_group_left_behind(self):
        text = ("(create-group g1 img-default)\n(assign-operator a g1)\n(assign-operator b g1)\n"
                "(create-group g2 img-default)\n")
        with pytest.raises(PlanParseError, match="does not reach the goal"):
            parse_plan(text, task_for(chain("a", "b")))

    def test_empty_file(self):
        with pytest.raises(PlanParseError, match="does not reach the goal"):
            parse_plan("", task_for(chain("a")))

    @pytest.mark.parametrize("seed", range(20))
    def test_round_trip(self, seed):
        pipeline, images = random_instance(seed)
        t = task_for(pipeline, images)
        plan = solve_optimal(t)
        back = parse_plan(serialize_plan(plan, t), t)
        assert back.actions == plan.actions
        assert back.total_cost == plan.total_cost
