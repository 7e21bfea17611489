import json

from pipeplan import bench
from pipeplan.cli import main


def test_generate_optimize_simulate(tmp_path, capsys):
    pipe, images = tmp_path / "p.json", tmp_path / "images.json"
    assert main(["generate", "--topology", "parallel", "--special-ops", "3", "--out", str(pipe)]) == 0
    assert len(json.loads(pipe.read_text())["operators"]) == 14
    assert images.exists()
    cfg = tmp_path / "cfg.json"
    assert main(["optimize", "--pipeline", str(pipe), "--images", str(images),
                 "--strategy", "node", "--out", str(cfg)]) == 0
    assert "node:" in capsys.readouterr().err
    assert json.loads(cfg.read_text())["groups"]
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--config", str(cfg), "--images", str(images), "--reps", "3",
                 "--t-pod", "10", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("rep,cold") and len(lines) == 4
    assert main(["simulate", "--config", str(cfg), "--images", str(images), "--reps", "1",
                 "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["cold"] is True


def test_bench_and_summarize(tmp_path):
    out, summary = tmp_path / "r.csv", tmp_path / "s.csv"
    args = ["bench", "--topology", "line", "--special-ops", "2", "--fib-step", "1",
            "--reps", "2", "--out", str(out), "--summary", str(summary)]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 1  # default baseline is infeasible here
    assert main(args + ["--strict", "--allow-universal-image"]) == 0
    assert len(bench.read_rows(out)) == 8
    again = tmp_path / "s2.csv"
    assert main(["summarize", "--in", str(out), "--out", str(again)]) == 0
    assert again.read_text() == summary.read_text()


def test_pddl_export_import(tmp_path):
    pdir = tmp_path / "pddl"
    assert main(["pddl", "export", "--special-ops", "1", "--out", str(pdir)]) == 0
    assert (pdir / "domain.pddl").exists()
    assert main(["optimize", "--planner", "pddl-export", "--out", str(tmp_path / "p2")]) == 0
    plan = tmp_path / "plan.txt"
    plan.write_text("(create-group g1 img-default)\n")
    assert main(["pddl", "import", "--plan", str(plan)]) == 2


def test_pddl_import_good_plan(tmp_path):
    from pipeplan.model import CONNECTION_WEIGHTS
    from pipeplan.pddl import serialize_plan
    from pipeplan.planning import build_grouping_task, solve_optimal
    from pipeplan.workload import WorkloadParams, generate_pipeline

    p, images = generate_pipeline(WorkloadParams(seed=1))
    task = build_grouping_task(p, images, CONNECTION_WEIGHTS)
    plan = tmp_path / "plan.txt"
    plan.write_text(serialize_plan(solve_optimal(task), task))
    out, cfg = tmp_path / "rows.csv", tmp_path / "cfg.json"
    assert main(["pddl", "import", "--plan", str(plan), "--reps", "2", "--out", str(out),
                 "--config-out", str(cfg)]) == 0
    rows = bench.read_rows(out)
    assert len(rows) == 2 and rows[0].plan_cost == 200
    assert cfg.exists()


def test_error_exit(tmp_path, capsys):
    assert main(["optimize", "--pipeline", str(tmp_path / "missing.json"), "--images", "x"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["generate", "--special-ops", "0"]) == 2
