from __future__ import annotations

import csv
import io

import pytest

from mappop.cli import EXHAUSTED, FAILED, OK, USAGE, main, shipped_corpus
from mappop.frontend import TaskFiles
from mappop.generators import corpus_files, generate_scaling_suite
from mappop.planfile import format_plan, read_plan
from mappop.validator import coupling_level, metrics, validate
from mappop.coordinator import solve

STUCK_DOMAIN = """\
(define (domain stuck)
  (:types robot flag)
  (:constants on off - flag)
  (:variables (lit ?r - robot - flag))
  (:action dim
    :parameters (?r - robot)
    :precondition (and (= (lit ?r) off))
    :effect (and (assign (lit ?r) off))))
"""

STUCK_PROBLEM = """\
(define (problem stuck)
  (:objects r - robot)
  (:init (= (lit r) off))
  (:goal (and (= (lit r) on))))
"""


@pytest.fixture
def corpus(tmp_path):
    assert main(["generate", "corpus", str(tmp_path / "c")]) == OK
    return tmp_path / "c"


def test_solve_micro_prints_plan_and_metrics(micro_files, tmp_path, capsys):
    out = tmp_path / "plan.txt"
    assert main(["solve", str(micro_files.root), "-o", str(out)]) == OK
    text = capsys.readouterr().out
    assert text.startswith("; plan micro\n1: robot move(r,l1,l2)\n; acts=1 ts=1 partics=1\n")
    assert "metrics: acts=1 ts=1 partics=1" in text
    assert out.read_text().startswith("; plan micro")


def test_solve_unreachable_goal(tmp_path, capsys):
    TaskFiles(tmp_path / "stuck", STUCK_DOMAIN, {"robot": STUCK_PROBLEM}).write()
    assert main(["solve", str(tmp_path / "stuck")]) == FAILED
    assert "unsolvable" in capsys.readouterr().out


def test_solve_budget_exhausted(corpus, capsys):
    assert main(["solve", str(corpus / "mini-logistics"), "--iters", "1"]) == EXHAUSTED
    assert "budget exhausted" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["solve"], ["frobnicate"], ["solve", "x", "--k", "0"], ["solve", "x", "--timeout", "-1"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == USAGE
    assert "error" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    TaskFiles(tmp_path / "bad", "(define (domain x)", {"a": STUCK_PROBLEM}).write()
    assert main(["parse", str(tmp_path / "bad")]) == USAGE
    assert "error" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing")]) == USAGE


def test_parse_ground_rpg_output(corpus, capsys):
    task = str(corpus / "micro-logistics")
    assert main(["parse", task]) == OK
    assert capsys.readouterr().out.startswith("ok: domain logistics")
    assert main(["ground", task, "--agent", "truck"]) == OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("; truck:") and all(l.startswith("truck ") for l in lines[1:])
    assert main(["rpg", task]) == OK
    out = capsys.readouterr().out
    assert "; plane" in out and "; truck" in out


def test_validate_exit_codes(corpus, tmp_path, capsys):
    task = corpus / "micro-logistics"
    plan = tmp_path / "p.txt"
    assert main(["solve", str(task), "-o", str(plan)]) == OK
    assert main(["validate", str(task), str(plan)]) == OK
    assert "simulation ok" in capsys.readouterr().out
    # drop the plane's load: the flight no longer delivers the package
    lines = plan.read_text().splitlines()
    broken = [l for l in lines if "load(p,pl" not in l]
    assert len(broken) == len(lines) - 1
    plan.write_text("\n".join(broken) + "\n")
    assert main(["validate", str(task), str(plan)]) != OK


def test_plan_file_round_trip(corpus):
    task = TaskFiles.read(corpus / "mini-rovers-2").task()
    plan = solve(task).plan
    text = format_plan(plan, task.name)
    back = read_plan(text, task)
    assert format_plan(back, task.name) == text
    assert validate(back, task).valid
    assert tuple(metrics(back)) == tuple(metrics(plan))


def rows_without_time(path):
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0][-1] == "time"
    return [r[:-1] for r in rows]


def test_bench_csv_one_row_per_task_and_deterministic(corpus, tmp_path, capsys):
    tasks = [str(corpus / n) for n in ("micro-logistics", "mini-logistics", "mini-satellite-2")]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["bench", *tasks, "--csv", str(first), "--seed", "4"]) == OK
    assert main(["bench", *tasks, "--csv", str(second), "--seed", "4"]) == OK
    a, b = rows_without_time(first), rows_without_time(second)
    assert a == b
    assert a[0] == ["problem", "agents", "coupling", "domain_actions", "acts", "ts", "partics"]
    assert [r[0] for r in a[1:]] == ["micro-logistics", "mini-logistics", "mini-satellite-2"]
    assert "problem" in capsys.readouterr().out


def test_shipped_corpus_bench_rows():
    assert len(shipped_corpus()) == len(corpus_files())


def test_corpus_covers_every_band(corpus):
    bands = {"loose": 0, "medium": 0, "tight": 0}
    for d in sorted(corpus.iterdir()):
        c = coupling_level(TaskFiles.read(d).task())
        bands["loose" if c < 10 else "medium" if c <= 50 else "tight"] += 1
    assert min(bands.values()) >= 2, bands


def test_generate_satellite(tmp_path, capsys):
    assert main(["generate", "satellite", str(tmp_path / "s"), "-n", "2"]) == OK
    task = TaskFiles.read(tmp_path / "s").task()
    assert len(task.agents) == 2
    assert main(["generate", "satellite", str(tmp_path / "t")]) == USAGE


def test_scaling_suite_single_agent(tmp_path):
    task = generate_scaling_suite("satellite", 1).task()
    assert len(task.agents) == 1 and len(task.all_goals) == 1


def test_scaling_suite_pairwise_private_goals():
    task = generate_scaling_suite("satellite", 3).task()
    assert len(task.agents) == 3 and len(task.all_goals) == 3
    for g in task.all_goals:
        assert len(task.seers(g.var)) == 1
    for i, a in enumerate(task.agents):
        for b in task.agents[i + 1 :]:
            assert not set(task.views[a]) & set(task.views[b])


def test_scaling_suite_bounds():
    for n in (0, 15):
        with pytest.raises(ValueError):
            generate_scaling_suite("satellite", n)


def test_scaling_suite_five_agents_all_act():
    task = generate_scaling_suite("satellite", 5).task()
    result = solve(task)
    assert result.solved and metrics(result.plan).partics == 5
