from __future__ import annotations

from dataclasses import replace

from mappop.coordinator import solve
from mappop.frontend import TaskFiles
from mappop.generators import corpus_files, micro_logistics_files
from mappop.plan import GOAL, INIT, PartialPlan
from mappop.task import Effect, Fluent, GroundAction, MapTask
from mappop.validator import coupling_level, levels, linearizations, metrics, simulate, validate

from conftest import chain_task, move

L1, L2 = Fluent("at", "L1"), Fluent("at", "L2")


def test_solver_output_valid(micro_task):
    plan = solve(micro_task).plan
    report = validate(plan, micro_task)
    assert report.valid and report.text().startswith("valid")
    assert simulate(plan, micro_task).success


def test_deleted_link_is_support_finding(micro_task):
    plan = solve(micro_task).plan
    link = next(l for l in plan.links if l.consumer == GOAL)
    broken = replace(plan, links=plan.links - {link})
    report = validate(broken, micro_task)
    assert 2 in report.rules() and not report.valid
    assert any(str(link.fluent) in f.description for f in report.findings)


def test_unordered_contradicting_requirements():
    use = GroundAction("use", (), (L1,), (Effect("done", "y"),))
    go = GroundAction("go", (), (), (Effect("at", "L2"),))
    need2 = GroundAction("need2", (), (L2,), (Effect("done", "z"),))
    views = {"a": {"at": ["L1", "L2"], "done": ["n", "y", "z"]}}
    task = MapTask.build("w", views, {"a": [use, go, need2]}, {"a": {"at": "L1", "done": "n"}}, {})
    plan = PartialPlan.empty(task)
    plan, u = plan.add_step(use, "a")
    plan, g = plan.add_step(go, "a")
    plan, n = plan.add_step(need2, "a")
    plan = plan.add_link(INIT, u, L1).add_link(g, n, L2)
    report = validate(plan, task)
    assert any(f.rule == 4 and f.location == f"{u}|{n}" for f in report.findings)


def test_cyclic_orderings_reported():
    task = chain_task(3)
    plan = solve(task).plan
    a, b = sorted(plan.steps)
    cyc = replace(plan, orderings=plan.orderings | {(a, b), (b, a)})
    assert validate(cyc, task).rules() == {1}
    assert not simulate(cyc, task).success


def test_ownership_rule():
    task = chain_task(2)
    plan = PartialPlan.empty(task)
    plan, s = plan.add_step(move("L1", "L2"), "ghost")
    plan = plan.add_link(INIT, s, L1).add_link(s, GOAL, L2)
    assert validate(plan, task).rules() == {6}
    assert validate(plan, task, check_ownership=False).valid


def test_order_dependent_plan_fails_simulation():
    task = chain_task(3)
    plan = PartialPlan.empty(task)
    plan, first = plan.add_step(move("L1", "L2"), "a")
    plan, second = plan.add_step(move("L2", "L3"), "a")
    result = simulate(plan, task, seed=0, samples=20)
    assert not result.success
    assert f"step {second}" in result.failure or f"step {first}" in result.failure


def test_empty_plan_empty_goals_simulates():
    task = MapTask.build("idle", {"a": {"x": ["1"]}}, {}, {"a": {"x": "1"}}, {})
    plan = PartialPlan.empty(task)
    assert simulate(plan, task).success
    assert tuple(metrics(plan)) == (0, 0, 0)


def test_metrics_single_step(micro_task):
    assert tuple(metrics(solve(micro_task).plan)) == (1, 1, 1)


def test_metrics_parallel_agents():
    views = {"a": {"x": ["L1", "L2"]}, "b": {"y": ["L1", "L2"]}}
    actions = {"a": [move("L1", "L2", "x")], "b": [move("L1", "L2", "y")]}
    goals = {"a": [Fluent("x", "L2")], "b": [Fluent("y", "L2")]}
    task = MapTask.build("duo", views, actions, {"a": {"x": "L1"}, "b": {"y": "L1"}}, goals)
    result = solve(task)
    assert tuple(metrics(result.plan)) == (2, 1, 2)


def test_metrics_micro_logistics(tmp_path):
    task = TaskFiles.read(micro_logistics_files().write(tmp_path / "ml")).task()
    plan = solve(task).plan
    assert tuple(metrics(plan)) == (4, 4, 2)
    assert validate(plan, task).valid


def test_time_steps_follow_longest_chain():
    task = chain_task(4)
    plan = solve(task).plan
    assert sorted(levels(plan).values()) == [1, 2, 3]
    # every sampled linearization agrees on the same partial order
    orders = linearizations(plan, seed=3, samples=10)
    assert len({tuple(o) for o in orders}) == 1
    assert metrics(plan).ts == 3


def test_time_steps_ignore_linearization():
    views = {"a": {"x": ["0", "1"], "y": ["0", "1"], "z": ["0", "1"]}}
    acts = [move("0", "1", v) for v in "xyz"]
    task = MapTask.build("par", views, {"a": acts}, {"a": {"x": "0", "y": "0", "z": "0"}}, {"a": [Fluent(v, "1") for v in "xyz"]})
    plan = solve(task).plan
    assert len({tuple(o) for o in linearizations(plan, seed=1, samples=30)}) > 1
    assert metrics(plan).ts == 1


def test_coupling_extremes():
    views = {"a": {"x": ["0", "1"]}, "b": {"y": ["0", "1"]}}
    actions = {"a": [move("0", "1", "x")], "b": [move("0", "1", "y")]}
    init = {"a": {"x": "0"}, "b": {"y": "0"}}
    assert coupling_level(MapTask.build("private", views, actions, init, {})) == 0.0
    shared = {"a": {"x": ["0", "1"], "y": ["0", "1"]}, "b": {"x": ["0", "1"], "y": ["0", "1"]}}
    assert coupling_level(MapTask.build("shared", shared, actions, init, {})) == 100.0


def test_coupling_hand_count():
    # a: one of two actions touches x, which b sees -> 50%; b: its one action is on x -> 100%
    views = {"a": {"x": ["0", "1"], "p": ["0", "1"]}, "b": {"x": ["0", "1"]}, "c": {"q": ["0"]}}
    actions = {"a": [move("0", "1", "x"), move("0", "1", "p")], "b": [move("1", "0", "x")]}
    task = MapTask.build("hand", views, actions, {"a": {"x": "0", "p": "0"}, "c": {"q": "0"}}, {})
    # c holds no actions and is left out of the mean
    assert coupling_level(task) == 75.0


def test_coupling_matches_per_action_count(tmp_path):
    files = next(f for f in corpus_files() if f.root.name == "mini-rovers-2")
    task = TaskFiles.read(files.write(tmp_path / "r")).task()
    shares = []
    for agent in task.agents:
        acts = task.actions[agent]
        others = set().union(*(task.views[j] for j in task.agents if j != agent))
        public = [a for a in acts if ({f.var for f in a.pre} | {e.var for e in a.eff}) & others]
        shares.append(100 * len(public) / len(acts))
    assert abs(coupling_level(task) - sum(shares) / len(shares)) < 1e-9
    assert 0 < coupling_level(task) < 50
