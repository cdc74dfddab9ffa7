from __future__ import annotations

import math

import pytest

from mappop.disrpg import build_dis_rpg
from mappop.errors import CompositionError
from mappop.generators import micro_task
from mappop.plan import GOAL, INIT, CausalLink, PartialPlan, project_plan
from mappop.pop import RefinementStep, Threat, compose, detect_threats, heuristic_F, refine, resolve_threat, threats
from mappop.task import UNDEFINED, Effect, Fluent, GroundAction, MapTask

from conftest import chain_task, move
from oracles import brute_force_refinements, plan_form

L1, L2 = Fluent("at", "L1"), Fluent("at", "L2")
USE = GroundAction("use", (), (L1,), (Effect("done", "y"),))
GO = GroundAction("go", (), (), (Effect("at", "L2"),))
NEED2 = GroundAction("need2", (), (L2,), (Effect("done", "z"),))


def world(b_at=None):
    views = {"a": {"at": ["L1", "L2"], "done": ["n", "y", "z"]}}
    actions = {"a": [USE, GO, NEED2]}
    if b_at is not None:
        views["b"] = {"at": b_at}
        actions["b"] = []
    return MapTask.build("w", views, actions, {"a": {"at": "L1", "done": "n"}}, {"a": [Fluent("done", "y")]})


def use_plan(task):
    plan = PartialPlan.empty(task)
    plan, u = plan.add_step(USE, "a")
    plan = plan.add_link(INIT, u, L1).add_link(u, GOAL, Fluent("done", "y"))
    plan, g = plan.add_step(GO, "a")
    return plan, u, g


def test_unordered_clobberer_is_one_threat():
    task = world()
    plan, u, g = use_plan(task)
    found = detect_threats(project_plan(plan, None, task))
    assert found == {Threat(g, CausalLink(INIT, u, L1))}


def test_clobberer_after_consumer_is_no_threat():
    task = world()
    plan, u, g = use_plan(task)
    plan = plan.add_ordering(u, g)
    assert detect_threats(project_plan(plan, None, task)) == set()


def test_undefined_link_threatened_by_any_assignment():
    # the full view sees no conflict: assigning L2 keeps a link on not-L1 true...
    task = world(b_at=["L2"])
    plan = PartialPlan.empty(task)
    plan, u = plan.add_step(GroundAction("avoid", (), (L1.negate(),), (Effect("done", "y"),)), "a")
    plan, g = plan.add_step(GO, "a")
    plan = plan.add_link(g, u, L1.negate())
    plan, o = plan.add_step(GroundAction("other", (), (), (Effect("at", "L2"),)), "a")
    assert detect_threats(project_plan(plan, "a", task)) == set()
    # ...but b sees the link as <at, ⊥> and any effect on at conflicts with it
    view = project_plan(plan, "b", task)
    assert any(l.fluent == Fluent("at", UNDEFINED) for l in view.links)
    assert {(t.step, t.link.producer, t.link.consumer) for t in detect_threats(view)} == {(o, g, u)}
    assert Threat(o, CausalLink(g, u, L1.negate())) in threats(plan, task)


BACK = GroundAction("back", (), (), (Effect("at", "L1"),))


def go_need_back():
    plan = PartialPlan.empty(world())
    plan, p = plan.add_step(GO, "a")
    plan, n = plan.add_step(NEED2, "a")
    plan = plan.add_link(p, n, L2)
    plan, b = plan.add_step(BACK, "a")
    return plan, p, n, b


def test_resolve_threat_two_children():
    plan, p, n, b = go_need_back()
    kids = resolve_threat(plan, Threat(b, CausalLink(p, n, L2)))
    assert len(kids) == 2
    assert kids[0].before(n, b) and kids[1].before(b, p)


def test_resolve_threat_only_promotion_when_after_producer():
    plan, p, n, b = go_need_back()
    plan = plan.add_ordering(p, b)
    kids = resolve_threat(plan, Threat(b, CausalLink(p, n, L2)))
    assert len(kids) == 1 and kids[0].before(n, b)


def test_resolve_threat_dead_end():
    plan, p, n, b = go_need_back()
    plan = plan.add_ordering(p, b).add_ordering(b, n)
    assert resolve_threat(plan, Threat(b, CausalLink(p, n, L2))) == []


def test_heuristic_values():
    task = chain_task(3)
    rpg = build_dis_rpg(task)["a"]
    done = PartialPlan(task.initial_state, (), {}, frozenset(), frozenset(), frozenset())
    assert heuristic_F(project_plan(done, "a", task), rpg) == 0
    plan = PartialPlan.empty(task)
    assert heuristic_F(project_plan(plan, "a", task), rpg) == 2
    cut = MapTask.build("cut", {"a": {"at": ["L1", "L2", "L3"]}}, {"a": [move("L1", "L2")]}, {"a": {"at": "L1"}}, {})
    lost = PartialPlan(cut.initial_state, (), {}, frozenset(), frozenset(), frozenset({(GOAL, Fluent("at", "L3"))}))
    assert heuristic_F(project_plan(lost, "a", cut), build_dis_rpg(cut)["a"]) == math.inf


def test_heuristic_counts_undefined_with_penalty():
    task = world(b_at=["L2"])
    rpg = build_dis_rpg(task)["b"]
    plan = PartialPlan(task.initial_state, (L1,), {}, frozenset(), frozenset(), frozenset({(GOAL, L1)}))
    assert heuristic_F(project_plan(plan, "b", task), rpg, penalty=2.5) == 2.5


def test_refine_micro_domain_unique_refinement():
    task = chain_task(2)
    rpg = build_dis_rpg(task)["a"]
    base = PartialPlan.empty(task)
    found = refine(base, (GOAL, L2), "a", task, rpg, k=None, node_budget=None)
    assert len(found) == 1
    step = found[0]
    assert [s.action.label for s in step.steps] == ["move(L1,L2)"]
    sid = step.steps[0].id
    assert step.links == {CausalLink(INIT, sid, L1), CausalLink(sid, GOAL, L2)}


def test_refine_requires_visible_goal():
    task = MapTask.build(
        "hidden", {"a": {"at": ["L1", "L2"]}, "b": {"x": ["1"]}}, {"a": [], "b": []}, {"a": {"at": "L1"}}, {"a": [L2]}
    )
    with pytest.raises(AssertionError):
        refine(PartialPlan.empty(task), (GOAL, L2), "b", task, build_dis_rpg(task)["b"])


def test_refine_link_only_when_producer_exists():
    task = world()
    plan = PartialPlan.empty(task)
    plan, g = plan.add_step(GO, "a")
    plan, n = plan.add_step(NEED2, "a")
    found = refine(plan, (n, L2), "a", task, build_dis_rpg(task)["a"], k=None, node_budget=None, max_new_steps=0)
    assert len(found) == 1
    assert found[0].steps == () and found[0].links == {CausalLink(g, n, L2)}


def test_compose_micro_refinement():
    task = chain_task(2)
    base = PartialPlan.empty(task)
    step = refine(base, (GOAL, L2), "a", task, build_dis_rpg(task)["a"])[0]
    plan = compose(base, step, task)
    assert plan.step_ids() == [INIT, GOAL, step.steps[0].id]
    assert plan.open_goals == frozenset()


def test_compose_rejects_inconsistent_parallel_steps():
    task = world()
    base = PartialPlan.empty(task)
    plan, u = base.add_step(USE, "a")
    plan, g = plan.add_step(GO, "a")
    plan, n = plan.add_step(NEED2, "a")
    plan = plan.add_link(INIT, u, L1).add_link(g, n, L2)
    # use and need2 are unordered and need L1 and L2: not concurrently consistent
    bad = RefinementStep("a", (GOAL, Fluent("done", "y")), base.key, tuple(plan.steps.values()), plan.orderings, plan.links, plan)
    with pytest.raises(CompositionError):
        compose(base, bad)


def test_compose_ordering_only_refinement():
    task = world()
    plan, u, g = use_plan(task)
    extra = RefinementStep("a", (GOAL, Fluent("done", "y")), plan.key, (), frozenset({(u, g)}), frozenset(), plan)
    out = compose(plan, extra)
    assert out.orderings == plan.orderings | {(u, g)}
    assert set(out.steps) == set(plan.steps)


def test_refinements_threat_free_in_every_view():
    for seed in range(40):
        task = micro_task(seed)
        goal = task.all_goals[0]
        base = PartialPlan.empty(task)
        for step in refine(base, (GOAL, goal), "a", task, build_dis_rpg(task)["a"], k=None, node_budget=2000):
            plan = compose(base, step, task)
            for agent in (None, *task.agents):
                assert detect_threats(project_plan(plan, agent, task)) == set()


def test_brute_force_agreement_sample():
    for seed in range(30):
        task = micro_task(seed, two_agents=False)
        goal = task.all_goals[0]
        base = PartialPlan.empty(task)
        got = refine(base, (GOAL, goal), "a", task, build_dis_rpg(task)["a"], k=None, node_budget=None, max_new_steps=3)
        assert {plan_form(compose(base, s, task)) for s in got} == brute_force_refinements(task, "a", goal)
