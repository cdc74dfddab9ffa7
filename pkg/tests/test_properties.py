from __future__ import annotations

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mappop.coordinator import solve
from mappop.disrpg import build_dis_rpg
from mappop.generators import random_shared_task, random_task
from mappop.planfile import format_plan, read_plan
from mappop.task import (
    UNDEFINED,
    Effect,
    Fluent,
    GroundAction,
    MapTask,
    Truth,
    apply,
    check_state,
    evaluate,
    materialise,
    project_fluent,
)
from mappop.validator import simulate, validate

from oracles import centralized_rpg

VALUES = ["0", "1", "2"]
DOMAINS = {v: VALUES for v in "xyz"}
SLOW = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

assignments = st.fixed_dictionaries({v: st.sampled_from(VALUES) for v in "xyz"})
effects = st.lists(
    st.builds(Effect, st.sampled_from("xyz"), st.sampled_from(VALUES), st.booleans()),
    max_size=3,
    unique_by=lambda e: e.var,
)
fluents = st.builds(Fluent, st.sampled_from("xyz"), st.sampled_from(VALUES), st.booleans())


@given(assignments, effects)
def test_apply_preserves_state_invariants(assign, effs):
    state = materialise(assign, DOMAINS)
    check_state(state)
    out = apply(state, GroundAction("act", (), (), tuple(effs)), DOMAINS)
    check_state(out)
    for e in effs:
        want = Truth.TRUE if e.assign else Truth.FALSE
        assert evaluate(Fluent(e.var, e.value), out) is want


@given(st.sets(fluents, max_size=6), fluents)
def test_evaluate_is_exhaustive_and_exclusive(state, f):
    truth = evaluate(f, state)
    assert truth in set(Truth)
    assert (truth is Truth.TRUE) == (f in state)
    if f not in state and f.negate() not in state:
        assert truth is Truth.UNKNOWN
    if truth is Truth.TRUE:
        assert evaluate(f.negate(), state) is Truth.FALSE or f.negate() in state


@given(assignments, fluents)
def test_materialised_state_decides_every_fluent(assign, f):
    assert evaluate(f, materialise(assign, DOMAINS)) is not Truth.UNKNOWN


@given(st.sets(st.sampled_from(VALUES), max_size=3), fluents)
def test_projection_idempotent(view, f):
    views = {"a": {"x": VALUES, "y": VALUES, "z": VALUES}, "b": {f.var: sorted(view) or ["0"]}}
    task = MapTask.build("p", views, {}, {"a": {"x": "0", "y": "0", "z": "0"}}, {})
    once = project_fluent(f, "b", task)
    assert once is not None
    assert project_fluent(once, "b", task) == once
    assert (once == f) or once == Fluent(f.var, UNDEFINED)


@SLOW
@given(st.integers(min_value=0, max_value=10_000))
def test_dis_rpg_matches_centralized(seed):
    task = random_shared_task(seed)
    want = centralized_rpg(task)
    dis = build_dis_rpg(task)
    for agent in task.agents:
        assert dis[agent].costs == want, agent


@SLOW
@given(st.integers(min_value=0, max_value=10_000))
def test_solver_plans_are_sound(seed):
    task = random_task(seed)
    result = solve(task)
    if not result.solved:
        return
    report = validate(result.plan, task)
    assert report.valid, report.text()
    assert simulate(result.plan, task, seed=seed, samples=10).success
    text = format_plan(result.plan, task.name)
    assert format_plan(read_plan(text, task), task.name) == text
