from __future__ import annotations

import pytest

from mappop.errors import ParseError, SemanticError, TaskError
from mappop.frontend import (
    TaskFiles,
    build_task,
    ground,
    parse_domain,
    parse_problem,
    parse_shared_data,
    parse_task,
    print_domain,
    print_problem,
    print_shared_data,
)
from mappop.generators import corpus_files

from conftest import MOVE_DOMAIN, move_problem

ONE_ACTION = """\
(define (domain tiny)
  (:types thing)
  (:variables (state ?x - thing - thing))
  (:action flip :parameters (?x ?y - thing) :effect (and (assign (state ?x) ?y))))
"""


def test_minimal_single_agent_domain_has_full_visibility():
    problem = "(define (problem p) (:objects a b - thing) (:init) (:goal (and)))"
    dom, problems, shared = parse_task(ONE_ACTION, {"solo": problem}, {"solo": ""})
    assert len(dom.actions) == 1
    assert shared.entries == ()
    task = build_task(dom, problems, shared)
    assert task.agents == ("solo",)
    assert task.views["solo"] == {"state(a)": frozenset("ab"), "state(b)": frozenset("ab")}


def test_shared_data_grant_transcribed():
    text = "(:shared-data ((at-pkg) :with (truck1 :values (cityA cityB))))"
    decl = parse_shared_data(text, "plane")
    # identifiers are case-insensitive and normalised to lower case
    assert decl.grants() == {("at-pkg", "truck1"): frozenset({"citya", "cityb"})}


def test_malformed_parenthesis_names_line():
    stray = MOVE_DOMAIN.replace("(assign (at ?r) ?b))))", "(assign (at ?r) ?b)))))")
    with pytest.raises(ParseError) as err:
        parse_domain(stray)
    assert err.value.line == 7
    assert "line 7" in str(err.value)
    unclosed = MOVE_DOMAIN.replace("(assign (at ?r) ?b))))", "(assign (at ?r) ?b)))")
    with pytest.raises(ParseError) as err:
        parse_domain(unclosed)
    assert "line" in str(err.value)


def test_unknown_section_rejected():
    with pytest.raises(ParseError):
        parse_domain(MOVE_DOMAIN.replace("(:types loc robot)", "(:types loc robot) (:functions)"))


def test_undeclared_object_in_init():
    dom = parse_domain(MOVE_DOMAIN)
    text = "(define (problem p) (:objects r - robot L1 - loc) (:init (= (at r) L9)) (:goal (and)))"
    with pytest.raises(SemanticError) as err:
        parse_problem(text, dom)
    assert err.value.token == "l9"


def test_shared_data_unknown_agent():
    with pytest.raises(SemanticError):
        parse_task(MOVE_DOMAIN, {"robot": move_problem(["L1", "L2"])}, {"robot": "(:shared-data ((at r) :with (ghost :values (L1))))"})


def test_goal_outside_view_rejected():
    other = "(define (problem q) (:objects s - robot L1 L2 - loc) (:init (= (at s) L1)) (:goal (and (= (at r) L2))))"
    with pytest.raises(SemanticError):
        parse_task(MOVE_DOMAIN, {"a": move_problem(["L1", "L2"]), "b": other})


def test_move_with_two_locations_grounds_two_actions():
    dom, problems, shared = parse_task(MOVE_DOMAIN, {"robot": move_problem(["L1", "L2"])})
    actions, views = ground(dom, problems, shared, "robot")
    assert [a.label for a in actions] == ["move(r,l1,l2)", "move(r,l2,l1)"]
    assert views == {"at(r)": frozenset({"l1", "l2"})}


def test_invisible_variable_never_grounded():
    domain = MOVE_DOMAIN.replace(
        "(:variables (at ?r - robot - loc))", "(:variables (at ?r - robot - loc) (fuel ?r - robot - loc))"
    ).replace(
        "(:action move",
        "(:action refuel :parameters (?r - robot ?a - loc) :precondition (and (= (fuel ?r) ?a)) "
        ":effect (and (assign (fuel ?r) ?a)))\n  (:action move",
    )
    other = "(define (problem q) (:objects s - robot L1 L2 - loc) (:init (= (at s) L1)) (:goal (and)))"
    dom, problems, shared = parse_task(domain, {"a": move_problem(["L1", "L2"]), "b": other})
    actions, views = ground(dom, problems, shared, "a")
    assert "fuel(s)" not in views
    assert all("fuel(s)" not in a.variables() for a in actions)


def test_agents_sharing_everything_ground_identically():
    shared = "(:shared-data ((at r) :with (b :values (L1 L2))))"
    dom, problems, decl = parse_task(
        MOVE_DOMAIN, {"a": move_problem(["L1", "L2"]), "b": move_problem(["L1", "L2"], name="q")}, {"a": shared}
    )
    assert ground(dom, problems, decl, "a") == ground(dom, problems, decl, "b")


def test_grounding_deterministic_and_preconditions_visible():
    for files in corpus_files():
        dom, problems, shared = files.parse()
        for agent in problems:
            first, views = ground(dom, problems, shared, agent)
            again, _ = ground(dom, problems, shared, agent)
            assert first == again
            assert list(first) == sorted(first, key=lambda a: (a.name, a.args))
            assert all(p.var in views for a in first for p in a.pre)


def test_parse_print_parse_fixpoint():
    for files in corpus_files():
        dom, problems, shared = files.parse()
        assert parse_domain(print_domain(dom)) == dom
        for agent, prob in problems.items():
            assert parse_problem(print_problem(prob), dom) == prob
        for agent, text in files.shared.items():
            decl = parse_shared_data(text, agent)
            assert parse_shared_data(print_shared_data(decl), agent) == decl


def test_inconsistent_initial_values_across_agents(tmp_path):
    shared = "(:shared-data ((at r) :with (b :values (L1 L2))))"
    b = "(define (problem q) (:objects r - robot L1 L2 - loc) (:init (= (at r) L2)) (:goal (and)))"
    files = TaskFiles(tmp_path / "clash", MOVE_DOMAIN, {"a": move_problem(["L1", "L2"]), "b": b}, {"a": shared})
    with pytest.raises(TaskError):
        files.task()


def test_task_files_round_trip(tmp_path, micro_files):
    again = TaskFiles.read(micro_files.root)
    assert again.domain == micro_files.domain
    assert again.problems == micro_files.problems
    assert again.task().name == "micro"
