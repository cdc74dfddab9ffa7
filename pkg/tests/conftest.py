from __future__ import annotations

import sys

import pytest

from mappop.frontend import TaskFiles
from mappop.task import Effect, Fluent, GroundAction, MapTask

MOVE_DOMAIN = """\
(define (domain micro)
  (:types loc robot)
  (:variables (at ?r - robot - loc))
  (:action move
    :parameters (?r - robot ?a ?b - loc)
    :precondition (and (= (at ?r) ?a) (!= ?a ?b))
    :effect (and (assign (at ?r) ?b))))
"""


def move_problem(locs, goal="L2", name="micro"):
    return (
        f"(define (problem {name})\n"
        f"  (:objects r - robot {' '.join(locs)} - loc)\n"
        f"  (:init (= (at r) {locs[0]}))\n"
        f"  (:goal (and (= (at r) {goal}))))\n"
    )


@pytest.fixture
def micro_files(tmp_path):
    files = TaskFiles(tmp_path / "micro", MOVE_DOMAIN, {"robot": move_problem(["L1", "L2"])})
    files.write()
    return files


@pytest.fixture
def micro_task(micro_files):
    return micro_files.task()


def move(a, b, var="at"):
    return GroundAction("move", (a, b), (Fluent(var, a),), (Effect(var, b),))


def chain_task(n=3, goal=None):
    """One agent moving along L1 -> L2 -> ... -> Ln."""
    locs = [f"L{i}" for i in range(1, n + 1)]
    acts = [move(locs[i], locs[i + 1]) for i in range(n - 1)]
    return MapTask.build(
        "chain", {"a": {"at": locs}}, {"a": acts}, {"a": {"at": "L1"}}, {"a": [Fluent("at", goal or locs[-1])]}
    )


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
