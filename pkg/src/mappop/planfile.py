"""Text plan format.

::

    ; plan <problem>
    1: truck drive(t1,loca,apa)
    2: truck unload(p1,t1,apa) , plane fly(pl,apb,apa)
    ; acts=2 ts=2 partics=2

Each line is one time step; a step runs after everything on earlier lines.
"""

from __future__ import annotations

import re

from .errors import ParseError, SemanticError
from .plan import GOAL, INIT, CausalLink, PartialPlan, Step
from .task import MapTask, entails
from .validator import levels, metrics

_ACTION = re.compile(r"^\s*(\S+)\s+([\w\-]+)\(([^()]*)\)\s*$")


def format_plan(plan: PartialPlan, problem: str) -> str:
    lv = levels(plan)
    rows: dict[int, list[Step]] = {}
    for sid, step in plan.steps.items():
        rows.setdefault(lv[sid], []).append(step)
    lines = [f"; plan {problem}"]
    for t in sorted(rows):
        steps = sorted(rows[t], key=lambda s: (s.agent, s.action.name, s.action.args))
        lines.append(f"{t}: " + " , ".join(f"{s.agent} {s.action.label}" for s in steps))
    m = metrics(plan)
    lines.append(f"; acts={m.acts} ts={m.ts} partics={m.partics}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str, task: MapTask) -> tuple[str, list[list[Step]]]:
    """Problem name and the steps of each time step, in file order."""
    problem = ""
    layers: list[list[Step]] = []
    last_t = 0
    sid = GOAL
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(";"):
            m = re.match(r";\s*plan\s+(\S+)", line)
            if m:
                problem = m.group(1)
            continue
        head, sep, body = line.partition(":")
        if not sep or not head.strip().isdigit():
            raise ParseError("expected '<time>: <agent> <action>(...)'", n, 1)
        t = int(head)
        if t <= last_t:
            raise ParseError(f"time step {t} is not increasing", n, 1)
        last_t = t
        layer = []
        for part in body.split(" , "):
            m = _ACTION.match(part)
            if not m:
                raise ParseError(f"cannot read action {part.strip()!r}", n, raw.find(part.strip()) + 1)
            agent, name, args = m.group(1), m.group(2), tuple(a.strip() for a in m.group(3).split(",") if a.strip())
            if agent not in task.agents:
                raise SemanticError("unknown agent", agent)
            action = next((a for a in task.actions[agent] if a.name == name and a.args == args), None)
            if action is None:
                raise SemanticError(f"{agent} has no action", f"{name}({','.join(args)})")
            sid += 1
            layer.append(Step(sid, action, agent))
        layers.append(layer)
    return problem, layers


def read_plan(text: str, task: MapTask) -> PartialPlan:
    """Rebuild a partial-order plan from its time steps.

    Every step follows all steps of the previous line, and every precondition
    is linked from the latest earlier producer (or from a0).  Whatever this
    leaves unsupported stays an open goal.
    """
    _, layers = parse_plan(text, task)
    steps = {s.id: s for layer in layers for s in layer}
    layer_of = {s.id: i for i, layer in enumerate(layers) for s in layer}
    orderings = set()
    for i in range(1, len(layers)):
        for a in layers[i - 1]:
            for b in layers[i]:
                orderings.add((a.id, b.id))
    links = set()
    opens = set()

    def support(consumer: int, limit: int, f) -> None:
        for i in range(limit - 1, -1, -1):
            for s in layers[i]:
                if any(entails(e, f) for e in s.action.eff):
                    links.add(CausalLink(s.id, consumer, f))
                    return
        if f in task.initial_state:
            links.add(CausalLink(INIT, consumer, f))
        else:
            opens.add((consumer, f))

    for sid, step in steps.items():
        for p in step.action.pre:
            support(sid, layer_of[sid], p)
    for g in task.all_goals:
        support(GOAL, len(layers), g)
    return PartialPlan(task.initial_state, task.all_goals, steps, frozenset(orderings), frozenset(links), frozenset(opens))
