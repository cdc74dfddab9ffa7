"""Independent plan checker, execution simulator and plan metrics.

Nothing here calls into the planner's threat or projection code; the checks
are written again from the definitions so that a planner bug cannot hide
itself.

Rules reported in findings:

1. ordering: acyclic, bounded by a0/a∞, every link runs forwards
2. support: every precondition has exactly one link from a real producer
3. threats: none in the full plan or in any agent's projection
4. consistency: no unordered pair with contradicting supported preconditions
5. solution: every agent sees zero open goals
6. ownership: each step's agent holds its action
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import PreconditionError
from .plan import GOAL, INIT, PartialPlan
from .task import UNDEFINED, Effect, Fluent, MapTask, Truth, apply, evaluate


@dataclass(frozen=True)
class Finding:
    rule: int
    location: str
    description: str

    def __str__(self) -> str:
        return f"rule {self.rule} at {self.location}: {self.description}"


@dataclass(frozen=True)
class Metrics:
    acts: int
    ts: int
    partics: int

    def __iter__(self):
        return iter((self.acts, self.ts, self.partics))


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)
    metrics: Metrics | None = None

    @property
    def valid(self) -> bool:
        return not self.findings

    @property
    def verdict(self) -> str:
        return "valid" if self.valid else "invalid"

    def rules(self) -> set[int]:
        return {f.rule for f in self.findings}

    def text(self) -> str:
        lines = [self.verdict]
        lines += [str(f) for f in self.findings]
        if self.metrics is not None:
            m = self.metrics
            lines.append(f"acts={m.acts} ts={m.ts} partics={m.partics}")
        return "\n".join(lines) + "\n"


# --- ordering -----------------------------------------------------------------------


def _edges(plan: PartialPlan) -> dict[int, set[int]]:
    nodes = [INIT, GOAL, *plan.steps]
    out: dict[int, set[int]] = {n: set() for n in nodes}
    for a, b in plan.orderings:
        out.setdefault(a, set()).add(b)
        out.setdefault(b, set())
    for l in plan.links:
        out.setdefault(l.producer, set()).add(l.consumer)
        out.setdefault(l.consumer, set())
    for s in plan.steps:
        out[INIT].add(s)
        out[s].add(GOAL)
    out[INIT].add(GOAL)
    return out


def _reach(edges: dict[int, set[int]]) -> dict[int, set[int]]:
    reach = {}
    for s in edges:
        seen: set[int] = set()
        todo = list(edges[s])
        while todo:
            x = todo.pop()
            if x not in seen:
                seen.add(x)
                todo.extend(edges.get(x, ()))
        reach[s] = seen
    return reach


def _topological(edges: dict[int, set[int]], rng: random.Random | None = None) -> list[int] | None:
    indeg = {n: 0 for n in edges}
    for a in edges:
        for b in edges[a]:
            indeg[b] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        i = rng.randrange(len(ready)) if rng is not None else 0
        n = ready.pop(i)
        order.append(n)
        for m in sorted(edges[n]):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
        ready.sort()
    return order if len(order) == len(edges) else None


# --- visibility ---------------------------------------------------------------------


def _see_fluent(task: MapTask, agent: str | None, f: Fluent) -> Fluent | None:
    if agent is None:
        return f
    dom = task.views[agent].get(f.var)
    if dom is None:
        return None
    return f if f.value in dom else Fluent(f.var, UNDEFINED)


def _see_effect(task: MapTask, agent: str | None, e: Effect) -> Effect | None:
    if agent is None:
        return e
    dom = task.views[agent].get(e.var)
    if dom is None:
        return None
    return e if e.value in dom else Effect(e.var, UNDEFINED, e.assign)


def _clobbers(e: Effect, f: Fluent) -> bool:
    # any undefined side is treated as a clash
    if UNDEFINED in (e.value, f.value):
        return True
    same = e.value == f.value
    if e.assign:
        return same != f.positive
    return same and f.positive


def _makes(plan: PartialPlan, sid: int, f: Fluent) -> bool:
    if sid == INIT:
        return f in plan.init_state
    if sid not in plan.steps:
        return False
    for e in plan.steps[sid].action.eff:
        if e.var != f.var or e.value == UNDEFINED:
            continue
        if e.assign and (e.value == f.value) == f.positive:
            return True
        if not e.assign and not f.positive and e.value == f.value:
            return True
    return False


def _pre(plan: PartialPlan, sid: int) -> tuple[Fluent, ...]:
    if sid == GOAL:
        return plan.goals
    if sid == INIT:
        return ()
    return plan.steps[sid].action.pre


# --- validate -----------------------------------------------------------------------


def validate(plan: PartialPlan, task: MapTask, check_ownership: bool = True) -> ValidationReport:
    report = ValidationReport()
    add = report.findings.append
    known = {INIT, GOAL, *plan.steps}

    # rule 1
    for a, b in sorted(plan.orderings):
        if a not in known or b not in known:
            add(Finding(1, f"{a}<{b}", "ordering mentions an unknown step"))
        elif a == GOAL or b == INIT:
            add(Finding(1, f"{a}<{b}", "ordering crosses the plan bounds"))
    edges = _edges(plan)
    reach = _reach(edges)
    cyclic = [s for s in sorted(reach) if s in reach[s]]
    for s in cyclic:
        add(Finding(1, str(s), "step lies on an ordering cycle"))
    if cyclic:
        return report

    # rule 2
    support: dict[tuple[int, Fluent], int] = {}
    for l in sorted(plan.links):
        where = f"{l.producer}->{l.consumer}"
        if l.consumer not in known or l.producer not in known:
            add(Finding(2, where, "link mentions an unknown step"))
            continue
        if l.fluent not in _pre(plan, l.consumer):
            add(Finding(2, where, f"{l.fluent} is not a precondition of the consumer"))
        if not _makes(plan, l.producer, l.fluent):
            add(Finding(2, where, f"producer does not achieve {l.fluent}"))
        support[(l.consumer, l.fluent)] = support.get((l.consumer, l.fluent), 0) + 1
    unsupported = []
    for sid in sorted(known):
        for p in _pre(plan, sid):
            n = support.get((sid, p), 0)
            if n == 0:
                unsupported.append((sid, p))
                add(Finding(2, str(sid), f"precondition {p} has no causal link"))
            elif n > 1:
                add(Finding(2, str(sid), f"precondition {p} has {n} causal links"))

    # rule 3
    for agent in (None, *task.agents):
        who = agent or "full view"
        for l in sorted(plan.links):
            f = _see_fluent(task, agent, l.fluent)
            if f is None:
                continue
            for sid in sorted(plan.steps):
                if sid in (l.producer, l.consumer):
                    continue
                if l.producer in reach.get(sid, ()) or sid in reach.get(l.consumer, ()):
                    continue
                for e in plan.steps[sid].action.eff:
                    if e.var != f.var:
                        continue
                    seen = _see_effect(task, agent, e)
                    if seen is not None and _clobbers(seen, f):
                        add(Finding(3, f"{sid} vs {l.producer}->{l.consumer}", f"{seen} threatens {f} ({who})"))
                        break

    # rule 4
    needs: dict[int, list[Fluent]] = {}
    for l in plan.links:
        if l.consumer in plan.steps:
            needs.setdefault(l.consumer, []).append(l.fluent)
    sids = sorted(needs)
    for i, a in enumerate(sids):
        for b in sids[i + 1 :]:
            if b in reach[a] or a in reach[b]:
                continue
            for p in needs[a]:
                for q in needs[b]:
                    if p.var == q.var and _contradict(p, q):
                        add(Finding(4, f"{a}|{b}", f"unordered steps require {p} and {q}"))

    # rule 5
    for agent in task.agents:
        visible = [(s, f) for s, f in unsupported if f.var in task.views[agent]]
        if visible:
            add(Finding(5, agent, f"{len(visible)} open goal(s) visible"))

    # rule 6
    if check_ownership:
        for sid, step in sorted(plan.steps.items()):
            held = {(a.name, a.args) for a in task.actions.get(step.agent, ())}
            if (step.action.name, step.action.args) not in held:
                add(Finding(6, str(sid), f"{step.agent} does not hold {step.action.label}"))

    report.metrics = metrics(plan, task)
    return report


def _contradict(p: Fluent, q: Fluent) -> bool:
    if p.positive and q.positive:
        return p.value != q.value
    if p.positive != q.positive:
        return p.value == q.value
    return False


# --- simulate -------------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    success: bool
    orders: int
    failure: str = ""


def linearizations(plan: PartialPlan, seed: int, samples: int = 10) -> list[list[int]]:
    rng = random.Random(seed)
    edges = _edges(plan)
    out = []
    for _ in range(samples):
        order = _topological(edges, rng)
        if order is None:
            return []
        out.append([s for s in order if s not in (INIT, GOAL)])
    return out


def simulate(plan: PartialPlan, task: MapTask, seed: int = 0, samples: int = 10) -> SimulationResult:
    """Execute sampled topological orders from the merged initial state."""
    orders = linearizations(plan, seed, samples)
    if not orders:
        return SimulationResult(False, 0, "orderings are cyclic")
    domains = task.domains
    for n, order in enumerate(orders):
        state = task.initial_state
        for sid in order:
            step = plan.steps[sid]
            try:
                state = apply(state, step.action, domains)
            except PreconditionError as exc:
                return SimulationResult(False, n + 1, f"order {n}: step {sid} ({step}): {exc}")
        for g in task.all_goals:
            if evaluate(g, state) is not Truth.TRUE:
                return SimulationResult(False, n + 1, f"order {n}: goal {g} does not hold")
    return SimulationResult(True, len(orders))


# --- metrics ------------------------------------------------------------------------------


def levels(plan: PartialPlan) -> dict[int, int]:
    """Time step of every real step: length of the longest chain ending in it."""
    edges = _edges(plan)
    order = _topological(edges)
    if order is None:
        raise ValueError("orderings are cyclic")
    depth = {s: 0 for s in edges}
    for s in order:
        for t in edges[s]:
            w = 1 if t in plan.steps else 0
            depth[t] = max(depth[t], depth[s] + w)
    return {s: depth[s] for s in plan.steps}


def metrics(plan: PartialPlan, task: MapTask | None = None) -> Metrics:
    lv = levels(plan)
    return Metrics(len(plan.steps), max(lv.values(), default=0), len({s.agent for s in plan.steps.values()}))


def coupling_level(task: MapTask) -> float:
    """Mean over agents of the percentage of their actions touching a variable another agent sees."""
    shares = []
    for agent in task.agents:
        acts = task.actions.get(agent, ())
        if not acts:
            continue
        public = 0
        for a in acts:
            if any(j != agent for v in a.variables() for j in task.seers(v)):
                public += 1
        shares.append(100.0 * public / len(acts))
    return sum(shares) / len(shares) if shares else 0.0
