"""Each agent's embedded partial-order planner.

Threats are checked in every agent's projection: a link whose value an agent
cannot see shows up there as ``<v, ⊥>`` and conflicts with any effect on ``v``.
``refine`` runs A* over plans, starting at a base plan, and returns up to ``k``
threat-free refinements that support the selected open goal.
"""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

from .disrpg import RelaxedPlanningGraph
from .errors import CompositionError
from .plan import GOAL, INIT, CausalLink, PartialPlan, PlanView, Step, project_plan
from .task import UNDEFINED, Effect, Fluent, MapTask, entails


@dataclass(frozen=True, order=True)
class Threat:
    step: int
    link: CausalLink

    def __str__(self) -> str:
        return f"{self.step} threatens {self.link}"


def conflicts(effect: Effect, fluent: Fluent) -> bool:
    """Does ``effect`` clobber a link carrying ``fluent``?  Same variable assumed."""
    if effect.value == UNDEFINED or fluent.undefined:
        return True
    if effect.assign:
        return (effect.value != fluent.value) if fluent.positive else effect.value == fluent.value
    return fluent.positive and effect.value == fluent.value


def _may_intervene(plan: PartialPlan, s: int, link: CausalLink) -> bool:
    if s in (INIT, GOAL, link.producer, link.consumer):
        return False
    return not plan.before(s, link.producer) and not plan.before(link.consumer, s)


def detect_threats(view: PlanView) -> set[Threat]:
    """Threats as seen in one agent's projection."""
    plan = view.plan
    by_var: dict[str, list[tuple[int, Effect]]] = {}
    for sid in plan.steps:
        for e in view.eff.get(sid, ()):
            by_var.setdefault(e.var, []).append((sid, e))
    out = set()
    for link in view.links:
        for sid, e in by_var.get(link.fluent.var, ()):
            if _may_intervene(plan, sid, link) and conflicts(e, link.fluent):
                out.add(Threat(sid, link))
    return out


def threats(plan: PartialPlan, task: MapTask) -> list[Threat]:
    """Threats present in the full plan or in any agent's projection of it.

    Equivalent to the union of :func:`detect_threats` over every view (links
    reported with their unprojected fluent), without building the views.
    """
    by_var: dict[str, list[tuple[int, Effect]]] = {}
    for sid, step in plan.steps.items():
        for e in step.action.eff:
            by_var.setdefault(e.var, []).append((sid, e))
    out = set()
    for link in plan.links:
        f = link.fluent
        for sid, e in by_var.get(f.var, ()):
            if not _may_intervene(plan, sid, link):
                continue
            if conflicts(e, f):
                out.add(Threat(sid, link))
                continue
            for agent in task.seers(f.var):
                dom = task.views[agent][f.var]
                if e.value not in dom or f.value not in dom:
                    out.add(Threat(sid, link))
                    break
    return sorted(out)


def resolve_threat(plan: PartialPlan, threat: Threat) -> list[PartialPlan]:
    """Promotion and demotion children that stay acyclic."""
    out = []
    promoted = plan.add_ordering(threat.link.consumer, threat.step)
    if promoted is not None:
        out.append(promoted)
    demoted = plan.add_ordering(threat.step, threat.link.producer)
    if demoted is not None:
        out.append(demoted)
    return out


def heuristic_F(view: PlanView, rpg: RelaxedPlanningGraph, penalty: float = 1.0) -> float:
    total = 0.0
    for _, f in view.open_goals:
        if f.undefined:
            total += penalty
            continue
        c = rpg.cost(f)
        if c is None:
            return math.inf
        total += c
    return total + len(detect_threats(view))


def _consistent(p: Fluent, q: Fluent) -> bool:
    if p.var != q.var:
        return True
    if p.positive and q.positive:
        return p.value == q.value
    if p.positive != q.positive:
        return p.value != q.value
    return True


def inconsistencies(plan: PartialPlan) -> list[tuple[int, int, Fluent, Fluent]]:
    """Unordered step pairs whose supported preconditions contradict each other."""
    supported: dict[int, list[Fluent]] = {}
    for l in plan.links:
        supported.setdefault(l.consumer, []).append(l.fluent)
    out = []
    sids = sorted(s for s in supported if s not in (INIT, GOAL))
    for a, b in itertools.combinations(sids, 2):
        if not plan.unordered(a, b):
            continue
        for p in supported[a]:
            for q in supported[b]:
                if not _consistent(p, q):
                    out.append((a, b, p, q))
    return out


@dataclass(frozen=True)
class RefinementStep:
    """What one agent adds to a base plan to support one open goal."""

    agent: str
    goal: tuple[int, Fluent]
    base_key: str
    steps: tuple[Step, ...]
    orderings: frozenset
    links: frozenset
    plan: PartialPlan = field(compare=False, repr=False)

    @property
    def signature(self) -> str:
        return self.plan.signature


def _diff(base: PartialPlan, plan: PartialPlan, agent: str, goal) -> RefinementStep:
    return RefinementStep(
        agent,
        goal,
        base.key,
        tuple(s for sid, s in sorted(plan.steps.items()) if sid not in base.steps),
        plan.orderings - base.orderings,
        plan.links - base.links,
        plan,
    )


def compose(base: PartialPlan, step: RefinementStep, task: MapTask | None = None) -> PartialPlan:
    """Union of the base plan and the refinement, checked to be a concurrent MA plan."""
    steps = dict(base.steps)
    for s in step.steps:
        if s.id in steps and steps[s.id] != s:
            raise CompositionError(f"step id {s.id} already used in the base plan")
        steps[s.id] = s
    links = base.links | step.links
    plan = PartialPlan(base.init_state, base.goals, steps, base.orderings | step.orderings, links, frozenset())
    supported: set[tuple[int, Fluent]] = set()
    for l in links:
        key = (l.consumer, l.fluent)
        if key in supported:
            raise CompositionError(f"precondition {l.fluent} of step {l.consumer} supported twice")
        if l.fluent not in plan.preconditions(l.consumer):
            raise CompositionError(f"link {l} does not match a precondition")
        if not plan.produces(l.producer, l.fluent):
            raise CompositionError(f"link {l} producer does not achieve its fluent")
        supported.add(key)
    opens = frozenset((sid, p) for sid in plan.step_ids() for p in plan.preconditions(sid)) - supported
    plan = PartialPlan(plan.init_state, plan.goals, steps, plan.orderings, links, opens)
    if not plan.acyclic():
        raise CompositionError("orderings are cyclic")
    for l in links:
        if not plan.before(l.producer, l.consumer):
            raise CompositionError(f"link {l} runs backwards")
    if task is not None:
        bad = threats(plan, task)
        if bad:
            raise CompositionError(f"unresolved threat: {bad[0]}")
    clash = inconsistencies(plan)
    if clash:
        a, b, p, q = clash[0]
        raise CompositionError(f"steps {a} and {b} are unordered with preconditions {p} and {q}")
    return plan


def _goal_resolvers(
    plan: PartialPlan, sid: int, f: Fluent, agent: str, task: MapTask, added: int, max_new_steps: int | None
) -> list[PartialPlan]:
    out = []
    if not task.fully_visible(agent, f):
        return out
    # existing producers, a0 first
    if f in plan.init_state and f in task.init[agent]:
        linked = plan.add_link(INIT, sid, f)
        if linked is not None:
            out.append(linked)
    for pid in sorted(plan.steps):
        if pid != sid and not plan.before(sid, pid) and plan.produces(pid, f):
            linked = plan.add_link(pid, sid, f)
            if linked is not None:
                out.append(linked)
    if max_new_steps is not None and added >= max_new_steps:
        return out
    for action in task.actions[agent]:
        if any(entails(e, f) for e in action.eff):
            grown, new = plan.add_step(action, agent)
            linked = grown.add_link(new, sid, f)
            if linked is not None:
                out.append(linked)
    return out


def refine(
    base: PartialPlan,
    goal: tuple[int, Fluent],
    agent: str,
    task: MapTask,
    rpg: RelaxedPlanningGraph,
    k: int | None = 4,
    node_budget: int | None = 10_000,
    max_new_steps: int | None = None,
    penalty: float = 1.0,
    prune: bool = True,
    deadline: float | None = None,
) -> list[RefinementStep]:
    """A* from ``base`` to plans that support ``goal`` and all new private open goals.

    Nodes are ordered by ``F(view) + |Δ|``, then ``|Δ|``, then plan key.  An
    empty result means the agent refrains.  ``k`` and ``node_budget`` may be
    None for an exhaustive search.  With ``prune`` children whose view has an
    unreachable open goal are dropped instead of queued last.  ``deadline`` is
    a ``time.monotonic()`` value after which the search stops.
    """
    sid, g = goal
    assert task.sees(agent, g.var), f"{agent} cannot see {g.var}"
    if goal not in base.open_goals or not task.fully_visible(agent, g):
        return []
    base_steps = set(base.steps)

    def responsibilities(plan: PartialPlan) -> list[tuple[int, Fluent]]:
        out = [goal] if goal in plan.open_goals else []
        out += sorted(
            (s, f)
            for s, f in plan.open_goals
            if s not in base_steps and s not in (INIT, GOAL) and task.private_to(agent, f.var)
        )
        return out

    def priority(plan: PartialPlan) -> tuple:
        h = heuristic_F(project_plan(plan, agent, task), rpg, penalty)
        return (h + plan.n_actions, plan.n_actions, plan.key)

    counter = itertools.count()
    heap = [(*priority(base), next(counter), base)]
    closed: set[str] = set()
    found: dict[str, RefinementStep] = {}
    expanded = 0
    while heap:
        *_, plan = heapq.heappop(heap)
        if plan.key in closed:
            continue
        closed.add(plan.key)
        if node_budget is not None and expanded >= node_budget:
            break
        if deadline is not None and expanded % 32 == 0 and time.monotonic() > deadline:
            break
        expanded += 1
        flaws = threats(plan, task)
        if flaws:
            children = resolve_threat(plan, flaws[0])
        else:
            todo = responsibilities(plan)
            if not todo:
                if not inconsistencies(plan) and plan.signature not in found:
                    found[plan.signature] = _diff(base, plan, agent, goal)
                    if k is not None and len(found) >= k:
                        break
                continue
            s, f = todo[0]
            children = _goal_resolvers(plan, s, f, agent, task, len(plan.steps) - len(base_steps), max_new_steps)
        for child in children:
            if child.key not in closed:
                rank = priority(child)
                if prune and rank[0] == math.inf:
                    continue
                heapq.heappush(heap, (*rank, next(counter), child))
    return list(found.values())
