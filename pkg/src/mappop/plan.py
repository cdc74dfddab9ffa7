"""Partial-order plans, per-agent plan views and canonical plan signatures."""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping

from .task import Effect, Fluent, GroundAction, MapTask, entails, project_effect, project_fluent

INIT = 0
GOAL = 1


@dataclass(frozen=True, order=True)
class Step:
    id: int
    action: GroundAction
    agent: str

    def __str__(self) -> str:
        return f"{self.agent} {self.action.label}"


@dataclass(frozen=True, order=True)
class CausalLink:
    producer: int
    consumer: int
    fluent: Fluent

    def __str__(self) -> str:
        return f"{self.producer}-{self.fluent}->{self.consumer}"


@dataclass(frozen=True, eq=False)
class PartialPlan:
    """Immutable partial-order plan.

    The synthetic initial step ``INIT`` produces ``init_state``; the synthetic
    goal step ``GOAL`` consumes ``goals``.  Both are implicit bounds of the
    ordering: ``INIT`` precedes and ``GOAL`` follows every other step, so
    ``orderings`` only stores pairs that matter between real steps (plus any
    explicit pairs involving the bounds).
    """

    init_state: frozenset
    goals: tuple[Fluent, ...]
    steps: Mapping[int, Step] = field(default_factory=dict)
    orderings: frozenset = frozenset()
    links: frozenset = frozenset()
    open_goals: frozenset = frozenset()

    @classmethod
    def empty(cls, task: MapTask) -> "PartialPlan":
        goals = task.all_goals
        return cls(task.initial_state, goals, {}, frozenset(), frozenset(), frozenset((GOAL, g) for g in goals))

    # --- queries ---------------------------------------------------------------

    @property
    def n_actions(self) -> int:
        return len(self.steps)

    def step_ids(self) -> list[int]:
        return [INIT, GOAL, *sorted(self.steps)]

    def preconditions(self, sid: int) -> tuple[Fluent, ...]:
        if sid == GOAL:
            return self.goals
        if sid == INIT:
            return ()
        return self.steps[sid].action.pre

    def effects(self, sid: int) -> tuple[Effect, ...]:
        if sid in (INIT, GOAL):
            return ()
        return self.steps[sid].action.eff

    def produces(self, sid: int, fluent: Fluent) -> bool:
        if sid == INIT:
            return fluent in self.init_state
        return any(entails(e, fluent) for e in self.effects(sid))

    @cached_property
    def successors(self) -> dict[int, frozenset]:
        """Transitive successors of each step over the explicit orderings."""
        direct: dict[int, set[int]] = {s: set() for s in self.step_ids()}
        for a, b in self.orderings:
            direct.setdefault(a, set()).add(b)
            direct.setdefault(b, set())
        out: dict[int, frozenset] = {}
        for s in direct:
            seen: set[int] = set()
            stack = list(direct[s])
            while stack:
                x = stack.pop()
                if x not in seen:
                    seen.add(x)
                    stack.extend(direct[x])
            out[s] = frozenset(seen)
        return out

    def before(self, a: int, b: int) -> bool:
        """``a`` is necessarily ordered before ``b``."""
        if a == b:
            return False
        if a == INIT or b == GOAL:
            return True
        if a == GOAL or b == INIT:
            return False
        return b in self.successors.get(a, ())

    def unordered(self, a: int, b: int) -> bool:
        return a != b and not self.before(a, b) and not self.before(b, a)

    def acyclic(self) -> bool:
        succ = self.successors
        if any(s in succ[s] for s in succ):
            return False
        return all(a != GOAL and b != INIT for a, b in self.orderings)

    def link_for(self, consumer: int, fluent: Fluent) -> CausalLink | None:
        for link in self.links:
            if link.consumer == consumer and link.fluent == fluent:
                return link
        return None

    # --- construction ------------------------------------------------------------

    def _replace(self, **changes) -> "PartialPlan":
        fields = dict(
            init_state=self.init_state,
            goals=self.goals,
            steps=self.steps,
            orderings=self.orderings,
            links=self.links,
            open_goals=self.open_goals,
        )
        fields.update(changes)
        return PartialPlan(**fields)

    def add_step(self, action: GroundAction, agent: str) -> tuple["PartialPlan", int]:
        sid = max([GOAL, *self.steps]) + 1
        steps = dict(self.steps)
        steps[sid] = Step(sid, action, agent)
        goals = self.open_goals | {(sid, p) for p in action.pre}
        out = self._replace(steps=steps, open_goals=goals)
        succ = dict(self.successors)
        succ[sid] = frozenset()
        out.__dict__["successors"] = succ
        return out, sid

    def add_ordering(self, a: int, b: int) -> "PartialPlan | None":
        """Plan with ``a`` before ``b``, or None when that would create a cycle."""
        if a == b or a == GOAL or b == INIT or self.before(b, a):
            return None
        if a == INIT or b == GOAL or self.before(a, b):
            return self
        out = self._replace(orderings=self.orderings | {(a, b)})
        # extend the closure instead of recomputing it
        succ = dict(self.successors)
        gained = succ.get(b, frozenset()) | {b}
        for x, after in self.successors.items():
            if x == a or a in after:
                succ[x] = after | gained
        out.__dict__["successors"] = succ
        return out

    def add_link(self, producer: int, consumer: int, fluent: Fluent) -> "PartialPlan | None":
        if (consumer, fluent) not in self.open_goals:
            raise ValueError(f"{fluent} is not an open goal of step {consumer}")
        ordered = self.add_ordering(producer, consumer)
        if ordered is None:
            return None
        return ordered._replace(
            links=self.links | {CausalLink(producer, consumer, fluent)},
            open_goals=self.open_goals - {(consumer, fluent)},
        )

    # --- identity --------------------------------------------------------------------

    @cached_property
    def key(self) -> str:
        """Deterministic id-based fingerprint (cheap; not invariant under renaming)."""
        steps = ";".join(f"{s.id}:{s.agent}:{s.action.label}" for s in sorted(self.steps.values()))
        orders = ";".join(f"{a}<{b}" for a, b in sorted(self.orderings))
        links = ";".join(f"{l.producer}>{l.consumer}:{l.fluent}" for l in sorted(self.links))
        return f"{steps}|{orders}|{links}"

    @cached_property
    def signature(self) -> str:
        """Canonical fingerprint, identical for plans equal up to step renaming."""
        return canonical_signature(self)

    def __repr__(self) -> str:
        return f"PartialPlan({self.n_actions} actions, {len(self.open_goals)} open goals)"


# --- canonical signatures ---------------------------------------------------------------

_MAX_LEAVES = 2048


def canonical_signature(plan: PartialPlan) -> str:
    ids = plan.step_ids()
    label = {INIT: "a0", GOAL: "a∞"}
    for s in plan.steps.values():
        label[s.id] = f"{s.agent}:{s.action.label}"
    succ = {s: [t for t in ids if plan.before(s, t) and s != INIT and t != GOAL] for s in ids}
    pred: dict[int, list[int]] = {s: [] for s in ids}
    for s, ts in succ.items():
        for t in ts:
            pred[t].append(s)
    out_links: dict[int, list] = {s: [] for s in ids}
    in_links: dict[int, list] = {s: [] for s in ids}
    for l in plan.links:
        out_links[l.producer].append((str(l.fluent), l.consumer))
        in_links[l.consumer].append((str(l.fluent), l.producer))
    opens: dict[int, list[str]] = {s: [] for s in ids}
    for sid, f in plan.open_goals:
        opens[sid].append(str(f))

    def refine(colors: dict[int, int]) -> dict[int, int]:
        while True:
            sig = {
                s: (
                    colors[s],
                    tuple(sorted((f, colors[c]) for f, c in out_links[s])),
                    tuple(sorted((f, colors[p]) for f, p in in_links[s])),
                    tuple(sorted(colors[t] for t in succ[s])),
                    tuple(sorted(colors[t] for t in pred[s])),
                )
                for s in ids
            }
            ranks = {v: i for i, v in enumerate(sorted(set(sig.values())))}
            new = {s: ranks[sig[s]] for s in ids}
            if len(ranks) == len(set(colors.values())):
                return new
            colors = new

    def serialise(colors: dict[int, int]) -> str:
        order = sorted(ids, key=lambda s: colors[s])
        idx = {s: i for i, s in enumerate(order)}
        steps = ",".join(label[s] for s in order)
        links = sorted((idx[l.producer], idx[l.consumer], str(l.fluent)) for l in plan.links)
        orders = sorted((idx[s], idx[t]) for s in ids for t in succ[s])
        goals = sorted((idx[s], str(f)) for s, f in plan.open_goals)
        return f"[{steps}]L{links}O{orders}G{goals}"

    base = {s: (label[s], tuple(sorted(opens[s]))) for s in ids}
    labels = sorted(set(base.values()))
    start = refine({s: labels.index(base[s]) for s in ids})
    best: list[str] = []
    leaves = [0]

    def search(colors: dict[int, int]) -> None:
        classes: dict[int, list[int]] = {}
        for s in ids:
            classes.setdefault(colors[s], []).append(s)
        tied = [c for c in sorted(classes) if len(classes[c]) > 1]
        if not tied or leaves[0] >= _MAX_LEAVES:
            leaves[0] += 1
            text = serialise({s: (colors[s], s) for s in ids} if tied else colors)
            if not best or text < best[0]:
                best[:] = [text]
            return
        c = tied[0]
        for member in classes[c]:
            split = {s: 2 * colors[s] + (0 if s == member else 1) for s in ids}
            search(refine(split))

    search(start)
    return best[0]


# --- views -------------------------------------------------------------------------------

_projection_cache: "weakref.WeakKeyDictionary[MapTask, dict]" = weakref.WeakKeyDictionary()


def _cache(task: MapTask) -> dict:
    try:
        return _projection_cache[task]
    except KeyError:
        return _projection_cache.setdefault(task, {})


def _project_action(action: GroundAction, agent: str, task: MapTask) -> tuple[tuple, tuple]:
    cache = _cache(task)
    key = ("a", agent, action.name, action.args)
    hit = cache.get(key)
    if hit is None:
        pre = tuple(p for p in (project_fluent(f, agent, task) for f in action.pre) if p is not None)
        eff = tuple(e for e in (project_effect(x, agent, task) for x in action.eff) if e is not None)
        hit = cache[key] = (pre, eff)
    return hit


def _project_fluent_cached(fluent: Fluent, agent: str, task: MapTask) -> Fluent | None:
    cache = _cache(task)
    key = ("f", agent, fluent)
    if key not in cache:
        cache[key] = project_fluent(fluent, agent, task)
    return cache[key]


@dataclass(frozen=True, eq=False)
class PlanView:
    """An agent's local, partial view of a plan.

    Step ids and orderings are shared with the underlying plan; fluents and
    effects are projected, so hidden values appear as ``⊥`` and invisible
    variables disappear.
    """

    agent: str | None
    plan: PartialPlan
    pre: Mapping[int, tuple[Fluent, ...]]
    eff: Mapping[int, tuple[Effect, ...]]
    init_effects: frozenset
    links: tuple[CausalLink, ...]
    open_goals: frozenset

    def before(self, a: int, b: int) -> bool:
        return self.plan.before(a, b)

    def unordered(self, a: int, b: int) -> bool:
        return self.plan.unordered(a, b)

    @property
    def step_ids(self) -> list[int]:
        return self.plan.step_ids()


def project_plan(plan: PartialPlan, agent: str | None, task: MapTask) -> PlanView:
    """``agent``'s view of ``plan``; ``agent=None`` gives the full-information view."""
    if agent is None:
        return PlanView(
            None,
            plan,
            {s: plan.preconditions(s) for s in plan.step_ids()},
            {s: plan.effects(s) for s in plan.step_ids()},
            plan.init_state,
            tuple(sorted(plan.links)),
            plan.open_goals,
        )
    pre: dict[int, tuple] = {INIT: ()}
    eff: dict[int, tuple] = {INIT: (), GOAL: ()}
    pre[GOAL] = tuple(
        p for p in (_project_fluent_cached(g, agent, task) for g in plan.goals) if p is not None
    )
    for sid, step in plan.steps.items():
        pre[sid], eff[sid] = _project_action(step.action, agent, task)
    init = frozenset(
        p for p in (_project_fluent_cached(f, agent, task) for f in plan.init_state) if p is not None
    )
    links = []
    for l in sorted(plan.links):
        f = _project_fluent_cached(l.fluent, agent, task)
        if f is not None:
            links.append(CausalLink(l.producer, l.consumer, f))
    goals = set()
    for sid, g in plan.open_goals:
        f = _project_fluent_cached(g, agent, task)
        if f is not None:
            goals.add((sid, f))
    return PlanView(agent, plan, pre, eff, init, tuple(links), frozenset(goals))


def iter_views(plan: PartialPlan, task: MapTask) -> Iterator[PlanView]:
    for agent in task.agents:
        yield project_plan(plan, agent, task)

