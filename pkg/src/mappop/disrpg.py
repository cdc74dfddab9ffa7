"""Per-agent relaxed planning graphs and their distributed merge.

Each agent expands a relaxed planning graph (delete effects ignored) from the
fluents of the initial state it can see.  Agents then repeatedly exchange the
fluents they may share, keep the best cost they have heard of for every fluent,
union achiever labels and re-expand, until a round passes in which nobody
receives anything.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable

from .bus import AgentBus, FluentBatch
from .task import Fluent, GroundAction, MapTask, effect_fluents


@dataclass
class RelaxedPlanningGraph:
    """Fluent costs (first level of appearance) and achiever agents."""

    agent: str
    costs: dict[Fluent, int] = field(default_factory=dict)
    achievers: dict[Fluent, set[str]] = field(default_factory=dict)
    action_levels: dict[GroundAction, int] = field(default_factory=dict)

    def cost(self, fluent: Fluent) -> int | None:
        return self.costs.get(fluent)

    def __contains__(self, fluent: Fluent) -> bool:
        return fluent in self.costs

    def fluents(self) -> set[Fluent]:
        return set(self.costs)

    def dump(self) -> str:
        lines = [
            f"{f} {c} {' '.join(sorted(self.achievers.get(f, ()))) or '-'}"
            for f, c in self.costs.items()
        ]
        return "".join(line + "\n" for line in sorted(lines))


class _Expander:
    """Label-correcting expansion of one agent's graph.

    Costs only ever decrease, so re-expansion after a merge simply resumes from
    the fluents whose cost dropped.
    """

    def __init__(self, agent: str, task: MapTask):
        self.agent = agent
        self.task = task
        self.actions = task.actions[agent]
        views = task.views[agent]
        self.effects = [
            frozenset(f for e in a.eff for f in effect_fluents(e, views.get(e.var, ()))) for a in self.actions
        ]
        self.by_pre: dict[Fluent, list[int]] = {}
        for i, a in enumerate(self.actions):
            for p in a.pre:
                self.by_pre.setdefault(p, []).append(i)
        self.levels: list[int | None] = [None] * len(self.actions)
        self.graph = RelaxedPlanningGraph(agent)
        self.changed: set[Fluent] = set()
        self._heap: list[tuple[int, Fluent]] = []
        for f in sorted(task.init[agent]):
            self._offer(f, 0, ())
        for i, a in enumerate(self.actions):
            if not a.pre:
                self._fire(i, 0)
        self.expand()

    def _offer(self, f: Fluent, cost: int, achievers: Iterable[str]) -> None:
        g = self.graph
        old = g.costs.get(f)
        if old is None or cost < old:
            g.costs[f] = cost
            heapq.heappush(self._heap, (cost, f))
            self.changed.add(f)
        known = g.achievers.setdefault(f, set())
        extra = set(achievers) - known
        if extra:
            known |= extra
            self.changed.add(f)

    def _fire(self, i: int, level: int) -> None:
        old = self.levels[i]
        if old is not None and old <= level:
            return
        self.levels[i] = level
        self.graph.action_levels[self.actions[i]] = level
        for f in self.effects[i]:
            self._offer(f, level + 1, (self.agent,))

    def expand(self) -> None:
        costs = self.graph.costs
        while self._heap:
            c, f = heapq.heappop(self._heap)
            if costs.get(f) != c:
                continue
            for i in self.by_pre.get(f, ()):
                pre = self.actions[i].pre
                if all(p in costs for p in pre):
                    self._fire(i, max(costs[p] for p in pre))

    def merge(self, received: Iterable[tuple[Fluent, int, frozenset]]) -> None:
        for f, cost, achievers in received:
            self._offer(f, cost, achievers)

    def take_changed(self) -> set[Fluent]:
        out, self.changed = self.changed, set()
        return out


def build_initial_rpg(agent: str, task: MapTask) -> RelaxedPlanningGraph:
    return _Expander(agent, task).graph


def merge_received(
    graph: RelaxedPlanningGraph, received: Iterable[tuple[Fluent, int, frozenset]]
) -> set[Fluent]:
    """Insert unseen fluents, lower costs that improve, union achievers.

    Returns the fluents whose entry changed.  Does not re-expand; see
    :func:`build_dis_rpg` for the full loop.
    """
    changed = set()
    for f, cost, achievers in received:
        old = graph.costs.get(f)
        if old is None or cost < old:
            graph.costs[f] = cost
            changed.add(f)
        known = graph.achievers.setdefault(f, set())
        if not set(achievers) <= known:
            known |= set(achievers)
            changed.add(f)
    return changed


def shareable(
    sender: str, recipient: str, fluents: Iterable[Fluent], task: MapTask, graph: RelaxedPlanningGraph
) -> FluentBatch:
    """The fluents both agents see fully, tagged with the sender's cost and achievers."""
    s_view, r_view = task.views[sender], task.views[recipient]
    entries = []
    for f in sorted(fluents):
        if f.var in s_view and f.var in r_view and f.value in s_view[f.var] and f.value in r_view[f.var]:
            entries.append((f, graph.costs[f], frozenset(graph.achievers.get(f, ()))))
    return FluentBatch(tuple(entries))


@dataclass
class DisRpg:
    graphs: dict[str, RelaxedPlanningGraph]
    rounds: int
    history: list[dict[str, dict[Fluent, int]]] = field(default_factory=list)

    def __getitem__(self, agent: str) -> RelaxedPlanningGraph:
        return self.graphs[agent]

    def goal_reachable(self, goal: Fluent) -> bool:
        return any(goal in g for g in self.graphs.values())


def build_dis_rpg(task: MapTask, bus: AgentBus | None = None, record: bool = False) -> DisRpg:
    """Run the exchange/merge/expand loop until no agent receives anything."""
    bus = bus if bus is not None else AgentBus(task)
    agents = task.agents
    expanders = {a: _Expander(a, task) for a in agents}
    # what each peer is known to hold: known[(i, j)][f] = (cost, achievers) as j last heard it
    known: dict[tuple[str, str], dict[Fluent, tuple]] = {(i, j): {} for i in agents for j in agents if i != j}
    pending = {a: set(expanders[a].graph.costs) for a in agents}
    for x in expanders.values():
        x.take_changed()
    history = []
    rounds = 0
    while True:
        if record:
            history.append({a: dict(expanders[a].graph.costs) for a in agents})
        outboxes: dict[str, list] = {}
        for i in agents:
            g = expanders[i].graph
            for j in agents:
                if i == j:
                    continue
                memo = known[(i, j)]
                fresh = [
                    f for f in pending[i] if memo.get(f) != (g.costs[f], frozenset(g.achievers.get(f, ())))
                ]
                batch = shareable(i, j, fresh, task, g)
                if batch.entries:
                    outboxes.setdefault(i, []).append((j, batch))
                    for f, c, ach in batch.entries:
                        memo[f] = (c, ach)
        inboxes, delta = bus.broadcast_round(outboxes)
        rounds += 1
        if not delta:
            break
        for i in agents:
            x = expanders[i]
            for msg in inboxes[i]:
                x.merge(msg.payload.entries)
                for f, c, ach in msg.payload.entries:
                    known[(i, msg.sender)][f] = (c, ach)
            x.expand()
            pending[i] = x.take_changed()
    return DisRpg({a: expanders[a].graph for a in agents}, rounds, history)
