"""The joint refinement loop: baton, goal selection, refinement exchange, voting."""

from __future__ import annotations

import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .bus import AgentBus, Adoption, BatonPass, GoalSelection, RefinementBatch, Vote
from .disrpg import DisRpg, build_dis_rpg
from .plan import PartialPlan, project_plan
from .pop import compose, heuristic_F, refine
from .task import Fluent, MapTask, project_fluent


class Status(Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class SolveConfig:
    k: int = 4
    node_budget: int = 10_000
    max_iterations: int = 2_000
    timeout: float | None = None
    penalty: float = 1.0
    max_new_steps: int | None = None
    parallel: bool = False

    def __post_init__(self):
        for name in ("k", "node_budget", "max_iterations"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass(frozen=True)
class Progress:
    iteration: int
    baton: str
    selector: str
    goal: str
    refinements: int
    pool: int
    votes: dict
    adopted: str


@dataclass
class SolveResult:
    status: Status
    plan: PartialPlan | None
    iterations: int
    bus: AgentBus
    dis_rpg: DisRpg
    progress: list[Progress] = field(default_factory=list)
    reason: str = ""

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED

    @property
    def trace(self) -> list:
        return self.bus.trace


# --- the individual steps ---------------------------------------------------------


def _goal_cost(f: Fluent | None, rpg, penalty: float) -> float:
    if f.undefined:
        return penalty
    c = rpg.cost(f)
    return math.inf if c is None else c


def select_open_goal(
    plan: PartialPlan, baton: str, task: MapTask, dis: DisRpg, penalty: float = 1.0
) -> tuple[str, tuple[int, Fluent]] | None:
    """Hardest open goal in the first agent's view, from the baton holder onwards, that has any.

    Returns ``(selecting agent, (step, fluent))`` or None when nobody sees an
    open goal.
    """
    n = len(task.agents)
    start = task.index(baton)
    for offset in range(n):
        agent = task.agents[(start + offset) % n]
        seen = []
        for sid, f in plan.open_goals:
            p = project_fluent(f, agent, task)
            if p is not None:
                seen.append((-_goal_cost(p, dis[agent], penalty), p, sid, f))
        if seen:
            _, _, sid, f = min(seen)
            return agent, (sid, f)
    return None


def gather_refinements(
    base: PartialPlan,
    goal: tuple[int, Fluent],
    task: MapTask,
    dis: DisRpg,
    config: SolveConfig,
    bus: AgentBus | None = None,
    pool: ThreadPoolExecutor | None = None,
    deadline: float | None = None,
) -> dict[str, PartialPlan]:
    """Every agent that sees the goal's variable refines; results are exchanged and unioned."""
    _, g = goal
    agents = [a for a in task.agents if task.sees(a, g.var)]

    def run(agent: str):
        return refine(
            base,
            goal,
            agent,
            task,
            dis[agent],
            config.k,
            config.node_budget,
            config.max_new_steps,
            config.penalty,
            deadline=deadline,
        )

    results = list(pool.map(run, agents)) if pool is not None else [run(a) for a in agents]
    out: dict[str, PartialPlan] = {}
    outboxes: dict[str, list] = {}
    for agent, steps in zip(agents, results):
        sigs = []
        for step in steps:
            plan = compose(base, step, task)
            out.setdefault(plan.signature, plan)
            sigs.append(plan.signature)
        if sigs:
            batch = RefinementBatch(base.signature, tuple(sigs))
            outboxes[agent] = [(j, batch) for j in task.agents if j != agent]
    if bus is not None:
        bus.broadcast_round(outboxes)
    return out


def check_solution(plan: PartialPlan, task: MapTask) -> bool:
    """Every agent confirms it sees no open goal."""
    return all(not project_plan(plan, a, task).open_goals for a in task.agents)


class RefinementPool:
    """The pool R of candidate plans, with per-agent values and vote orderings.

    For every voter and every possible baton holder a heap keeps entries
    ordered by the voter's value, then the baton holder's value, then plan
    size and signature, so a vote is a heap peek.  Adopted entries are removed
    lazily.
    """

    def __init__(self, task: MapTask, dis: DisRpg, penalty: float = 1.0, executor=None):
        self.task = task
        self.dis = dis
        self.penalty = penalty
        self.executor = executor
        self.entries: dict[str, PartialPlan] = {}
        self.values: dict[str, dict[str, float]] = {}
        self.expanded: set[str] = set()
        self._heaps = {(i, b): [] for i in task.agents for b in task.agents}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, signature: str) -> bool:
        return signature in self.entries

    def value(self, plan: PartialPlan, agent: str) -> float:
        return heuristic_F(project_plan(plan, agent, self.task), self.dis[agent], self.penalty)

    def add(self, plans: dict[str, PartialPlan]) -> int:
        fresh = [(s, p) for s, p in plans.items() if s not in self.entries and s not in self.expanded]
        agents = self.task.agents

        def evaluate(item):
            return {a: self.value(item[1], a) for a in agents}

        values = list(self.executor.map(evaluate, fresh)) if self.executor else [evaluate(x) for x in fresh]
        for (sig, plan), vals in zip(fresh, values):
            self.entries[sig] = plan
            self.values[sig] = vals
            for (i, b), heap in self._heaps.items():
                heapq.heappush(heap, (vals[i], vals[b], plan.n_actions, sig))
        return len(fresh)

    def mark_expanded(self, signature: str) -> None:
        self.expanded.add(signature)
        self.entries.pop(signature, None)

    def best_for(self, voter: str, baton: str) -> str:
        heap = self._heaps[(voter, baton)]
        while heap[0][3] not in self.entries:
            heapq.heappop(heap)
        return heap[0][3]

    def preference(self, signature: str, baton: str) -> tuple:
        return (self.values[signature][baton], self.entries[signature].n_actions, signature)


def evaluate_and_vote(
    pool: RefinementPool, baton: str, bus: AgentBus | None = None
) -> tuple[str, dict[str, str]]:
    """Each agent votes for its best entry; plurality wins, the baton holder breaks draws."""
    task = pool.task
    ballots = {a: pool.best_for(a, baton) for a in task.agents}
    if bus is not None:
        outboxes = {
            a: [(j, Vote(sig, pool.values[sig][a])) for j in task.agents if j != a] for a, sig in ballots.items()
        }
        bus.broadcast_round(outboxes)
    counts: dict[str, int] = {}
    for sig in ballots.values():
        counts[sig] = counts.get(sig, 0) + 1
    top = max(counts.values())
    winner = min((s for s, c in counts.items() if c == top), key=lambda s: pool.preference(s, baton))
    return winner, ballots


# --- the loop -------------------------------------------------------------------------


def solve(
    task: MapTask,
    config: SolveConfig | None = None,
    on_progress: Callable[[Progress], None] | None = None,
) -> SolveResult:
    config = config or SolveConfig()
    started = time.monotonic()
    deadline = started + config.timeout if config.timeout is not None else None
    bus = AgentBus(task)
    dis = build_dis_rpg(task, bus)
    base = PartialPlan.empty(task)
    result = SolveResult(Status.UNSOLVABLE, None, 0, bus, dis)
    for g in task.all_goals:
        if not dis.goal_reachable(g):
            result.reason = f"goal {g} is unreachable"
            return result
    if check_solution(base, task):
        result.status, result.plan = Status.SOLVED, base
        return result

    executor = ThreadPoolExecutor(max_workers=len(task.agents)) if config.parallel else None
    try:
        pool = RefinementPool(task, dis, config.penalty, executor)
        pool.mark_expanded(base.signature)
        n = len(task.agents)
        iteration = 0
        while True:
            if iteration >= config.max_iterations:
                result.status, result.reason = Status.BUDGET_EXHAUSTED, "iteration cap reached"
                break
            if deadline is not None and time.monotonic() > deadline:
                result.status, result.reason = Status.BUDGET_EXHAUSTED, "timeout"
                break
            baton = task.agents[iteration % n]
            picked = select_open_goal(base, baton, task, dis, config.penalty)
            added = 0
            goal_text = "-"
            selector = baton
            if picked is not None:
                selector, goal = picked
                goal_text = f"{goal[0]}:{goal[1]}"
                bus.broadcast_round(
                    {
                        selector: [
                            (j, GoalSelection(goal[0], project_fluent(goal[1], j, task)))
                            for j in task.agents
                            if j != selector
                        ]
                    }
                )
                found = gather_refinements(base, goal, task, dis, config, bus, executor, deadline)
                added = pool.add(found)
            if not len(pool):
                result.status, result.reason = Status.UNSOLVABLE, "refinement space exhausted"
                break
            winner, ballots = evaluate_and_vote(pool, baton, bus)
            votes = sum(1 for s in ballots.values() if s == winner)
            base = pool.entries[winner]
            pool.mark_expanded(winner)
            outboxes = {baton: [(j, Adoption(winner, votes)) for j in task.agents if j != baton]}
            bus.broadcast_round(outboxes)
            record = Progress(iteration, baton, selector, goal_text, added, len(pool), ballots, winner)
            result.progress.append(record)
            if on_progress is not None:
                on_progress(record)
            iteration += 1
            if check_solution(base, task):
                result.status, result.plan = Status.SOLVED, base
                break
            if n > 1:
                nxt = task.agents[iteration % n]
                bus.broadcast_round({baton: [(nxt, BatonPass(iteration))]})
    finally:
        if executor is not None:
            executor.shutdown()
    result.iterations = iteration
    return result
