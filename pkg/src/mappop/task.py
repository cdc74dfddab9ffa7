"""MAP task model: fluents, tri-state evaluation, effect application, visibility."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping

from .errors import PreconditionError, TaskError

#: Placeholder value an agent sees for a value outside its view of a domain.
UNDEFINED = "⊥"


class Truth(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True, order=True)
class Fluent:
    """``<var, value>`` when positive, ``<var, ¬value>`` otherwise.

    Doubles as a formula ``(var, value)`` / ``(var, ¬value)`` in preconditions
    and goals.
    """

    var: str
    value: str
    positive: bool = True

    def __post_init__(self):
        if self.value == UNDEFINED and not self.positive:
            raise ValueError("undefined value cannot appear negated")

    def negate(self) -> "Fluent":
        return Fluent(self.var, self.value, not self.positive)

    @property
    def undefined(self) -> bool:
        return self.value == UNDEFINED

    def __str__(self) -> str:
        neg = "" if self.positive else "¬"
        return f"⟨{self.var}={neg}{self.value}⟩"


@dataclass(frozen=True, order=True)
class Effect:
    """``assign(var, value)`` when ``assign`` is true, else ``unassign(var, value)``."""

    var: str
    value: str
    assign: bool = True

    def __str__(self) -> str:
        kind = "assign" if self.assign else "unassign"
        return f"{kind}({self.var},{self.value})"


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: tuple[Fluent, ...]
    eff: tuple[Effect, ...]
    owners: frozenset[str] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        assigned: dict[str, str] = {}
        for e in self.eff:
            if e.assign:
                if assigned.setdefault(e.var, e.value) != e.value:
                    raise TaskError(f"{self.label}: conflicting assignments to {e.var}")

    @property
    def label(self) -> str:
        return f"{self.name}({','.join(self.args)})"

    def variables(self) -> set[str]:
        return {f.var for f in self.pre} | {e.var for e in self.eff}

    def __str__(self) -> str:
        return self.label

    def __lt__(self, other: "GroundAction") -> bool:
        return (self.name, self.args) < (other.name, other.args)


def effect_fluents(effect: Effect, domain: Iterable[str]) -> set[Fluent]:
    """Fluents made true by ``effect`` given the variable's value domain."""
    if not effect.assign:
        return {Fluent(effect.var, effect.value, False)}
    out = {Fluent(effect.var, effect.value)}
    out.update(Fluent(effect.var, d, False) for d in domain if d != effect.value)
    return out


def entails(effect: Effect, fluent: Fluent) -> bool:
    """Does ``effect`` make ``fluent`` true?  Undefined values entail nothing."""
    if effect.var != fluent.var or effect.value == UNDEFINED or fluent.undefined:
        return False
    if effect.assign:
        return (effect.value == fluent.value) == fluent.positive
    return not fluent.positive and effect.value == fluent.value


# --- states ---------------------------------------------------------------

State = frozenset  # frozenset[Fluent]


def check_state(state: Iterable[Fluent]) -> None:
    """Raise TaskError unless ``state`` satisfies the state invariants."""
    positive: dict[str, str] = {}
    seen = set(state)
    for f in seen:
        if f.positive and not f.undefined:
            if positive.setdefault(f.var, f.value) != f.value:
                raise TaskError(f"variable {f.var} holds two values")
            if f.negate() in seen:
                raise TaskError(f"{f} and its negation both hold")


def evaluate(formula: Fluent, state: Iterable[Fluent]) -> Truth:
    state = state if isinstance(state, (set, frozenset)) else set(state)
    if formula in state:
        return Truth.TRUE
    if formula.negate() in state:
        return Truth.FALSE
    # (v, ¬d) is also false when v is known to hold d; (v, d) when v holds some d' != d
    # is covered by the materialised <v, ¬d> fluent.
    return Truth.UNKNOWN


def apply(state: Iterable[Fluent], action: GroundAction, domains: Mapping[str, Iterable[str]]) -> frozenset:
    """Progress ``state`` through ``action``.

    ``assign(v, d)`` adds ``<v, d>`` and ``<v, ¬d'>`` for every other value of
    ``domains[v]``; ``unassign(v, d)`` adds ``<v, ¬d>``.  Contradicted fluents are
    removed.
    """
    current = set(state)
    for p in action.pre:
        if evaluate(p, current) is not Truth.TRUE:
            raise PreconditionError(p)
    for e in action.eff:
        if e.assign:
            current = {f for f in current if f.var != e.var}
            current |= effect_fluents(e, domains.get(e.var, ()))
        else:
            current.discard(Fluent(e.var, e.value))
            current.add(Fluent(e.var, e.value, False))
    return frozenset(current)


def materialise(assignments: Mapping[str, str], domains: Mapping[str, Iterable[str]]) -> frozenset:
    """State in which each variable holds its assigned value and no other."""
    out: set[Fluent] = set()
    for var, value in assignments.items():
        out |= effect_fluents(Effect(var, value), domains.get(var, ()))
    return frozenset(out)


# --- the task ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MapTask:
    """The tuple <AG, V, A, I, G> plus each agent's view of every variable domain.

    ``views[i][v]`` is the set of values of ``v`` agent ``i`` can see; ``v`` is in
    ``V_i`` exactly when it is a key of ``views[i]``.  ``initial_state`` is the
    merged full-information initial state; ``init[i]`` keeps the fluents of it
    that ``i`` sees fully.
    """

    name: str
    agents: tuple[str, ...]
    views: Mapping[str, Mapping[str, frozenset]]
    actions: Mapping[str, tuple[GroundAction, ...]]
    initial_state: frozenset
    goals: Mapping[str, tuple[Fluent, ...]]
    init_assignments: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.agents:
            raise TaskError("a task needs at least one agent")
        for agent in self.agents:
            for goal in self.goals.get(agent, ()):
                if goal.var not in self.views[agent]:
                    raise TaskError(f"goal {goal} of {agent} mentions a variable it cannot see")
            for a in self.actions.get(agent, ()):
                for var in a.variables():
                    if var not in self.views[agent]:
                        raise TaskError(f"action {a} of {agent} uses invisible variable {var}")
        check_state(self.initial_state)

    @classmethod
    def build(
        cls,
        name: str,
        views: Mapping[str, Mapping[str, Iterable[str]]],
        actions: Mapping[str, Iterable[GroundAction]],
        init: Mapping[str, Mapping[str, str]],
        goals: Mapping[str, Iterable[Fluent]],
    ) -> "MapTask":
        """Assemble a task from per-agent parts, merging initial assignments.

        Two agents asserting different initial values for one variable is a
        hard error.
        """
        agents = tuple(views)
        frozen_views = {a: {v: frozenset(ds) for v, ds in views[a].items()} for a in agents}
        domains: dict[str, set[str]] = {}
        for a in agents:
            for v, ds in frozen_views[a].items():
                domains.setdefault(v, set()).update(ds)
        merged: dict[str, str] = {}
        source: dict[str, str] = {}
        for a in agents:
            for var, value in init.get(a, {}).items():
                if var not in frozen_views[a]:
                    raise TaskError(f"{a} initialises invisible variable {var}")
                if var in merged and merged[var] != value:
                    raise TaskError(
                        f"inconsistent initial value for {var}: {source[var]} says {merged[var]}, {a} says {value}"
                    )
                merged[var] = value
                source.setdefault(var, a)
        for var, value in merged.items():
            if value not in frozen_views[source[var]][var]:
                raise TaskError(f"{source[var]} initialises {var} to {value}, outside its view")
        owners: dict[tuple, set[str]] = {}
        for a in agents:
            for act in actions.get(a, ()):
                owners.setdefault((act.name, act.args), set()).add(a)
        acts = {
            a: tuple(
                sorted(
                    {
                        GroundAction(x.name, x.args, x.pre, x.eff, frozenset(owners[(x.name, x.args)]))
                        for x in actions.get(a, ())
                    }
                )
            )
            for a in agents
        }
        state = materialise(merged, domains)
        gs = {a: tuple(sorted(set(goals.get(a, ())))) for a in agents}
        return cls(name, agents, frozen_views, acts, state, gs, dict(merged))

    # --- derived tables ---------------------------------------------------

    @cached_property
    def variables(self) -> dict[str, frozenset]:
        return {a: frozenset(self.views[a]) for a in self.agents}

    @cached_property
    def domains(self) -> dict[str, frozenset]:
        """Full domains ``D_v``: the union of all agents' views."""
        out: dict[str, set] = {}
        for a in self.agents:
            for v, ds in self.views[a].items():
                out.setdefault(v, set()).update(ds)
        return {v: frozenset(ds) for v, ds in out.items()}

    @cached_property
    def init(self) -> dict[str, frozenset]:
        return {
            a: frozenset(f for f in self.initial_state if self.fully_visible(a, f))
            for a in self.agents
        }

    @cached_property
    def all_goals(self) -> tuple[Fluent, ...]:
        return tuple(sorted({g for a in self.agents for g in self.goals.get(a, ())}))

    @cached_property
    def _seers(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {}
        for a in self.agents:
            for v in self.views[a]:
                out.setdefault(v, []).append(a)
        return {v: tuple(x) for v, x in out.items()}

    def seers(self, var: str) -> tuple[str, ...]:
        """Agents with ``var`` in their variable set, in agent order."""
        return self._seers.get(var, ())

    def sees(self, agent: str, var: str) -> bool:
        return var in self.views[agent]

    def fully_visible(self, agent: str, fluent: Fluent) -> bool:
        view = self.views[agent].get(fluent.var)
        return view is not None and fluent.value in view

    def private_to(self, agent: str, var: str) -> bool:
        return self.seers(var) == (agent,)

    def index(self, agent: str) -> int:
        return self.agents.index(agent)

    @property
    def n_actions(self) -> int:
        return len({(a.name, a.args) for acts in self.actions.values() for a in acts})

    def restrict(self, agents: Iterable[str]) -> "MapTask":
        """Same world and goals with only ``agents`` left to act.

        A goal is handed to the first kept agent that sees its variable; goals
        nobody kept can see are dropped.
        """
        keep = tuple(a for a in self.agents if a in set(agents))
        seen = {v for a in keep for v in self.views[a]}
        goals: dict[str, list[Fluent]] = {a: [] for a in keep}
        for g in self.all_goals:
            for a in keep:
                if g.var in self.views[a]:
                    goals[a].append(g)
                    break
        acts = {
            a: tuple(
                GroundAction(x.name, x.args, x.pre, x.eff, x.owners & frozenset(keep)) for x in self.actions[a]
            )
            for a in keep
        }
        return MapTask(
            f"{self.name}[{','.join(keep)}]",
            keep,
            {a: self.views[a] for a in keep},
            acts,
            frozenset(f for f in self.initial_state if f.var in seen),
            {a: tuple(gs) for a, gs in goals.items()},
            {v: d for v, d in self.init_assignments.items() if v in seen},
        )


def project_fluent(fluent: Fluent, agent: str, task: MapTask) -> Fluent | None:
    """What ``agent`` sees of ``fluent``: itself, ``<v, ⊥>``, or nothing."""
    view = task.views[agent].get(fluent.var)
    if view is None:
        return None
    if fluent.value in view:
        return fluent
    return Fluent(fluent.var, UNDEFINED)


def project_effect(effect: Effect, agent: str, task: MapTask) -> Effect | None:
    view = task.views[agent].get(effect.var)
    if view is None:
        return None
    if effect.value in view:
        return effect
    return Effect(effect.var, UNDEFINED, effect.assign)
