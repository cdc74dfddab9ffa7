"""In-memory, round-synchronous message bus between simulated agents."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import PrivacyViolation
from .task import Fluent, MapTask


@dataclass(frozen=True)
class FluentBatch:
    """Shareable fluents with their best known cost and achiever agents."""

    entries: tuple[tuple[Fluent, int, frozenset], ...]
    kind = "fluents"

    @property
    def fluents(self) -> list[Fluent]:
        return [f for f, _, _ in self.entries]

    def summary(self) -> str:
        return " ".join(f"{f}:{c}:{'+'.join(sorted(a)) or '-'}" for f, c, a in self.entries)


@dataclass(frozen=True)
class RefinementBatch:
    base: str
    signatures: tuple[str, ...]
    kind = "refinements"

    def summary(self) -> str:
        return f"base={_short(self.base)} n={len(self.signatures)} " + " ".join(map(_short, self.signatures))


@dataclass(frozen=True)
class Vote:
    signature: str
    value: float
    kind = "vote"

    def summary(self) -> str:
        return f"{_short(self.signature)} F={self.value:g}"


@dataclass(frozen=True)
class BatonPass:
    iteration: int
    kind = "baton"

    def summary(self) -> str:
        return f"iteration={self.iteration}"


@dataclass(frozen=True)
class GoalSelection:
    step: int
    goal: Fluent | None  # recipient's projection; None when it cannot see the variable
    kind = "goal"

    def summary(self) -> str:
        return f"step={self.step} goal={self.goal if self.goal is not None else 'hidden'}"


@dataclass(frozen=True)
class Adoption:
    signature: str
    votes: int
    kind = "adopt"

    def summary(self) -> str:
        return f"{_short(self.signature)} votes={self.votes}"


def _short(signature: str) -> str:
    return hashlib.sha1(signature.encode()).hexdigest()[:10]


@dataclass(frozen=True)
class Message:
    sender: str
    recipient: str
    round: int
    payload: object

    @property
    def kind(self) -> str:
        return self.payload.kind

    def line(self) -> str:
        return f"{self.round} {self.sender} {self.recipient} {self.kind} {self.payload.summary()}".rstrip()


@dataclass(frozen=True)
class Violation:
    index: int
    fluent: Fluent
    recipient: str


class AgentBus:
    """Delivers each round's outboxes at a barrier and logs every message.

    Outboxes map a sender to ``(recipient, payload)`` pairs.  Delivery order is
    sender index ascending, so the trace is ordered by (round, sender,
    recipient).  A message carrying a fluent its recipient may not see raises
    :class:`PrivacyViolation`.
    """

    def __init__(self, task: MapTask):
        self.task = task
        self.agents = task.agents
        self.round = 0
        self.trace: list[Message] = []

    def broadcast_round(
        self, outboxes: Mapping[str, Iterable[tuple[str, object]]]
    ) -> tuple[dict[str, list[Message]], list[Message]]:
        order = {a: i for i, a in enumerate(self.agents)}
        inboxes: dict[str, list[Message]] = {a: [] for a in self.agents}
        delta: list[Message] = []
        for sender in sorted(outboxes, key=lambda a: order[a]):
            items = list(outboxes[sender])
            for recipient, _ in items:
                if recipient not in inboxes:
                    raise ValueError(f"unknown recipient {recipient!r}")
            for recipient, payload in sorted(items, key=lambda item: order[item[0]]):
                msg = Message(sender, recipient, self.round, payload)
                for f in _carried(payload):
                    if not self.task.fully_visible(recipient, f):
                        raise PrivacyViolation(f"{sender} sent {f} to {recipient}, who cannot see it")
                inboxes[recipient].append(msg)
                delta.append(msg)
        self.trace.extend(delta)
        self.round += 1
        return inboxes, delta

    def export(self) -> str:
        return "".join(m.line() + "\n" for m in self.trace)


def audit_privacy(trace: Iterable[Message], task: MapTask) -> list[Violation]:
    """Every fluent carried by a message that its recipient may not see."""
    out = []
    for i, msg in enumerate(trace):
        for f in _carried(msg.payload):
            if not task.fully_visible(msg.recipient, f):
                out.append(Violation(i, f, msg.recipient))
    return out


def _carried(payload) -> list[Fluent]:
    """Concrete fluents a payload reveals to its recipient."""
    if isinstance(payload, FluentBatch):
        return payload.fluents
    if isinstance(payload, GoalSelection) and payload.goal is not None and not payload.goal.undefined:
        return [payload.goal]
    return []
