"""Circular memory flow: generation, retrieval, selection, abstraction.

Episodic events are append-only; abstraction archives old chunks instead of
deleting them (replay and audit need the full history) and replaces each
chunk with one abstract event. When a chunk shares enough tags, the shared
concepts solidify into a knowledge capsule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from . import capsules
from .capsules import CapsuleStore, KnowledgeCapsule
from .errors import WorldError

EVENT_KINDS = ("observation", "dialogue", "action", "abstract")


@dataclass
class MemoryEvent:
    id: int  # strictly increasing per agent
    agent_id: str
    tick: int
    kind: str
    content: str
    tags: tuple[str, ...]
    importance: float
    archived: bool = False
    provenance: tuple[int, ...] = ()  # ids compressed into this abstract

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise WorldError(f"memory event kind '{self.kind}' not in {list(EVENT_KINDS)}")
        if not 0.0 <= self.importance <= 10.0:
            raise WorldError(f"memory event importance {self.importance} outside [0, 10]")
        self.tags = tuple(sorted(set(self.tags)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "agent": self.agent_id,
            "tick": self.tick,
            "kind": self.kind,
            "content": self.content,
            "tags": list(self.tags),
            "importance": self.importance,
            "archived": self.archived,
            "provenance": list(self.provenance),
        }


@dataclass
class MemoryBuffer:
    agent_id: str
    events: list[MemoryEvent] = field(default_factory=list)

    def next_id(self) -> int:
        return self.events[-1].id + 1 if self.events else 1

    def live_events(self) -> list[MemoryEvent]:
        return [e for e in self.events if not e.archived]

    def get(self, event_id: int) -> MemoryEvent:
        index = event_id - 1
        if not 1 <= event_id <= len(self.events):
            raise WorldError(f"agent '{self.agent_id}' has no memory event {event_id}")
        return self.events[index]

    def to_dict(self) -> dict[str, Any]:
        return {"agent": self.agent_id, "events": [e.to_dict() for e in self.events]}


def record_event(buffer: MemoryBuffer, event: MemoryEvent) -> MemoryBuffer:
    """Generation stage: append-only, ids must be gapless and increasing."""
    if event.id != buffer.next_id():
        raise WorldError(
            f"non-monotonic memory id {event.id} for agent '{buffer.agent_id}' "
            f"(expected {buffer.next_id()})"
        )
    buffer.events.append(event)
    return buffer


@dataclass(frozen=True)
class RetrievalQuery:
    tags: tuple[str, ...]
    t_now: int
    w_recency: float = 1.0
    w_relevance: float = 1.0
    w_importance: float = 1.0
    decay: float = 0.05  # per-tick exponential recency decay
    k: int = 8
    threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise WorldError(f"selection size k must be >= 1, got {self.k}")
        if self.decay <= 0:
            raise WorldError(f"decay must be > 0, got {self.decay}")
        if min(self.w_recency, self.w_relevance, self.w_importance) < 0:
            raise WorldError("retrieval weights must be >= 0")
        object.__setattr__(self, "tags", tuple(sorted(set(self.tags))))


def jaccard(a: tuple[str, ...] | set[str], b: tuple[str, ...] | set[str]) -> float:
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def score_events(buffer: MemoryBuffer, query: RetrievalQuery) -> list[tuple[int, float]]:
    """Retrieval stage: score every non-archived event.

    score = w_rec * exp(-decay * age) + w_rel * jaccard(tags) + w_imp * imp/10
    """
    scored: list[tuple[int, float]] = []
    for event in buffer.events:
        if event.archived:
            continue
        if event.tick > query.t_now:
            raise WorldError(
                f"event {event.id} at tick {event.tick} is in the future of t_now={query.t_now}"
            )
        score = (
            query.w_recency * math.exp(-query.decay * (query.t_now - event.tick))
            + query.w_relevance * jaccard(query.tags, event.tags)
            + query.w_importance * event.importance / 10.0
        )
        scored.append((event.id, score))
    return scored


def select_memories(scored: list[tuple[int, float]], k: int, threshold: float) -> list[int]:
    """Selection stage: ids of the top-k events at or above the threshold,
    ordered by score descending then id ascending."""
    if k < 1:
        raise WorldError(f"selection size k must be >= 1, got {k}")
    eligible = [(eid, s) for eid, s in scored if s >= threshold]
    eligible.sort(key=lambda pair: (-pair[1], pair[0]))
    return [eid for eid, _ in eligible[:k]]


@dataclass(frozen=True)
class AbstractionPolicy:
    trigger: int = 64  # fire when this many live events accumulate
    chunk: int = 32  # how many of the oldest live events to compress
    min_age: int = 10  # chunk events must be strictly older than this
    quorum: int = 3  # shared tags needed to mint a capsule

    def __post_init__(self) -> None:
        if self.chunk < 1 or self.trigger < 1:
            raise WorldError("abstraction trigger and chunk sizes must be >= 1")
        if self.chunk > self.trigger:
            raise WorldError(
                f"chunk size {self.chunk} exceeds trigger size {self.trigger}"
            )


def stub_abstract_text(agent_id: str, chunk: list[MemoryEvent]) -> str:
    ids = ", ".join(str(e.id) for e in chunk)
    return f"{agent_id} compressed events [{ids}]"


@dataclass(frozen=True)
class AbstractionResult:
    fired: bool
    abstract: MemoryEvent | None = None
    capsule: KnowledgeCapsule | None = None


def abstract_chunk(
    buffer: MemoryBuffer,
    provider: Any,
    policy: AbstractionPolicy,
    t_now: int,
    store: CapsuleStore | None = None,
) -> AbstractionResult:
    """Abstraction stage: archive the oldest chunk into one abstract event.

    Fires only when the buffer holds at least `trigger` live events and the
    oldest `chunk` of them are all strictly older than `min_age` ticks. The
    abstract keeps the chunk's max importance and tag union; when at least
    `quorum` tags are shared by every chunk event, those shared concepts are
    minted as a knowledge capsule (if a store is given).
    """
    live = buffer.live_events()
    if len(live) < policy.trigger:
        return AbstractionResult(fired=False)
    chunk = live[: policy.chunk]
    if any(t_now - event.tick <= policy.min_age for event in chunk):
        return AbstractionResult(fired=False)

    for event in chunk:
        event.archived = True
    if provider is not None and hasattr(provider, "abstract_text"):
        content = provider.abstract_text(buffer.agent_id, chunk)
    else:
        content = stub_abstract_text(buffer.agent_id, chunk)
    tags: set[str] = set()
    for event in chunk:
        tags |= set(event.tags)
    abstract = MemoryEvent(
        id=buffer.next_id(),
        agent_id=buffer.agent_id,
        tick=t_now,
        kind="abstract",
        content=content,
        tags=tuple(sorted(tags)),
        importance=max(event.importance for event in chunk),
        provenance=tuple(event.id for event in chunk),
    )
    record_event(buffer, abstract)

    capsule = None
    shared = set(chunk[0].tags)
    for event in chunk[1:]:
        shared &= set(event.tags)
    if len(shared) >= policy.quorum and store is not None:
        capsule = capsules.create_capsule(
            store,
            title=f"{buffer.agent_id} abstraction @t{t_now}",
            concepts=shared,
            payload=content,
            origin_agent=buffer.agent_id,
            tick=t_now,
        )
    return AbstractionResult(fired=True, abstract=abstract, capsule=capsule)
