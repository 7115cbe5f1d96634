"""Knowledge capsules: immutable, content-addressed logic assets.

A capsule's id is the hash of its canonical content (title, concept set,
payload, provenance parents), which makes storage idempotent, makes fusion
commutative once the parent pair is ordered canonically, and rules out
provenance cycles by construction: a child's id depends on its parents'.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from .canonical import canonical_json, sha256_hex
from .errors import WorldError

FUSION_TITLE_JOIN = " × "


@dataclass(frozen=True)
class KnowledgeCapsule:
    id: str
    title: str
    concepts: tuple[str, ...]  # canonically sorted, deduplicated
    payload: str
    provenance: tuple[str, ...]  # sorted parent ids; empty = primordial
    created_tick: int
    origin_agent: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "concepts": list(self.concepts),
            "payload": self.payload,
            "provenance": list(self.provenance),
            "created_tick": self.created_tick,
            "origin_agent": self.origin_agent,
        }


def capsule_id(title: str, concepts: tuple[str, ...], payload: str,
               provenance: tuple[str, ...]) -> str:
    return sha256_hex(canonical_json(
        {"title": title, "concepts": list(concepts), "payload": payload,
         "provenance": list(provenance)}
    ))


@dataclass
class CapsuleStore:
    capsules: dict[str, KnowledgeCapsule] = field(default_factory=dict)
    _by_concept: dict[str, set[str]] = field(default_factory=dict)

    def get(self, capsule_id_: str) -> KnowledgeCapsule:
        if capsule_id_ not in self.capsules:
            raise WorldError(f"unknown capsule '{capsule_id_}'")
        return self.capsules[capsule_id_]

    def insert(self, capsule: KnowledgeCapsule) -> KnowledgeCapsule:
        """Idempotent by id: re-inserting identical content changes nothing."""
        if capsule.id in self.capsules:
            return self.capsules[capsule.id]
        self.capsules[capsule.id] = capsule
        for concept in capsule.concepts:
            self._by_concept.setdefault(concept, set()).add(capsule.id)
        return capsule

    def __len__(self) -> int:
        return len(self.capsules)

    def to_dict(self) -> dict[str, Any]:
        return {"capsules": [self.capsules[c].to_dict() for c in sorted(self.capsules)]}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "CapsuleStore":
        store = cls()
        for raw in payload.get("capsules", []):
            store.insert(KnowledgeCapsule(
                id=str(raw["id"]),
                title=str(raw["title"]),
                concepts=tuple(raw["concepts"]),
                payload=str(raw["payload"]),
                provenance=tuple(raw["provenance"]),
                created_tick=int(raw["created_tick"]),
                origin_agent=raw.get("origin_agent"),
            ))
        return store


def canonical_concepts(concepts: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(str(c) for c in concepts)))


def create_capsule(
    store: CapsuleStore,
    title: str,
    concepts: Iterable[str],
    payload: str,
    origin_agent: str | None,
    tick: int,
) -> KnowledgeCapsule:
    """Mint a primordial capsule; concepts are canonicalized, storage idempotent."""
    canon = canonical_concepts(concepts)
    if not canon:
        raise WorldError("capsule concept set is empty after canonicalization")
    cid = capsule_id(title, canon, payload, ())
    return store.insert(KnowledgeCapsule(
        id=cid, title=title, concepts=canon, payload=payload,
        provenance=(), created_tick=tick, origin_agent=origin_agent,
    ))


def stub_fusion_text(a: KnowledgeCapsule, b: KnowledgeCapsule) -> tuple[str, str]:
    """Deterministic fusion text: canonical-join title, template payload.

    Callers pass the parents in canonical (id-ascending) order.
    """
    concepts = canonical_concepts(a.concepts + b.concepts)
    title = FUSION_TITLE_JOIN.join(concepts)
    payload = f"Synthesis of '{a.title}' and '{b.title}'."
    return title, payload


def fuse(
    store: CapsuleStore,
    first_id: str,
    second_id: str,
    provider: Any,
    tick: int,
    origin_agent: str | None = None,
) -> KnowledgeCapsule:
    """Fuse two distinct capsules into a new one carrying both as provenance.

    The pair is ordered canonically by id before the provider call, so the
    result is identical under argument swap even with a live provider.
    """
    if first_id == second_id:
        raise WorldError(f"cannot fuse capsule '{first_id}' with itself")
    a, b = store.get(first_id), store.get(second_id)
    if b.id < a.id:
        a, b = b, a
    if provider is not None and hasattr(provider, "fuse_text"):
        title, payload = provider.fuse_text(a, b)
    else:
        title, payload = stub_fusion_text(a, b)
    concepts = canonical_concepts(a.concepts + b.concepts)
    provenance = tuple(sorted((a.id, b.id)))
    cid = capsule_id(title, concepts, payload, provenance)
    return store.insert(KnowledgeCapsule(
        id=cid, title=title, concepts=concepts, payload=payload,
        provenance=provenance, created_tick=tick, origin_agent=origin_agent,
    ))


def ancestors(store: CapsuleStore, capsule_id_: str) -> set[str]:
    """Transitive provenance closure; never contains the capsule itself."""
    start = store.get(capsule_id_)
    seen: set[str] = set()
    frontier = list(start.provenance)
    while frontier:
        current = frontier.pop()
        if current in seen:
            continue
        seen.add(current)
        frontier.extend(store.get(current).provenance)
    return seen


def find_by_concept(store: CapsuleStore, tag: str) -> list[str]:
    """Ids of all capsules carrying the concept tag, sorted."""
    return sorted(store._by_concept.get(tag, ()))
