"""Pluggable cognition: turning context + memories into an action and utterance.

The provider interface is the only sanctioned non-determinism boundary. The
deterministic stub provider ships as the default and as the fallback used to
reject invariant-violating responses from live providers. Action "logits" are
keyed hashes, so the whole decision pipeline is a pure function of
(seed, agent, tick, biases).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Protocol

from .canonical import keyed_logit, keyed_unit
from .capsules import KnowledgeCapsule, stub_fusion_text
from .errors import ProviderError, ReplayError, WorldError
from .memory import MemoryEvent, stub_abstract_text

DISTRIBUTION_TOLERANCE = 1e-9
MEMORY_SNIPPET_CHARS = 60


@dataclass(frozen=True)
class DecisionMode:
    kind: str  # "argmax" | "sample"
    temperature: float = 1.0
    seed_key: str = ""  # keyed-draw source for sample mode

    def __post_init__(self) -> None:
        if self.kind not in ("argmax", "sample"):
            raise WorldError(f"decision mode '{self.kind}' not in ['argmax', 'sample']")
        if self.kind == "sample" and self.temperature <= 0:
            raise WorldError(f"sample temperature must be > 0, got {self.temperature}")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "sample":
            out["temperature"] = self.temperature
            out["seed_key"] = self.seed_key
        return out


@dataclass(frozen=True)
class CognitionRequest:
    agent_id: str
    tick: int
    directive_text: str
    effective_bias: tuple[tuple[str, float], ...]
    role_bias: tuple[tuple[str, float], ...]  # anchor-gain scaled
    conformity: tuple[tuple[str, float], ...]  # neighbor-weight scaled
    selected_memories: tuple[MemoryEvent, ...]
    capsule_refs: tuple[str, ...]
    capsule_titles: tuple[str, ...]
    vocabulary: tuple[str, ...]
    persona_tags: tuple[str, ...]
    layer_tags: tuple[str, ...]  # action tags the active stack speaks about
    decision_mode: DecisionMode
    meta_directive: str = ""
    digest_text: str = ""
    digest_tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.vocabulary:
            raise WorldError(f"agent '{self.agent_id}' request has empty vocabulary")
        if tuple(sorted(set(self.vocabulary))) != self.vocabulary:
            raise WorldError("request vocabulary must be sorted and unique")

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent": self.agent_id,
            "tick": self.tick,
            "directive": self.directive_text,
            "effective_bias": dict(self.effective_bias),
            "role_bias": dict(self.role_bias),
            "conformity": dict(self.conformity),
            "memories": [e.to_dict() for e in self.selected_memories],
            "capsules": list(self.capsule_refs),
            "capsule_titles": list(self.capsule_titles),
            "vocabulary": list(self.vocabulary),
            "persona": list(self.persona_tags),
            "layer_tags": list(self.layer_tags),
            "decision_mode": self.decision_mode.to_dict(),
            "meta_directive": self.meta_directive,
            "digest": self.digest_text,
            "digest_tags": list(self.digest_tags),
        }


@dataclass(frozen=True)
class CognitionResponse:
    chosen_tag: str
    distribution: tuple[tuple[str, float], ...]
    utterance: str
    utterance_tags: tuple[str, ...]

    def probability(self, tag: str) -> float:
        return dict(self.distribution).get(tag, 0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "chosen": self.chosen_tag,
            "distribution": dict(self.distribution),
            "utterance": self.utterance,
            "utterance_tags": list(self.utterance_tags),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "CognitionResponse":
        return cls(
            chosen_tag=str(raw["chosen"]),
            distribution=tuple(sorted((str(t), float(p)) for t, p in raw["distribution"].items())),
            utterance=str(raw["utterance"]),
            utterance_tags=tuple(sorted(str(t) for t in raw["utterance_tags"])),
        )


def stub_logits(seed: int, agent_id: str, tick: int, vocabulary: tuple[str, ...]) -> dict[str, float]:
    """Pseudo-random base logits in [-1, 1], one per action tag.

    Each logit is the first 8 bytes of sha256("{seed}|{agent_id}|{tick}|{tag}|logit")
    scaled to [-1, 1]; pure and platform-independent.
    """
    if not vocabulary:
        raise WorldError("stub_logits requires a non-empty vocabulary")
    return {tag: keyed_logit(seed, agent_id, tick, tag, "logit") for tag in sorted(vocabulary)}


def softmax(scores: dict[str, float]) -> dict[str, float]:
    peak = max(scores.values())
    exps = {tag: math.exp(z - peak) for tag, z in sorted(scores.items())}
    total = sum(exps.values())
    return {tag: value / total for tag, value in exps.items()}


def decide(
    base_logits: dict[str, float],
    effective_bias: dict[str, float],
    role_bias: dict[str, float],
    conformity: dict[str, float],
    mode: DecisionMode,
) -> tuple[str, dict[str, float]]:
    """Combine logit sources additively and pick an action.

    Missing keys in any bias map read 0. Argmax ties break toward the
    lexicographically smallest tag; sample mode draws from the
    temperature-scaled softmax using the mode's keyed seed.
    """
    z: dict[str, float] = {}
    for tag in sorted(base_logits):
        total = (
            base_logits[tag]
            + effective_bias.get(tag, 0.0)
            + role_bias.get(tag, 0.0)
            + conformity.get(tag, 0.0)
        )
        if math.isnan(total) or math.isinf(total):
            raise WorldError(f"non-finite combined logit for tag '{tag}'")
        z[tag] = total
    distribution = softmax(z)
    if mode.kind == "argmax":
        best = max(z.values())
        chosen = min(tag for tag, value in z.items() if value == best)
    else:
        sampling = softmax({tag: value / mode.temperature for tag, value in z.items()})
        draw = keyed_unit(mode.seed_key, "sample")
        cumulative = 0.0
        chosen = sorted(sampling)[-1]
        for tag in sorted(sampling):
            cumulative += sampling[tag]
            if draw < cumulative:
                chosen = tag
                break
    return chosen, distribution


def validate_response(response: CognitionResponse, vocabulary: tuple[str, ...]) -> None:
    """Response invariants every provider must satisfy."""
    if response.chosen_tag not in vocabulary:
        raise ProviderError(f"chosen tag '{response.chosen_tag}' not in vocabulary")
    total = sum(p for _, p in response.distribution)
    if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
        raise ProviderError(f"distribution sums to {total!r}, not 1")
    if any(p < 0 for _, p in response.distribution):
        raise ProviderError("distribution has negative entries")
    unknown = sorted({tag for tag, _ in response.distribution} - set(vocabulary))
    if unknown:
        raise ProviderError(f"distribution names unknown tags {unknown}")


class CognitionProvider(Protocol):
    """Boundary for live models; must be safely callable from multiple contexts."""

    def propose(self, request: CognitionRequest) -> CognitionResponse: ...

    def fuse_text(self, a: KnowledgeCapsule, b: KnowledgeCapsule) -> tuple[str, str]: ...

    def abstract_text(self, agent_id: str, chunk: list[MemoryEvent]) -> str: ...


def render_stub_utterance(request: CognitionRequest, chosen: str) -> tuple[str, tuple[str, ...]]:
    persona = ",".join(request.persona_tags)
    parts = [f"({persona}) {request.agent_id} chooses {chosen}"]
    if request.selected_memories:
        snippet = request.selected_memories[0].content[:MEMORY_SNIPPET_CHARS]
        parts.append(f"recalling '{snippet}'")
    if request.capsule_titles:
        parts.append(f"citing '{request.capsule_titles[0]}'")
    # Tag set stays inside persona + layer tags, which pins dialogue
    # consistency at 1.0 under the stub.
    tags = set(request.persona_tags) | ({chosen} & set(request.layer_tags))
    return "; ".join(parts), tuple(sorted(tags))


@dataclass
class StubProvider:
    """Deterministic test double: keyed-hash logits, template text."""

    seed: int = 0

    def propose(self, request: CognitionRequest) -> CognitionResponse:
        base = stub_logits(self.seed, request.agent_id, request.tick, request.vocabulary)
        chosen, distribution = decide(
            base,
            dict(request.effective_bias),
            dict(request.role_bias),
            dict(request.conformity),
            request.decision_mode,
        )
        utterance, tags = render_stub_utterance(request, chosen)
        return CognitionResponse(
            chosen_tag=chosen,
            distribution=tuple(sorted(distribution.items())),
            utterance=utterance,
            utterance_tags=tags,
        )

    def fuse_text(self, a: KnowledgeCapsule, b: KnowledgeCapsule) -> tuple[str, str]:
        return stub_fusion_text(a, b)

    def abstract_text(self, agent_id: str, chunk: list[MemoryEvent]) -> str:
        return stub_abstract_text(agent_id, chunk)


def propose_action(
    request: CognitionRequest,
    provider: CognitionProvider,
    fallback: StubProvider | None = None,
) -> CognitionResponse:
    """Call the provider and enforce response invariants.

    A live provider that fails or violates the invariants never corrupts the
    run: its response is rejected and the deterministic fallback answers
    instead (or the error propagates with agent/tick context when no fallback
    is configured).
    """
    try:
        response = provider.propose(request)
        validate_response(response, request.vocabulary)
        return response
    except ReplayError:
        raise
    except Exception as exc:
        if fallback is not None and provider is not fallback:
            response = fallback.propose(request)
            validate_response(response, request.vocabulary)
            return response
        if isinstance(exc, ProviderError):
            raise ProviderError(
                f"agent '{request.agent_id}' tick {request.tick}: {exc}"
            ) from exc
        raise ProviderError(
            f"provider failed for agent '{request.agent_id}' tick {request.tick}: {exc}"
        ) from exc


@dataclass(frozen=True)
class ZoneEvent:
    """A committed event attributed to the zone it happened in."""

    zone_id: str
    agent_id: str
    tags: tuple[str, ...]
    content: str


@dataclass(frozen=True)
class ZoneDigest:
    zone_id: str
    tick: int
    summary: str
    tags: tuple[str, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"zone": self.zone_id, "tick": self.tick,
                "summary": self.summary, "tags": list(self.tags)}


def zone_digest(zone_id: str, tick: int, events: list[ZoneEvent]) -> ZoneDigest:
    """Domain-agent tier: one mechanical digest per zone per tick.

    Student requests embed this instead of raw peer events, bounding context
    size by the zone count rather than the agent count.
    """
    mixed = sorted({e.zone_id for e in events} - {zone_id})
    if mixed:
        raise WorldError(f"digest for zone '{zone_id}' given events from zones {mixed}")
    if not events:
        return ZoneDigest(zone_id, tick, f"zone {zone_id} t{tick}: quiet", ())
    tags: set[str] = set()
    for event in events:
        tags |= set(event.tags)
    summary = (
        f"zone {zone_id} t{tick}: {len(events)} events; "
        f"tags: {', '.join(sorted(tags)) if tags else 'none'}"
    )
    return ZoneDigest(zone_id, tick, summary, tuple(sorted(tags)))


def meta_directive(value_names: list[str], tick: int) -> str:
    """Meta-agent tier: one scripted broadcast directive per tick."""
    if value_names:
        return f"tick {tick}: uphold {', '.join(sorted(value_names))}"
    return f"tick {tick}: proceed"
