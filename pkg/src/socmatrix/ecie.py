"""Context injection engine: which rule layers act on an agent, and how.

Layers compose additively: the effective bias for an action tag is the sum of
each active layer's bias scaled by its live-param bindings, so composition
order never matters. Directives concatenate in stack order (strongest rule
first), and hard constraints merge keeping the harshest severity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .world import Agent, RuleLayer, World

DIRECTIVE_SEPARATOR = "\n"

_SEVERITY_RANK = {"escalate": 0, "auto_reject": 1}


@dataclass(frozen=True)
class ContextStack:
    """The composed rule context injected into one agent at one tick."""

    agent_id: str
    tick: int
    layers: tuple[tuple[str, float], ...]  # (layer id, effective scale), stack order
    directive_text: str
    effective_bias: tuple[tuple[str, float], ...]  # sorted (tag, score)
    hard_constraints: tuple[tuple[str, str], ...]  # sorted (tag, max severity)

    def bias_map(self) -> dict[str, float]:
        return dict(self.effective_bias)

    def constraint_map(self) -> dict[str, str]:
        return dict(self.hard_constraints)

    def layer_ids(self) -> list[str]:
        return [layer_id for layer_id, _ in self.layers]

    def layer_tags(self) -> set[str]:
        """Action tags this stack speaks about (bias keys plus forbidden tags)."""
        return {tag for tag, _ in self.effective_bias} | {tag for tag, _ in self.hard_constraints}

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent": self.agent_id,
            "tick": self.tick,
            "layers": [{"id": lid, "scale": scale} for lid, scale in self.layers],
            "directive": self.directive_text,
            "bias": {tag: score for tag, score in self.effective_bias},
            "constraints": {tag: severity for tag, severity in self.hard_constraints},
        }


def active_layers(world: World, agent_id: str, tick: int) -> list[RuleLayer]:
    """Layers whose condition matches the agent's coordinate, strongest first."""
    agent = world.agent(agent_id)
    matched = [
        layer
        for layer in world.layers.values()
        if layer.when.matches(agent.zone_id, tick, agent.role_id)
    ]
    return sorted(matched, key=RuleLayer.sort_key)


def layer_scale(world: World, layer: RuleLayer) -> float:
    """Live-param scale of one layer: product of multiplier * param value
    over its bindings; 1.0 when unbound."""
    scale = 1.0
    for name in sorted(layer.param_bindings):
        scale *= layer.param_bindings[name] * world.param_value(name)
    return scale


def compose_context(world: World, agent_id: str, tick: int) -> ContextStack:
    """Pure composition of the agent's active layers into one context stack."""
    stack_layers = active_layers(world, agent_id, tick)
    bias: dict[str, float] = {}
    constraints: dict[str, str] = {}
    directives: list[str] = []
    placed: list[tuple[str, float]] = []
    for layer in stack_layers:
        scale = layer_scale(world, layer)
        placed.append((layer.id, scale))
        if layer.directive:
            directives.append(layer.directive)
        for tag in sorted(layer.biases):
            bias[tag] = bias.get(tag, 0.0) + scale * layer.biases[tag]
        for tag in sorted(layer.hard_constraints):
            severity = layer.hard_constraints[tag]
            held = constraints.get(tag)
            if held is None or _SEVERITY_RANK[severity] > _SEVERITY_RANK[held]:
                constraints[tag] = severity
    return ContextStack(
        agent_id=agent_id,
        tick=tick,
        layers=tuple(placed),
        directive_text=DIRECTIVE_SEPARATOR.join(directives),
        effective_bias=tuple(sorted(bias.items())),
        hard_constraints=tuple(sorted(constraints.items())),
    )


def refresh_agent(world: World, agent: Agent, tick: int) -> bool:
    """Recompute one agent's stack; returns True when the content changed."""
    fresh = compose_context(world, agent.id, tick)
    changed = agent.stack is None or (
        (agent.stack.layers, agent.stack.directive_text,
         agent.stack.effective_bias, agent.stack.hard_constraints)
        != (fresh.layers, fresh.directive_text, fresh.effective_bias, fresh.hard_constraints)
    )
    agent.stack = fresh
    agent.stack_stale = False
    return changed


def refresh_all(world: World, tick: int) -> list[dict[str, Any]]:
    """Injection phase: recompute every agent's stack, in agent-id order.

    Returns one record payload per agent whose stack content changed.
    """
    records = []
    for agent in world.agents_sorted():
        if refresh_agent(world, agent, tick):
            records.append({"agent": agent.id, "stack": agent.stack.to_dict()})
    return records


def sync_rate(world: World, tick: int) -> float:
    """Fraction of agents whose stored stack matches a fresh recomputation.

    Vacuously 1.0 with no agents. This is the resonance-sync measurement: the
    scheduler keeps it at 1.0 at every tick end by refreshing after movement.
    """
    agents = world.agents_sorted()
    if not agents:
        return 1.0
    in_sync = sum(
        1
        for agent in agents
        if agent.stack is not None and agent.stack == compose_context(world, agent.id, tick)
    )
    return in_sync / len(agents)
