"""World model: zones, rule layers, roles, agents, live params, scenario loading.

Rules live on the world, not on agents: a rule layer is attached to space and
time through its activation condition, and agents pick rules up purely by
standing somewhere. The loader is strict -- unknown keys, dangling ids,
asymmetric adjacency, and out-of-domain params are all hard errors that name
the offending entity.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

from . import topology
from .errors import ScenarioError, WorldError

if TYPE_CHECKING:
    from .ecie import ContextStack

TIERS = ("meta", "domain", "student")
SEVERITIES = ("escalate", "auto_reject")

# Reserved action tag committed by blocked, denied, or rejected agents.
FALLBACK_TAG = "noop"

_SECTIONS = ("zones", "layers", "roles", "agents", "edges", "params",
             "action_vocabulary", "values")


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioError(f"unknown keys {unknown} in {where}")


def _unique_ids(items: list[dict], section: str) -> None:
    seen: set[str] = set()
    for item in items:
        item_id = item.get("id")
        if not isinstance(item_id, str) or not item_id:
            raise ScenarioError(f"missing or empty id in {section} entry")
        if item_id in seen:
            raise ScenarioError(f"duplicate id '{item_id}' in {section}")
        seen.add(item_id)


@dataclass(frozen=True)
class Condition:
    """Activation condition of a rule layer: zone membership, tick interval,
    role membership, as a conjunction. All empty means global."""

    zones: tuple[str, ...] = ()
    roles: tuple[str, ...] = ()
    tick_start: int | None = None
    tick_end: int | None = None

    def matches(self, zone_id: str, tick: int, role_id: str) -> bool:
        if self.zones and zone_id not in self.zones:
            return False
        if self.roles and role_id not in self.roles:
            return False
        if self.tick_start is not None and tick < self.tick_start:
            return False
        if self.tick_end is not None and tick > self.tick_end:
            return False
        return True

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.zones:
            out["zones"] = list(self.zones)
        if self.roles:
            out["roles"] = list(self.roles)
        if self.tick_start is not None or self.tick_end is not None:
            out["ticks"] = [self.tick_start, self.tick_end]
        return out


@dataclass
class RuleLayer:
    id: str
    name: str
    priority: int
    when: Condition
    directive: str
    biases: dict[str, float]
    hard_constraints: dict[str, str]  # action tag -> severity
    param_bindings: dict[str, float]  # live-param name -> multiplier

    def sort_key(self) -> tuple[int, str]:
        # Higher priority first; ties break by id ascending.
        return (-self.priority, self.id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "priority": self.priority,
            "when": self.when.to_dict(),
            "directive": self.directive,
            "biases": dict(sorted(self.biases.items())),
            "forbid": [
                {"tag": t, "severity": s} for t, s in sorted(self.hard_constraints.items())
            ],
            "scales_with": dict(sorted(self.param_bindings.items())),
        }


@dataclass
class Zone:
    id: str
    name: str
    adjacent: set[str]
    layer_ids: tuple[str, ...] = ()  # derived: layers conditioned on this zone

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "name": self.name, "adjacent": sorted(self.adjacent)}


@dataclass
class Role:
    id: str
    title: str
    tier: str
    anchor_node: str
    value_bias: dict[str, float]
    persona_tags: tuple[str, ...]
    value_weights: dict[str, float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "tier": self.tier,
            "anchor": self.anchor_node,
            "value_bias": dict(sorted(self.value_bias.items())),
            "persona": list(self.persona_tags),
            "value_weights": dict(sorted(self.value_weights.items())),
        }


@dataclass
class Agent:
    id: str
    role_id: str
    zone_id: str
    tick: int = 0
    stack: "ContextStack | None" = None
    last_action: str | None = None
    selected_memory_ids: tuple[int, ...] = ()
    stack_stale: bool = True

    def context_layer_ids(self) -> list[str]:
        return [layer_id for layer_id, _ in self.stack.layers] if self.stack else []

    def to_state_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "role": self.role_id,
            "zone": self.zone_id,
            "tick": self.tick,
            "stack": self.stack.to_dict() if self.stack else None,
            "last_action": self.last_action,
            "selected_memories": list(self.selected_memory_ids),
        }


@dataclass
class ParamSpec:
    name: str
    min: float
    max: float
    value: float

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "min": self.min, "max": self.max, "value": self.value}


@dataclass(frozen=True)
class ValueSpec:
    """A named institutional value tied to the action tag that expresses it."""

    name: str
    action: str

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "action": self.action}


@dataclass
class World:
    zones: dict[str, Zone]
    layers: dict[str, RuleLayer]
    roles: dict[str, Role]
    agents: dict[str, Agent]
    params: dict[str, ParamSpec]
    vocabulary: tuple[str, ...]
    values: tuple[ValueSpec, ...]
    graph: topology.SocialGraph
    scenario: dict[str, Any]  # normalized source document, embedded in genesis

    def zone(self, zone_id: str) -> Zone:
        if zone_id not in self.zones:
            raise WorldError(f"unknown zone '{zone_id}'")
        return self.zones[zone_id]

    def agent(self, agent_id: str) -> Agent:
        if agent_id not in self.agents:
            raise WorldError(f"unknown agent '{agent_id}'")
        return self.agents[agent_id]

    def role(self, role_id: str) -> Role:
        if role_id not in self.roles:
            raise WorldError(f"unknown role '{role_id}'")
        return self.roles[role_id]

    def agents_sorted(self) -> list[Agent]:
        return [self.agents[a] for a in sorted(self.agents)]

    def layers_sorted(self) -> list[RuleLayer]:
        return sorted(self.layers.values(), key=RuleLayer.sort_key)

    def param_value(self, name: str, default: float | None = None) -> float:
        if name in self.params:
            return self.params[name].value
        if default is None:
            raise WorldError(f"unknown live param '{name}'")
        return default

    def to_state_dict(self) -> dict[str, Any]:
        """Full dynamic state, canonically ordered (basis for state hashing)."""
        return {
            "zones": [self.zones[z].to_dict() for z in sorted(self.zones)],
            "layers": [self.layers[l].to_dict() for l in sorted(self.layers)],
            "roles": [self.roles[r].to_dict() for r in sorted(self.roles)],
            "agents": [a.to_state_dict() for a in self.agents_sorted()],
            "params": [self.params[p].to_dict() for p in sorted(self.params)],
            "action_vocabulary": list(self.vocabulary),
            "values": [v.to_dict() for v in self.values],
            "graph": self.graph.to_dict(),
        }


def _parse_condition(raw: dict[str, Any], layer_id: str) -> Condition:
    _check_keys(raw, {"zones", "roles", "ticks"}, f"layer '{layer_id}' when-clause")
    zones = tuple(str(z) for z in raw.get("zones", []))
    roles = tuple(str(r) for r in raw.get("roles", []))
    start = end = None
    if "ticks" in raw:
        ticks = raw["ticks"]
        if not isinstance(ticks, list) or len(ticks) != 2:
            raise ScenarioError(f"layer '{layer_id}' ticks must be [start, end]")
        start = int(ticks[0]) if ticks[0] is not None else None
        end = int(ticks[1]) if ticks[1] is not None else None
        if start is not None and end is not None and end < start:
            raise ScenarioError(f"layer '{layer_id}' tick range is empty")
    return Condition(zones=zones, roles=roles, tick_start=start, tick_end=end)


def _parse_layer(raw: dict[str, Any], vocabulary: set[str]) -> RuleLayer:
    _check_keys(
        raw,
        {"id", "name", "priority", "when", "directive", "biases", "forbid", "scales_with"},
        f"layer '{raw.get('id', '?')}'",
    )
    layer_id = str(raw["id"])
    biases: dict[str, float] = {}
    for tag, score in raw.get("biases", {}).items():
        value = float(score)
        if value != value or value in (float("inf"), float("-inf")):
            raise ScenarioError(f"layer '{layer_id}' bias for '{tag}' is not finite")
        if tag not in vocabulary:
            raise ScenarioError(f"layer '{layer_id}' biases unknown action tag '{tag}'")
        biases[tag] = value
    constraints: dict[str, str] = {}
    for entry in raw.get("forbid", []):
        _check_keys(entry, {"tag", "severity"}, f"layer '{layer_id}' forbid entry")
        tag, severity = str(entry["tag"]), str(entry["severity"])
        if tag not in vocabulary:
            raise ScenarioError(f"layer '{layer_id}' forbids unknown action tag '{tag}'")
        if severity not in SEVERITIES:
            raise ScenarioError(
                f"layer '{layer_id}' severity '{severity}' not in {list(SEVERITIES)}"
            )
        constraints[tag] = severity
    bindings = {str(p): float(m) for p, m in raw.get("scales_with", {}).items()}
    return RuleLayer(
        id=layer_id,
        name=str(raw.get("name", layer_id)),
        priority=int(raw["priority"]),
        when=_parse_condition(raw.get("when", {}), layer_id),
        directive=str(raw.get("directive", "")),
        biases=biases,
        hard_constraints=constraints,
        param_bindings=bindings,
    )


def build_world(doc: dict[str, Any]) -> World:
    """Validate a parsed scenario document and assemble the World."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    _check_keys(doc, set(_SECTIONS), "scenario document")
    missing = [s for s in _SECTIONS if s not in doc]
    if missing:
        raise ScenarioError(f"scenario is missing sections {missing}")

    vocabulary = tuple(sorted(str(t) for t in doc["action_vocabulary"]))
    if not vocabulary:
        raise ScenarioError("action_vocabulary must be non-empty")
    if len(set(vocabulary)) != len(vocabulary):
        raise ScenarioError("action_vocabulary contains duplicates")
    if FALLBACK_TAG not in vocabulary:
        raise ScenarioError(f"action_vocabulary must include the '{FALLBACK_TAG}' fallback tag")
    vocab_set = set(vocabulary)

    for section in ("zones", "layers", "roles", "agents"):
        _unique_ids(doc[section], section)

    zones: dict[str, Zone] = {}
    for raw in doc["zones"]:
        _check_keys(raw, {"id", "name", "adjacent"}, f"zone '{raw.get('id', '?')}'")
        zone_id = str(raw["id"])
        zones[zone_id] = Zone(
            id=zone_id,
            name=str(raw.get("name", zone_id)),
            adjacent=set(str(z) for z in raw.get("adjacent", [])),
        )
    for zone in zones.values():
        for other in sorted(zone.adjacent):
            if other not in zones:
                raise ScenarioError(f"zone '{zone.id}' adjacent to unknown zone '{other}'")
            if other == zone.id:
                raise ScenarioError(f"zone '{zone.id}' is adjacent to itself")
            if zone.id not in zones[other].adjacent:
                raise ScenarioError(
                    f"asymmetric adjacency: '{zone.id}' -> '{other}' has no reverse edge"
                )

    layers = {layer.id: layer for layer in (_parse_layer(raw, vocab_set) for raw in doc["layers"])}
    value_names: set[str] = set()
    values: list[ValueSpec] = []
    for raw in doc["values"]:
        _check_keys(raw, {"name", "action"}, f"value '{raw.get('name', '?')}'")
        name, action = str(raw["name"]), str(raw["action"])
        if name in value_names:
            raise ScenarioError(f"duplicate value name '{name}'")
        if action not in vocab_set:
            raise ScenarioError(f"value '{name}' names unknown action tag '{action}'")
        value_names.add(name)
        values.append(ValueSpec(name=name, action=action))

    roles: dict[str, Role] = {}
    for raw in doc["roles"]:
        _check_keys(
            raw,
            {"id", "title", "tier", "anchor", "value_bias", "persona", "value_weights"},
            f"role '{raw.get('id', '?')}'",
        )
        role_id = str(raw["id"])
        tier = str(raw.get("tier", "student"))
        if tier not in TIERS:
            raise ScenarioError(f"role '{role_id}' tier '{tier}' not in {list(TIERS)}")
        bias: dict[str, float] = {}
        for tag, score in raw.get("value_bias", {}).items():
            if tag not in vocab_set:
                raise ScenarioError(f"role '{role_id}' value_bias names unknown tag '{tag}'")
            bias[tag] = float(score)
        weights: dict[str, float] = {}
        for name, w in raw.get("value_weights", {}).items():
            if name not in value_names:
                raise ScenarioError(f"role '{role_id}' weights undeclared value '{name}'")
            w = float(w)
            if not 0.0 <= w <= 1.0:
                raise ScenarioError(f"role '{role_id}' value weight '{name}'={w} outside [0, 1]")
            weights[name] = w
        roles[role_id] = Role(
            id=role_id,
            title=str(raw.get("title", role_id)),
            tier=tier,
            anchor_node=str(raw.get("anchor", "")),
            value_bias=bias,
            persona_tags=tuple(sorted(str(t) for t in raw.get("persona", []))),
            value_weights=weights,
        )

    for layer in layers.values():
        for zone_id in layer.when.zones:
            if zone_id not in zones:
                raise ScenarioError(f"layer '{layer.id}' conditioned on unknown zone '{zone_id}'")
        for role_id in layer.when.roles:
            if role_id not in roles:
                raise ScenarioError(f"layer '{layer.id}' conditioned on unknown role '{role_id}'")

    agents: dict[str, Agent] = {}
    for raw in doc["agents"]:
        _check_keys(raw, {"id", "role", "zone"}, f"agent '{raw.get('id', '?')}'")
        agent_id = str(raw["id"])
        role_id, zone_id = str(raw["role"]), str(raw["zone"])
        if role_id not in roles:
            raise ScenarioError(f"agent '{agent_id}' has unknown role '{role_id}'")
        if zone_id not in zones:
            raise ScenarioError(f"agent '{agent_id}' placed in unknown zone '{zone_id}'")
        agents[agent_id] = Agent(id=agent_id, role_id=role_id, zone_id=zone_id)

    for role in roles.values():
        if role.anchor_node and role.anchor_node not in agents:
            raise ScenarioError(f"role '{role.id}' anchored to unknown agent '{role.anchor_node}'")

    graph = topology.SocialGraph()
    for agent_id in agents:
        graph.add_node(agent_id)
    seen_pairs: set[tuple[str, str]] = set()
    for raw in doc["edges"]:
        _check_keys(raw, {"a", "b", "w"}, "edge entry")
        a, b, w = str(raw["a"]), str(raw["b"]), float(raw["w"])
        if a not in agents or b not in agents:
            raise ScenarioError(f"edge {a}-{b} references unknown agent")
        pair = (min(a, b), max(a, b))
        if pair in seen_pairs:
            raise ScenarioError(f"duplicate edge {pair[0]}-{pair[1]}")
        seen_pairs.add(pair)
        if not 0.0 < w <= 1.0:
            raise ScenarioError(f"edge {a}-{b} weight {w} outside (0, 1]")
        topology.update_edge(graph, a, b, w)

    params: dict[str, ParamSpec] = {}
    for raw in doc["params"]:
        _check_keys(raw, {"name", "min", "max", "value"}, f"param '{raw.get('name', '?')}'")
        name = str(raw["name"])
        if name in params:
            raise ScenarioError(f"duplicate param '{name}'")
        lo, hi, value = float(raw["min"]), float(raw["max"]), float(raw["value"])
        if hi < lo:
            raise ScenarioError(f"param '{name}' has empty domain [{lo}, {hi}]")
        if not lo <= value <= hi:
            raise ScenarioError(f"param '{name}' value {value} outside [{lo}, {hi}]")
        params[name] = ParamSpec(name=name, min=lo, max=hi, value=value)

    # Derived zone-side index: layers conditioned on each zone, stack order.
    for zone in zones.values():
        attached = [l for l in layers.values() if zone.id in l.when.zones]
        zone.layer_ids = tuple(l.id for l in sorted(attached, key=RuleLayer.sort_key))

    return World(
        zones=zones,
        layers=layers,
        roles=roles,
        agents=agents,
        params=params,
        vocabulary=vocabulary,
        values=tuple(values),
        graph=graph,
        scenario=doc,
    )


def load_scenario(path: str | Path) -> World:
    """Load and validate a scenario file (strict JSON)."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file '{path}' does not exist")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file '{path}' is not valid JSON: {exc}") from exc
    return build_world(doc)


@dataclass(frozen=True)
class MoveResult:
    moved: bool
    record: dict[str, Any] | None


def place_agent(
    world: World, agent_id: str, zone_id: str, tick: int, teleport: bool = False
) -> MoveResult:
    """Move an agent to an adjacent zone (or anywhere with the teleport flag).

    Moving to the current zone is an explicit no-op with no record. On a real
    move the context stack goes stale until the next injection phase.
    """
    agent = world.agent(agent_id)
    target = world.zone(zone_id)
    if agent.zone_id == zone_id:
        return MoveResult(moved=False, record=None)
    if not teleport and zone_id not in world.zone(agent.zone_id).adjacent:
        raise WorldError(
            f"zone '{zone_id}' is not adjacent to '{agent.zone_id}' for agent '{agent_id}'"
        )
    origin = agent.zone_id
    agent.zone_id = target.id
    agent.tick = tick
    agent.stack_stale = True
    return MoveResult(
        moved=True, record={"agent": agent_id, "from": origin, "to": zone_id, "tick": tick}
    )


def set_live_param(world: World, name: str, value: float) -> dict[str, Any]:
    """Set a live param inside its declared domain; returns the record payload.

    Callers sequence this at tick boundaries so one tick sees one parameter set.
    """
    if name not in world.params:
        raise WorldError(f"unknown live param '{name}'")
    spec = world.params[name]
    value = float(value)
    if not spec.min <= value <= spec.max:
        raise WorldError(
            f"param '{name}' value {value} outside domain [{spec.min}, {spec.max}]"
        )
    previous = spec.value
    spec.value = value
    return {"name": name, "from": previous, "to": value}
