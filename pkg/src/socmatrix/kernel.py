"""The social microkernel: phased tick loop, event log, replay, metrics, plugins.

One tick runs nine fixed phases:

  1 apply queued commands (verdicts, param patches)
  2 movement
  3 context injection (refresh all stacks)
  4 meta directive + zone digests
  5 cognition fan-out
  6 handshake evaluate/expire
  7 commit actions + memory generation
  8 memory retrieval/selection/abstraction
  9 metrics + log flush

Every mutation belongs to exactly one phase and every record names its phase,
so a run is a pure function of (scenario, seed, command trace, provider
outputs) and the log replays bit-exactly.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable, Iterable

from . import capsules as capsules_mod
from . import ecie, memory, topology, world as world_mod
from .canonical import keyed_unit, state_hash as hash_state
from .cognition import (
    CognitionRequest,
    CognitionResponse,
    DecisionMode,
    StubProvider,
    ZoneEvent,
    meta_directive,
    propose_action,
    zone_digest,
)
from .errors import ConflictStateError, ReplayError, ScenarioError, WorldError
from .eventlog import EventLog, LogRecord, verify_chain
from .handshake import ConflictBook, ProposedAction
from .memory import AbstractionPolicy, MemoryBuffer, MemoryEvent, RetrievalQuery
from .plugins import PluginHost, PluginManifest, Registration
from .world import FALLBACK_TAG, World, build_world, load_scenario

CAPSULE_REF_CAP = 4
RELEASED_IMPORTANCE = 5.0


@dataclass
class KernelConfig:
    """Tunables with artifact defaults; scenarios may override beta, eta, and
    mobility by declaring live params of those names (live-programmable)."""

    tau: float = 0.3  # clustering/community binarization threshold
    beta: float = 1.0  # role anchor gain
    eta: float = 0.5  # conformity weight
    mobility: float = 0.25  # per-tick chance an agent wanders next door
    conflict_deadline: int = 3
    snapshot_every: int = 50
    metrics_window: int = 20
    decision: str = "argmax"  # or "sample"
    temperature: float = 1.0
    mem_trigger: int = 64
    mem_chunk: int = 32
    mem_min_age: int = 10
    mem_quorum: int = 3
    mem_select: int = 8
    mem_threshold: float = 0.0
    mem_decay: float = 0.05
    w_recency: float = 1.0
    w_relevance: float = 1.0
    w_importance: float = 1.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "KernelConfig":
        return cls(**raw)

    def abstraction_policy(self) -> AbstractionPolicy:
        return AbstractionPolicy(
            trigger=self.mem_trigger, chunk=self.mem_chunk,
            min_age=self.mem_min_age, quorum=self.mem_quorum,
        )


@dataclass(frozen=True)
class MetricsReport:
    tick: int
    clustering: float
    sync: float
    consistency: float
    value_efficacy: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "tick": self.tick,
            "clustering": self.clustering,
            "sync": self.sync,
            "consistency": self.consistency,
            "value_efficacy": self.value_efficacy,
        }


@dataclass
class _CommitPlan:
    tag: str
    utterance: str
    utterance_tags: tuple[str, ...]
    basis: str  # passed|approved|amended|denied|expired|blocked|auto_rejected
    importance: float
    stack: ecie.ContextStack | None  # stack the utterance was generated under


class PlaybackProvider:
    """Replays logged provider outputs instead of calling anything."""

    def __init__(self, responses: list[dict[str, Any]], abstract_texts: list[str]) -> None:
        self._responses = list(responses)
        self._abstracts = list(abstract_texts)
        self._response_at = 0
        self._abstract_at = 0

    def propose(self, request: CognitionRequest) -> CognitionResponse:
        if self._response_at >= len(self._responses):
            raise ReplayError(
                f"log exhausted: no response for agent '{request.agent_id}' tick {request.tick}"
            )
        payload = self._responses[self._response_at]
        self._response_at += 1
        if payload["agent"] != request.agent_id or payload["tick"] != request.tick:
            raise ReplayError(
                f"response order mismatch: log has ({payload['agent']}, {payload['tick']}), "
                f"replay asked for ({request.agent_id}, {request.tick})"
            )
        return CognitionResponse.from_dict(payload["response"])

    def abstract_text(self, agent_id: str, chunk: list[MemoryEvent]) -> str:
        if self._abstract_at >= len(self._abstracts):
            raise ReplayError(f"log exhausted: no abstract text for agent '{agent_id}'")
        text = self._abstracts[self._abstract_at]
        self._abstract_at += 1
        return text

    def fuse_text(self, a, b):  # pragma: no cover - fusion never runs in-loop
        raise ReplayError("capsule fusion is not part of the tick loop")


class Kernel:
    """Single-writer simulation core. All reads by other threads must go
    through snapshots taken between run_tick calls."""

    def __init__(
        self,
        world: World,
        seed: int,
        config: KernelConfig | None = None,
        provider: Any | None = None,
    ) -> None:
        self.world = world
        self.seed = seed
        self.config = config or KernelConfig()
        self.provider = provider if provider is not None else StubProvider(seed)
        trusted = isinstance(self.provider, (StubProvider, PlaybackProvider))
        self.fallback = None if trusted else StubProvider(seed)
        self.log = EventLog()
        self.tick = 0
        self.store = capsules_mod.CapsuleStore()
        self.buffers = {a: MemoryBuffer(a) for a in sorted(world.agents)}
        self.book = ConflictBook()
        self.blocked: dict[str, int] = {}  # agent id -> pending conflict id
        self.prev_zone_events: list[ZoneEvent] = []
        self.consistency_log: list[tuple[int, bool]] = []
        self.plugin_host = PluginHost(
            topology_reader=lambda: self.topology_snapshot(),
            capsules_reader=lambda: self.store.to_dict(),
        )
        self.latest_metrics: MetricsReport | None = None
        self._log_record(0, "SNAPSHOT", {
            "phase": 0,
            "genesis": True,
            "scenario": world.scenario,
            "config": self.config.to_dict(),
            "seed": seed,
            "state_hash": self.state_hash(),
        })

    # -- state --------------------------------------------------------------

    def state_dict(self) -> dict[str, Any]:
        return {
            "tick": self.tick,
            "seed": self.seed,
            "config": self.config.to_dict(),
            "world": self.world.to_state_dict(),
            "capsules": self.store.to_dict(),
            "buffers": [self.buffers[a].to_dict() for a in sorted(self.buffers)],
            "conflicts": self.book.to_dict(),
            "blocked": dict(sorted(self.blocked.items())),
            "zone_events": [
                [e.zone_id, e.agent_id, list(e.tags), e.content]
                for e in self.prev_zone_events
            ],
            "consistency": [[t, ok] for t, ok in self.consistency_log],
        }

    def state_hash(self) -> str:
        return hash_state(self.state_dict())

    def topology_snapshot(self) -> dict[str, Any]:
        snapshot = self.world.graph.to_dict()
        snapshot["communities"] = topology.detect_communities(
            self.world.graph, self._live("tau", self.config.tau)
        ).to_dict()
        return snapshot

    def _live(self, name: str, default: float) -> float:
        if name in self.world.params:
            return self.world.params[name].value
        return default

    def _log_record(self, tick: int, kind: str, payload: dict[str, Any]) -> LogRecord:
        return self.log.append(tick, kind, payload)

    # -- plugins ------------------------------------------------------------

    def register_plugin(self, manifest: PluginManifest, hooks: dict[str, Callable] | None = None) -> Registration:
        return self.plugin_host.register(manifest, hooks)

    # -- metrics ------------------------------------------------------------

    def compute_metrics(self, window: int | None = None, at_tick: int | None = None) -> MetricsReport:
        """Metrics evaluated at the last completed tick (or an explicit one)."""
        window = self.config.metrics_window if window is None else window
        if window < 1:
            raise WorldError(f"metrics window must be >= 1, got {window}")
        tick = at_tick if at_tick is not None else max(self.tick - 1, 0)
        flags = [ok for t, ok in self.consistency_log if tick - window < t <= tick]
        consistency = sum(flags) / len(flags) if flags else 1.0
        return MetricsReport(
            tick=tick,
            clustering=topology.clustering_coefficient(
                self.world.graph, self._live("tau", self.config.tau)
            ),
            sync=ecie.sync_rate(self.world, tick),
            consistency=consistency,
        )

    # -- tick loop ----------------------------------------------------------

    def run_tick(self, commands: list[dict[str, Any]], final_snapshot: bool = False) -> list[LogRecord]:
        """Execute one tick; pure function of (state, commands, seed).

        Commands are shape-checked up front so a malformed batch aborts the
        tick before any record or mutation (no partial commits).
        """
        for command in commands:
            if command.get("kind") not in ("param", "verdict"):
                raise WorldError(f"unknown command kind '{command.get('kind')}'")
        t = self.tick
        start_seq = self.log.head_seq + 1
        releases = self._phase_commands(t, commands)
        self._phase_movement(t, releases)
        self._phase_injection(t)
        meta, digests = self._phase_digests(t)
        proposals = self._phase_cognition(t, meta, digests, releases)
        plan = self._phase_handshake(t, proposals, releases)
        zone_events = self._phase_commit(t, plan)
        self._phase_memory(t)
        self._phase_metrics(t, zone_events, final_snapshot)
        return self.log.records[start_seq:]

    def _phase_commands(self, t: int, commands: list[dict[str, Any]]) -> dict[str, _CommitPlan]:
        releases: dict[str, _CommitPlan] = {}
        for command in commands:
            kind = command.get("kind")
            if kind == "param":
                try:
                    applied = world_mod.set_live_param(
                        self.world, command["name"], command["value"]
                    )
                    payload = {"command": command, "outcome": "applied", "change": applied}
                except WorldError as exc:
                    payload = {"command": command, "outcome": "rejected", "reason": str(exc)}
                self._log_record(t, "PARAM", {"phase": 1, **payload})
            elif kind == "verdict":
                try:
                    conflict = self.book.apply_verdict(
                        int(command["conflict_id"]),
                        command["verdict"],
                        str(command.get("arbiter", "anonymous")),
                        command.get("content"),
                    )
                    payload = {"command": command, "outcome": "applied",
                               "conflict": conflict.to_dict()}
                    agent_id = conflict.action.agent_id
                    self.blocked.pop(agent_id, None)
                    releases[agent_id] = self._release_plan(conflict)
                except (WorldError, ConflictStateError) as exc:
                    payload = {"command": command, "outcome": "rejected", "reason": str(exc)}
                self._log_record(t, "VERDICT", {"phase": 1, **payload})
        return releases

    def _release_plan(self, conflict) -> _CommitPlan:
        action = conflict.action
        if conflict.status == "approved":
            return _CommitPlan(action.tag, action.utterance, action.utterance_tags,
                               "approved", RELEASED_IMPORTANCE, action.stack)
        if conflict.status == "amended":
            return _CommitPlan(action.tag, conflict.amended_content or "",
                               action.utterance_tags, "amended",
                               RELEASED_IMPORTANCE, action.stack)
        return _CommitPlan(FALLBACK_TAG, "", (), "denied", 0.0, None)

    def _phase_movement(self, t: int, releases: dict[str, _CommitPlan]) -> None:
        mobility = self._live("mobility", self.config.mobility)
        for agent in self.world.agents_sorted():
            if agent.id in self.blocked or agent.id in releases:
                continue
            if keyed_unit(self.seed, t, agent.id, "move-gate") >= mobility:
                continue
            adjacent = sorted(self.world.zone(agent.zone_id).adjacent)
            if not adjacent:
                continue
            pick = int(keyed_unit(self.seed, t, agent.id, "move-pick") * len(adjacent))
            result = world_mod.place_agent(self.world, agent.id, adjacent[pick], t)
            if result.moved:
                self._log_record(t, "MOVE", {"phase": 2, **result.record})

    def _phase_injection(self, t: int) -> None:
        for payload in ecie.refresh_all(self.world, t):
            self._log_record(t, "INJECT", {"phase": 3, **payload})

    def _phase_digests(self, t: int) -> tuple[str, dict[str, Any]]:
        meta = meta_directive([v.name for v in self.world.values], t)
        digests = {}
        for zone_id in sorted(self.world.zones):
            events = [e for e in self.prev_zone_events if e.zone_id == zone_id]
            digests[zone_id] = zone_digest(zone_id, t, events)
        return meta, digests

    def _phase_cognition(
        self, t: int, meta: str, digests: dict[str, Any],
        releases: dict[str, _CommitPlan],
    ) -> dict[str, tuple[CognitionRequest, CognitionResponse]]:
        beta = self._live("beta", self.config.beta)
        eta = self._live("eta", self.config.eta)
        last_actions = {
            a.id: a.last_action for a in self.world.agents_sorted()
            if a.last_action is not None
        }
        proposals: dict[str, tuple[CognitionRequest, CognitionResponse]] = {}
        for agent in self.world.agents_sorted():
            # Blocked agents wait; released agents act out their verdict this
            # tick instead of proposing anew.
            if agent.id in self.blocked or agent.id in releases:
                continue
            role = self.world.role(agent.role_id)
            stack = agent.stack
            assert stack is not None  # refreshed in phase 3
            conformity = topology.conformity_term(self.world.graph, agent.id, last_actions)
            refs = self._capsule_refs(agent.id)
            digest = digests[agent.zone_id]
            if self.config.decision == "sample":
                mode = DecisionMode("sample", self.config.temperature,
                                    seed_key=f"{self.seed}|{t}|{agent.id}")
            else:
                mode = DecisionMode("argmax")
            request = CognitionRequest(
                agent_id=agent.id,
                tick=t,
                directive_text=stack.directive_text,
                effective_bias=stack.effective_bias,
                role_bias=tuple(sorted(
                    topology.role_alignment_bias(role.value_bias, beta).items()
                )),
                conformity=tuple(sorted(
                    (tag, eta * v) for tag, v in conformity.items()
                )),
                selected_memories=tuple(
                    self.buffers[agent.id].get(eid) for eid in agent.selected_memory_ids
                ),
                capsule_refs=tuple(c.id for c in refs),
                capsule_titles=tuple(c.title for c in refs),
                vocabulary=self.world.vocabulary,
                persona_tags=role.persona_tags,
                layer_tags=tuple(sorted(stack.layer_tags())),
                decision_mode=mode,
                meta_directive=meta,
                digest_text=digest.summary,
                digest_tags=digest.tags,
            )
            self._log_record(t, "REQUEST", {"phase": 5, "agent": agent.id,
                                            "tick": t, "request": request.to_dict()})
            response = propose_action(request, self.provider, self.fallback)
            self._log_record(t, "RESPONSE", {"phase": 5, "agent": agent.id,
                                             "tick": t, "response": response.to_dict()})
            proposals[agent.id] = (request, response)
        return proposals

    def _capsule_refs(self, agent_id: str) -> list[capsules_mod.KnowledgeCapsule]:
        mine = [c for c in self.store.capsules.values() if c.origin_agent == agent_id]
        mine.sort(key=lambda c: (-c.created_tick, c.id))
        return mine[:CAPSULE_REF_CAP]

    def _phase_handshake(
        self,
        t: int,
        proposals: dict[str, tuple[CognitionRequest, CognitionResponse]],
        releases: dict[str, _CommitPlan],
    ) -> dict[str, _CommitPlan]:
        plan: dict[str, _CommitPlan] = dict(releases)
        deadline = self.config.conflict_deadline
        for agent_id in sorted(proposals):
            request, response = proposals[agent_id]
            agent = self.world.agent(agent_id)
            stack = agent.stack
            assert stack is not None
            action = ProposedAction(
                agent_id=agent_id, tick=t, tag=response.chosen_tag,
                utterance=response.utterance, stack=stack,
                utterance_tags=response.utterance_tags,
            )
            evaluation = self.book.evaluate(action, stack, self.world.layers, deadline)
            if evaluation.outcome == "pass":
                plan[agent_id] = _CommitPlan(
                    action.tag, action.utterance, action.utterance_tags, "passed",
                    10.0 * response.probability(action.tag), stack,
                )
            elif evaluation.outcome == "auto_reject":
                self._log_record(t, "CONFLICT", {
                    "phase": 6, "event": "auto_rejected", "agent": agent_id,
                    "action": action.to_dict(),
                    "violations": [
                        {"layer": l, "tag": tag, "severity": s}
                        for l, tag, s in evaluation.violations
                    ],
                })
                plan[agent_id] = _CommitPlan(FALLBACK_TAG, "", (), "auto_rejected", 0.0, None)
            else:
                conflict = evaluation.conflict
                assert conflict is not None
                self.blocked[agent_id] = conflict.id
                self._log_record(t, "CONFLICT", {
                    "phase": 6, "event": "escalated", "conflict": conflict.to_dict(),
                })
                plan[agent_id] = _CommitPlan(FALLBACK_TAG, "", (), "blocked", 0.0, None)
        for conflict in self.book.expire(t):
            agent_id = conflict.action.agent_id
            self.blocked.pop(agent_id, None)
            self._log_record(t, "CONFLICT", {
                "phase": 6, "event": "expired", "conflict_id": conflict.id,
                "agent": agent_id,
            })
            plan[agent_id] = _CommitPlan(FALLBACK_TAG, "", (), "expired", 0.0, None)
        for agent_id in sorted(self.blocked):
            plan.setdefault(
                agent_id, _CommitPlan(FALLBACK_TAG, "", (), "blocked", 0.0, None)
            )
        return plan

    def _phase_commit(self, t: int, plan: dict[str, _CommitPlan]) -> list[ZoneEvent]:
        zone_events: list[ZoneEvent] = []
        for agent in self.world.agents_sorted():
            entry = plan.get(agent.id)
            if entry is None:
                raise WorldError(f"phase invariant violation: no commit plan for '{agent.id}'")
            role = self.world.role(agent.role_id)
            consistent: bool | None = None
            if entry.utterance:
                # Consistency is judged against the stack the utterance was
                # generated under, not whatever replaced it since.
                reference = entry.stack if entry.stack is not None else agent.stack
                allowed = set(role.persona_tags) | (
                    reference.layer_tags() if reference else set()
                )
                consistent = set(entry.utterance_tags) <= allowed
                self.consistency_log.append((t, consistent))
            self._log_record(t, "COMMIT", {
                "phase": 7, "agent": agent.id, "tag": entry.tag,
                "utterance": entry.utterance,
                "utterance_tags": list(entry.utterance_tags),
                "basis": entry.basis, "zone": agent.zone_id,
                "consistent": consistent,
            })
            agent.last_action = entry.tag
            buffer = self.buffers[agent.id]
            event = MemoryEvent(
                id=buffer.next_id(),
                agent_id=agent.id,
                tick=t,
                kind="dialogue" if entry.utterance else "action",
                content=entry.utterance or entry.tag,
                tags=tuple(sorted(set(entry.utterance_tags) | {entry.tag})),
                importance=entry.importance,
            )
            memory.record_event(buffer, event)
            if entry.basis in ("passed", "approved", "amended"):
                zone_events.append(ZoneEvent(
                    zone_id=agent.zone_id, agent_id=agent.id,
                    tags=event.tags, content=event.content,
                ))
        return zone_events

    def _phase_memory(self, t: int) -> None:
        policy = self.config.abstraction_policy()
        for agent in self.world.agents_sorted():
            buffer = self.buffers[agent.id]
            role = self.world.role(agent.role_id)
            tags = set(role.persona_tags)
            if agent.last_action is not None:
                tags.add(agent.last_action)
            query = RetrievalQuery(
                tags=tuple(sorted(tags)), t_now=t,
                w_recency=self.config.w_recency,
                w_relevance=self.config.w_relevance,
                w_importance=self.config.w_importance,
                decay=self.config.mem_decay,
                k=self.config.mem_select,
                threshold=self.config.mem_threshold,
            )
            scored = memory.score_events(buffer, query)
            agent.selected_memory_ids = tuple(
                memory.select_memories(scored, query.k, query.threshold)
            )
            result = memory.abstract_chunk(buffer, self.provider, policy, t, self.store)
            if result.fired and result.abstract is not None:
                self._log_record(t, "ABSTRACT", {
                    "phase": 8, "agent": agent.id, "event": result.abstract.to_dict(),
                })
                if result.capsule is not None:
                    self._log_record(t, "CAPSULE", {
                        "phase": 8, "capsule": result.capsule.to_dict(),
                    })

    def _phase_metrics(self, t: int, zone_events: list[ZoneEvent], final_snapshot: bool) -> None:
        window = self.config.metrics_window
        self.consistency_log = [
            (tick, ok) for tick, ok in self.consistency_log if tick > t - window
        ]
        report = self.compute_metrics(window, at_tick=t)
        self.latest_metrics = report
        self._log_record(t, "METRICS", {"phase": 9, "metrics": report.to_dict()})
        self.plugin_host.dispatch_tick(t)
        self.prev_zone_events = zone_events
        self.tick = t + 1
        due = (t + 1) % self.config.snapshot_every == 0
        if due or final_snapshot:
            self._log_record(t, "SNAPSHOT", {
                "phase": 9, "state_hash": self.state_hash(),
                "final": bool(final_snapshot),
            })

    def run(self, ticks: int) -> list[LogRecord]:
        if ticks < 0:
            raise WorldError(f"tick count must be >= 0, got {ticks}")
        for t in range(ticks):
            self.run_tick([], final_snapshot=(t == ticks - 1))
        return self.log.records


# -- module-level drivers ----------------------------------------------------


@dataclass
class RunResult:
    kernel: Kernel
    records: list[LogRecord]
    final_state_hash: str
    elapsed_seconds: float


def run_simulation(
    scenario: str | Path | dict[str, Any] | World,
    ticks: int,
    seed: int,
    config: KernelConfig | None = None,
    provider: Any | None = None,
) -> RunResult:
    started = time.perf_counter()
    if isinstance(scenario, World):
        world = scenario
    elif isinstance(scenario, dict):
        world = build_world(scenario)
    else:
        world = load_scenario(scenario)
    kernel = Kernel(world, seed, config, provider)
    kernel.run(ticks)
    return RunResult(
        kernel=kernel,
        records=kernel.log.records,
        final_state_hash=kernel.state_hash(),
        elapsed_seconds=time.perf_counter() - started,
    )


@dataclass
class ReplayResult:
    final_state_hash: str
    ticks: int
    kernel: Kernel


def replay(records: Iterable[LogRecord]) -> ReplayResult:
    """Rebuild the run from its log: scenario and config from the genesis
    record, commands from phase-1 records, provider outputs read back from
    RESPONSE/ABSTRACT records. State hashes must match at every snapshot."""
    records = list(records)
    verify_chain(records)
    if not records or records[0].kind != "SNAPSHOT" or not records[0].payload.get("genesis"):
        raise ReplayError("log has no genesis snapshot")
    genesis = records[0].payload
    world = build_world(genesis["scenario"])
    config = KernelConfig.from_dict(genesis["config"])
    seed = int(genesis["seed"])

    commands: dict[int, list[dict[str, Any]]] = {}
    responses: list[dict[str, Any]] = []
    abstracts: list[str] = []
    snapshots: dict[int, list[str]] = {}
    rest = records[1:]
    for record in rest:
        if record.kind in ("PARAM", "VERDICT"):
            commands.setdefault(record.tick, []).append(record.payload["command"])
        elif record.kind == "RESPONSE":
            responses.append(record.payload)
        elif record.kind == "ABSTRACT":
            abstracts.append(record.payload["event"]["content"])
        elif record.kind == "SNAPSHOT":
            snapshots.setdefault(record.tick, []).append(record.payload["state_hash"])

    ticks = max((r.tick for r in rest), default=-1) + 1
    kernel = Kernel(world, seed, config, PlaybackProvider(responses, abstracts))
    if kernel.log.records[0].payload["state_hash"] != genesis["state_hash"]:
        raise ReplayError("genesis state hash mismatch: scenario does not rebuild")
    for t in range(ticks):
        kernel.run_tick(commands.get(t, []), final_snapshot=(t == ticks - 1))
        for expected in snapshots.get(t, []):
            actual = kernel.state_hash()
            if actual != expected:
                raise ReplayError(
                    f"state hash mismatch at tick {t}: log {expected[:12]}…, "
                    f"replay {actual[:12]}…"
                )
    return ReplayResult(final_state_hash=kernel.state_hash(), ticks=ticks, kernel=kernel)


def value_injection_experiment(
    scenario: str | Path | dict[str, Any],
    beta_treat: float,
    ticks: int,
    seed: int,
    config: KernelConfig | None = None,
    value_name: str | None = None,
) -> dict[str, Any]:
    """Matched-pair runs: control at anchor gain 0, treatment at beta_treat.

    The designated value's action tag is counted in each agent's committed
    actions; efficacy is the relative lift of the treatment mean over the
    control mean.
    """
    if ticks < 1:
        raise WorldError("experiment needs at least one tick")
    if beta_treat < 0:
        raise WorldError(f"treatment beta must be >= 0, got {beta_treat}")
    base = config or KernelConfig()

    if isinstance(scenario, dict):
        doc = scenario
    else:
        path = Path(scenario)
        if not path.exists():
            raise ScenarioError(f"scenario file '{path}' does not exist")
        doc = json.loads(path.read_text(encoding="utf-8"))
    probe = build_world(doc)
    if not probe.values:
        raise WorldError("scenario declares no values; nothing to inject")
    if value_name is None:
        value = probe.values[0]
    else:
        matches = [v for v in probe.values if v.name == value_name]
        if not matches:
            raise WorldError(f"scenario declares no value named '{value_name}'")
        value = matches[0]

    def frequencies(beta: float) -> dict[str, float]:
        run_config = KernelConfig.from_dict(base.to_dict())
        run_config.beta = beta
        result = run_simulation(doc, ticks, seed, run_config)
        counts = {agent: 0 for agent in result.kernel.world.agents}
        for record in result.records:
            if record.kind == "COMMIT" and record.payload["tag"] == value.action:
                counts[record.payload["agent"]] += 1
        return {agent: counts[agent] / ticks for agent in sorted(counts)}

    control = frequencies(0.0)
    treatment = frequencies(beta_treat)
    if sorted(control) != sorted(treatment):
        raise WorldError("treatment and control populations do not match")
    mean_control = sum(control.values()) / len(control)
    mean_treatment = sum(treatment.values()) / len(treatment)
    if mean_control == 0.0:
        raise WorldError(
            f"control mean for action '{value.action}' is zero; efficacy undefined"
        )
    efficacy = (mean_treatment - mean_control) / mean_control
    return {
        "value": value.name,
        "action": value.action,
        "beta": beta_treat,
        "ticks": ticks,
        "seed": seed,
        "mean_treatment": mean_treatment,
        "mean_control": mean_control,
        "efficacy": efficacy,
    }
