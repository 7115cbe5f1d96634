from __future__ import annotations

import json

import pytest

from socmatrix import (
    Kernel,
    KernelConfig,
    PluginManifest,
    ReplayError,
    StubProvider,
    WorldError,
    build_world,
    replay,
    run_simulation,
    value_injection_experiment,
)
from socmatrix.canonical import canonical_json
from socmatrix.eventlog import KIND_PHASES

from conftest import scenario_doc


def empty_doc():
    return scenario_doc(zones=[], layers=[], roles=[], agents=[], edges=[],
                        params=[], action_vocabulary=["noop"], values=[])


def escalation_doc(severity="escalate", agents=1):
    """Every tick every agent argmaxes the forbidden 'chat' tag."""
    return scenario_doc(
        zones=[{"id": "room", "name": "Room", "adjacent": []}],
        layers=[
            {
                "id": "lure",
                "name": "Lure",
                "priority": 5,
                "when": {},
                "directive": "Gossip is irresistible.",
                "biases": {"chat": 10.0},
                "forbid": [],
                "scales_with": {},
            },
            {
                "id": "motto",
                "name": "Motto",
                "priority": 1,
                "when": {},
                "directive": "Integrity.",
                "biases": {},
                "forbid": [{"tag": "chat", "severity": severity}],
                "scales_with": {},
            },
        ],
        roles=[{
            "id": "pupil", "title": "Pupil", "tier": "student", "anchor": "a0",
            "value_bias": {}, "persona": ["keen"], "value_weights": {},
        }],
        agents=[{"id": f"a{i}", "role": "pupil", "zone": "room"} for i in range(agents)],
        edges=[],
        params=[],
    )


def two_agent_doc():
    doc = scenario_doc()
    doc["params"] = [{"name": "mobility", "min": 0.0, "max": 1.0, "value": 0.0}]
    return doc


class TestRunTick:
    def test_empty_world_emits_only_metrics(self):
        kernel = Kernel(build_world(empty_doc()), seed=1)
        records = kernel.run_tick([])
        assert [r.kind for r in records] == ["METRICS"]
        assert records[0].payload["metrics"]["sync"] == 1.0

    def test_two_agent_fixture_matches_hand_walkthrough(self):
        # Hand-executed phase walkthrough: both stacks change (INJECT a, b),
        # cognition fans out in agent-id order (REQUEST/RESPONSE a then b),
        # both actions pass (COMMIT a, b), metrics close the tick.
        kernel = Kernel(build_world(two_agent_doc()), seed=3)
        records = kernel.run_tick([])
        assert [(r.kind, r.payload.get("agent")) for r in records] == [
            ("INJECT", "a"), ("INJECT", "b"),
            ("REQUEST", "a"), ("RESPONSE", "a"),
            ("REQUEST", "b"), ("RESPONSE", "b"),
            ("COMMIT", "a"), ("COMMIT", "b"),
            ("METRICS", None),
        ]
        assert [r.payload["phase"] for r in records] == [3, 3, 5, 5, 5, 5, 7, 7, 9]

    def test_same_inputs_same_chain_hash(self):
        first = Kernel(build_world(two_agent_doc()), seed=3)
        second = Kernel(build_world(two_agent_doc()), seed=3)
        r1 = first.run_tick([])
        r2 = second.run_tick([])
        assert r1[-1].chain == r2[-1].chain

    def test_unknown_command_kind_aborts_before_any_mutation(self):
        kernel = Kernel(build_world(two_agent_doc()), seed=3)
        head = kernel.log.head_seq
        with pytest.raises(WorldError, match="unknown command kind"):
            kernel.run_tick([
                {"kind": "param", "name": "mobility", "value": 1.0},
                {"kind": "meteor"},
            ])
        # Aborted tick: no records, no state change, not even the valid command.
        assert kernel.log.head_seq == head
        assert kernel.tick == 0
        assert kernel.world.params["mobility"].value == 0.0


class TestCommands:
    def test_param_patch_applied_at_phase_one(self):
        kernel = Kernel(build_world(two_agent_doc()), seed=3)
        records = kernel.run_tick([{"kind": "param", "name": "mobility", "value": 1.0}])
        param = [r for r in records if r.kind == "PARAM"][0]
        assert param.payload["outcome"] == "applied"
        assert kernel.world.params["mobility"].value == 1.0
        # With mobility 1.0 applied at the start of this tick, both agents move.
        assert sum(1 for r in records if r.kind == "MOVE") == 2

    def test_param_change_reinjects_scaled_stacks_same_tick(self):
        doc = scenario_doc(
            layers=[{
                "id": "push", "name": "Push", "priority": 5, "when": {},
                "directive": "Go.", "biases": {"study": 1.0}, "forbid": [],
                "scales_with": {"pressure": 1.0},
            }],
            params=[
                {"name": "pressure", "min": 0.0, "max": 5.0, "value": 1.0},
                {"name": "mobility", "min": 0.0, "max": 1.0, "value": 0.0},
            ],
        )
        kernel = Kernel(build_world(doc), seed=3)
        kernel.run_tick([])
        records = kernel.run_tick([{"kind": "param", "name": "pressure", "value": 2.0}])
        injects = [r for r in records if r.kind == "INJECT"]
        assert len(injects) == 2  # both agents re-injected with the new scale
        for record in injects:
            assert record.payload["stack"]["bias"]["study"] == 2.0
            assert record.payload["stack"]["layers"][0]["scale"] == 2.0

    def test_invalid_param_patch_logged_rejected(self):
        kernel = Kernel(build_world(two_agent_doc()), seed=3)
        records = kernel.run_tick([{"kind": "param", "name": "mobility", "value": 7.0}])
        param = [r for r in records if r.kind == "PARAM"][0]
        assert param.payload["outcome"] == "rejected"
        assert "outside domain" in param.payload["reason"]


class TestHandshakeLifecycle:
    def run_escalation(self, verdict=None, ticks=5, severity="escalate"):
        kernel = Kernel(build_world(escalation_doc(severity)), seed=2)
        all_records = []
        for t in range(ticks):
            commands = []
            if verdict is not None and t == 1:
                commands = [{"kind": "verdict", "conflict_id": 1, **verdict}]
            all_records.extend(kernel.run_tick(commands))
        return kernel, all_records

    def commits(self, records):
        return [(r.tick, r.payload["tag"], r.payload["basis"])
                for r in records if r.kind == "COMMIT"]

    def test_escalation_blocks_agent_with_noop(self):
        kernel, records = self.run_escalation(ticks=2)
        assert [r.payload["event"] for r in records if r.kind == "CONFLICT"] == ["escalated"]
        assert self.commits(records) == [(0, "noop", "blocked"), (1, "noop", "blocked")]

    def test_approval_commits_original_action_next_phase(self):
        kernel, records = self.run_escalation({"verdict": "approve", "arbiter": "ed"})
        assert self.commits(records)[1] == (1, "chat", "approved")
        verdict = [r for r in records if r.kind == "VERDICT"][0]
        assert verdict.payload["outcome"] == "applied"
        assert verdict.payload["conflict"]["verdict_by"] == "ed"
        # Unblocked: next tick the agent escalates again (same lure).
        assert self.commits(records)[2] == (2, "noop", "blocked")

    def test_amendment_replaces_utterance_keeps_original_in_record(self):
        kernel, records = self.run_escalation(
            {"verdict": "amend", "content": "let us chat after class", "arbiter": "ed"}
        )
        commit = [r for r in records if r.kind == "COMMIT" and r.tick == 1][0]
        assert commit.payload["basis"] == "amended"
        assert commit.payload["utterance"] == "let us chat after class"
        conflict = kernel.book.get(1)
        assert conflict.action.utterance != "let us chat after class"

    def test_denial_is_noop(self):
        _, records = self.run_escalation({"verdict": "deny", "arbiter": "ed"})
        assert self.commits(records)[1] == (1, "noop", "denied")

    def test_silence_expires_at_deadline_and_agent_resumes(self):
        kernel, records = self.run_escalation(verdict=None, ticks=5)
        events = [(r.tick, r.payload["event"]) for r in records if r.kind == "CONFLICT"]
        # Escalated at 0 (deadline 3), expired at 3, re-escalated at 4.
        assert events == [(0, "escalated"), (3, "expired"), (4, "escalated")]
        assert self.commits(records) == [
            (0, "noop", "blocked"), (1, "noop", "blocked"), (2, "noop", "blocked"),
            (3, "noop", "expired"), (4, "noop", "blocked"),
        ]

    def test_auto_reject_never_creates_conflict(self):
        kernel, records = self.run_escalation(ticks=2, severity="auto_reject")
        assert [r.payload["event"] for r in records if r.kind == "CONFLICT"] == [
            "auto_rejected", "auto_rejected",
        ]
        assert kernel.book.conflicts == {}
        assert self.commits(records) == [
            (0, "noop", "auto_rejected"), (1, "noop", "auto_rejected"),
        ]

    def test_second_verdict_rejected_first_wins(self):
        kernel = Kernel(build_world(escalation_doc()), seed=2)
        kernel.run_tick([])
        records = kernel.run_tick([
            {"kind": "verdict", "conflict_id": 1, "verdict": "deny", "arbiter": "e1"},
            {"kind": "verdict", "conflict_id": 1, "verdict": "approve", "arbiter": "e2"},
        ])
        outcomes = [r.payload["outcome"] for r in records if r.kind == "VERDICT"]
        assert outcomes == ["applied", "rejected"]
        assert kernel.book.get(1).status == "denied"


class TestRunAndReplay:
    def test_zero_ticks_genesis_only(self, campus_path):
        result = run_simulation(campus_path, 0, seed=7)
        assert len(result.records) == 1
        assert result.records[0].kind == "SNAPSHOT"
        assert result.records[0].payload["genesis"] is True

    def test_double_run_byte_identical(self, campus_path):
        a = run_simulation(campus_path, 40, seed=7)
        b = run_simulation(campus_path, 40, seed=7)
        assert canonical_json([r.to_dict() for r in a.records]) == canonical_json(
            [r.to_dict() for r in b.records]
        )
        assert a.final_state_hash == b.final_state_hash

    def test_different_seed_diverges(self, campus_path):
        a = run_simulation(campus_path, 30, seed=7)
        b = run_simulation(campus_path, 30, seed=8)
        assert a.final_state_hash != b.final_state_hash

    def test_replay_matches_with_commands(self):
        kernel = Kernel(build_world(escalation_doc()), seed=2)
        kernel.run_tick([])
        kernel.run_tick([{"kind": "verdict", "conflict_id": 1, "verdict": "approve",
                          "arbiter": "ed"}])
        kernel.run_tick([], final_snapshot=True)
        result = replay(kernel.log.records)
        assert result.final_state_hash == kernel.state_hash()
        assert result.ticks == 3

    def test_replay_detects_tampered_snapshot_hash(self, campus_path, tmp_path):
        run = run_simulation(campus_path, 10, seed=7)
        records = run.kernel.log.records
        # Rebuild a log whose chain is valid but whose snapshot hash lies.
        from socmatrix.eventlog import EventLog

        forged = EventLog()
        for record in records:
            payload = json.loads(canonical_json(record.payload))
            if record.kind == "SNAPSHOT" and not payload.get("genesis"):
                payload["state_hash"] = "0" * 64
            forged.append(record.tick, record.kind, payload)
        with pytest.raises(ReplayError, match="state hash mismatch"):
            replay(forged.records)

    def test_replay_requires_genesis(self):
        from socmatrix.eventlog import EventLog

        log = EventLog()
        log.append(0, "METRICS", {"phase": 9})
        with pytest.raises(ReplayError, match="genesis"):
            replay(log.records)

    def test_phase_isolation_every_kind_in_owning_phase(self, campus_path):
        result = run_simulation(campus_path, 120, seed=7)
        for record in result.records:
            assert record.payload["phase"] in KIND_PHASES[record.kind], record.kind

    def test_metrics_bounds_every_tick(self, campus_path):
        result = run_simulation(campus_path, 120, seed=7)
        for record in result.records:
            if record.kind == "METRICS":
                metric = record.payload["metrics"]
                for key in ("clustering", "sync", "consistency"):
                    assert 0.0 <= metric[key] <= 1.0


class TestScaleAndEconomy:
    def test_cognition_requests_bounded_by_tier_economy(self, campus_path):
        result = run_simulation(campus_path, 60, seed=7)
        world = result.kernel.world
        bound = len(world.agents) + len(world.zones) + 1
        per_tick: dict[int, int] = {}
        for record in result.records:
            if record.kind == "REQUEST":
                per_tick[record.tick] = per_tick.get(record.tick, 0) + 1
        assert per_tick and all(count <= bound for count in per_tick.values())

    def test_one_shared_digest_per_zone_per_tick(self):
        doc = scenario_doc(
            zones=[{"id": "room", "name": "Room", "adjacent": []}],
            roles=[{"id": "pupil", "title": "Pupil", "tier": "student", "anchor": "a0",
                    "value_bias": {}, "persona": ["keen"], "value_weights": {}}],
            agents=[{"id": f"a{i}", "role": "pupil", "zone": "room"} for i in range(5)],
            edges=[],
            layers=[],
            params=[],
        )
        kernel = Kernel(build_world(doc), seed=4)
        kernel.run_tick([])
        records = kernel.run_tick([])
        digests = {
            r.payload["request"]["digest"] for r in records if r.kind == "REQUEST"
        }
        assert len(digests) == 1  # five agents, one zone, one digest

    def test_fifty_agents_two_hundred_ticks_invariants_hold(self):
        rng_names = [f"a{i:02d}" for i in range(50)]
        doc = scenario_doc(
            zones=[
                {"id": "north", "name": "N", "adjacent": ["south"]},
                {"id": "south", "name": "S", "adjacent": ["north"]},
            ],
            roles=[{"id": "pupil", "title": "Pupil", "tier": "student", "anchor": "a00",
                    "value_bias": {"study": 0.2}, "persona": ["keen"],
                    "value_weights": {}}],
            agents=[
                {"id": name, "role": "pupil", "zone": "north" if i % 2 else "south"}
                for i, name in enumerate(rng_names)
            ],
            edges=[
                {"a": rng_names[i], "b": rng_names[(i + 1) % 50], "w": 0.8}
                for i in range(50)
            ],
            layers=[
                {
                    "id": "quiet", "name": "Quiet", "priority": 5,
                    "when": {"zones": ["north"]}, "directive": "Hush.",
                    "biases": {"study": 1.0}, "forbid": [], "scales_with": {},
                },
                {
                    "id": "motto", "name": "Motto", "priority": 1, "when": {},
                    "directive": "Be kind.", "biases": {},
                    "forbid": [{"tag": "chat", "severity": "escalate"}],
                    "scales_with": {},
                },
            ],
            params=[{"name": "mobility", "min": 0.0, "max": 1.0, "value": 0.3}],
        )
        result = run_simulation(doc, 200, seed=13)
        reports = [r.payload["metrics"] for r in result.records if r.kind == "METRICS"]
        assert len(reports) == 200
        for report in reports:
            assert report["sync"] == 1.0
            assert 0.0 <= report["clustering"] <= 1.0
            assert 0.0 <= report["consistency"] <= 1.0
        for record in result.records:
            assert record.payload["phase"] in KIND_PHASES[record.kind]
        assert replay(result.records).final_state_hash == result.final_state_hash


class TestProviderContract:
    def test_invalid_live_provider_falls_back_and_run_replays(self):
        class Flaky:
            def __init__(self):
                self.calls = 0

            def propose(self, request):
                self.calls += 1
                raise RuntimeError("model offline")

            def abstract_text(self, agent_id, chunk):
                return "live abstract"

            def fuse_text(self, a, b):
                return ("t", "p")

        world = build_world(two_agent_doc())
        kernel = Kernel(world, seed=3, provider=Flaky())
        kernel.run_tick([])
        kernel.run_tick([], final_snapshot=True)
        commits = [r for r in kernel.log.records if r.kind == "COMMIT"]
        assert len(commits) == 4  # fallback answered for both agents, both ticks
        result = replay(kernel.log.records)
        assert result.final_state_hash == kernel.state_hash()

    def test_live_provider_run_replays_from_recorded_responses(self):
        from socmatrix import CognitionResponse

        class OpinionatedModel:
            """Valid responses that a stub would never produce."""

            def propose(self, request):
                chosen = request.vocabulary[-1]
                share = 1.0 / len(request.vocabulary)
                return CognitionResponse(
                    chosen_tag=chosen,
                    distribution=tuple((t, share) for t in request.vocabulary),
                    utterance=f"the model insists on {chosen}",
                    utterance_tags=("modelled",),
                )

            def abstract_text(self, agent_id, chunk):
                return f"model summary for {agent_id}"

            def fuse_text(self, a, b):
                return ("t", "p")

        live = Kernel(build_world(two_agent_doc()), seed=3, provider=OpinionatedModel())
        for t in range(3):
            live.run_tick([], final_snapshot=(t == 2))
        stub = Kernel(build_world(two_agent_doc()), seed=3)
        for t in range(3):
            stub.run_tick([], final_snapshot=(t == 2))
        assert live.state_hash() != stub.state_hash()  # genuinely diverged
        result = replay(live.log.records)
        assert result.final_state_hash == live.state_hash()


class TestSampleMode:
    def test_sampled_runs_are_seeded_and_replayable(self, campus_path):
        config = KernelConfig(decision="sample", temperature=0.7)
        first = run_simulation(campus_path, 25, seed=9, config=config)
        second = run_simulation(campus_path, 25, seed=9, config=config)
        assert first.final_state_hash == second.final_state_hash
        other_seed = run_simulation(campus_path, 25, seed=10, config=config)
        assert other_seed.final_state_hash != first.final_state_hash
        assert replay(first.records).final_state_hash == first.final_state_hash


class TestValueExperiment:
    def test_beta_zero_gives_exactly_zero(self, value_lab_path):
        result = value_injection_experiment(value_lab_path, 0.0, ticks=40, seed=5)
        assert result["efficacy"] == 0.0

    def test_beta_two_positive(self, value_lab_path):
        result = value_injection_experiment(value_lab_path, 2.0, ticks=40, seed=5)
        assert result["efficacy"] > 0.0
        assert result["mean_treatment"] > result["mean_control"]

    def test_unknown_value_name(self, value_lab_path):
        with pytest.raises(WorldError, match="no value named"):
            value_injection_experiment(value_lab_path, 1.0, 10, 5, value_name="bravery")

    def test_scenario_without_values_rejected(self):
        with pytest.raises(WorldError, match="no values"):
            value_injection_experiment(two_agent_doc(), 1.0, 10, 5)

    def test_zero_control_mean_is_error(self, value_lab_path):
        doc = json.loads(value_lab_path.read_text(encoding="utf-8"))
        # An unreachable action: nothing ever biases toward it and logits
        # cannot rescue it once 'suppress' drowns everything else.
        doc["action_vocabulary"] = ["chat", "contribute", "noop", "unseen"]
        doc["values"] = [{"name": "phantom", "action": "unseen"}]
        doc["roles"][0]["value_weights"] = {}
        doc["layers"][0]["biases"] = {"chat": 99.0}
        with pytest.raises(WorldError, match="control mean"):
            value_injection_experiment(doc, 1.0, ticks=10, seed=5)


class TestPluginsInKernel:
    def test_plugin_observes_ticks_within_capability(self, campus_path):
        from socmatrix import load_scenario

        kernel = Kernel(load_scenario(campus_path), seed=7)
        seen = []

        def on_tick(ctx, tick):
            seen.append((tick, len(ctx.topology()["nodes"])))
            ctx.storage_put("watch/count", len(seen))

        kernel.register_plugin(PluginManifest("watch", ("read_topology",)),
                               {"on_tick": on_tick})
        kernel.run_tick([])
        kernel.run_tick([])
        assert seen == [(0, 8), (1, 8)]
        assert kernel.plugin_host.storage["watch"]["watch/count"] == 2
