from __future__ import annotations

import pytest

from socmatrix import ScenarioError, WorldError, build_world, load_scenario, place_agent, set_live_param
from socmatrix.canonical import canonical_json

from conftest import scenario_doc


class TestLoadScenario:
    def test_minimal_scenario_has_empty_stacks(self, minimal_path):
        world = load_scenario(minimal_path)
        assert len(world.zones) == 1
        assert len(world.layers) == 0
        assert len(world.agents) == 1
        assert all(a.stack is None for a in world.agents_sorted())

    def test_campus_small_counts_match_file(self, campus_doc, campus_world):
        # Counted by hand in the fixture file.
        assert len(campus_world.zones) == 4 == len(campus_doc["zones"])
        assert len(campus_world.layers) == 6 == len(campus_doc["layers"])
        assert len(campus_world.agents) == 8 == len(campus_doc["agents"])
        assert len(campus_world.graph.edges()) == len(campus_doc["edges"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="does not exist"):
            load_scenario(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        with pytest.raises(ScenarioError, match="not valid JSON"):
            load_scenario(bad)

    def test_dangling_zone_in_layer_condition_named(self):
        doc = scenario_doc()
        doc["layers"][0]["when"] = {"zones": ["ghost"]}
        with pytest.raises(ScenarioError, match="ghost"):
            build_world(doc)

    def test_unknown_role_named(self):
        doc = scenario_doc()
        doc["agents"][0]["role"] = "phantom"
        with pytest.raises(ScenarioError, match="phantom"):
            build_world(doc)

    def test_asymmetric_adjacency_rejected(self):
        doc = scenario_doc()
        doc["zones"][1]["adjacent"] = []
        with pytest.raises(ScenarioError, match="asymmetric"):
            build_world(doc)

    def test_unknown_top_level_key_rejected(self):
        doc = scenario_doc()
        doc["extras"] = {}
        with pytest.raises(ScenarioError, match="extras"):
            build_world(doc)

    def test_unknown_entity_key_rejected(self):
        doc = scenario_doc()
        doc["zones"][0]["color"] = "blue"
        with pytest.raises(ScenarioError, match="color"):
            build_world(doc)

    def test_out_of_domain_param_rejected(self):
        doc = scenario_doc(params=[{"name": "p", "min": 0.0, "max": 1.0, "value": 2.0}])
        with pytest.raises(ScenarioError, match="'p'"):
            build_world(doc)

    def test_vocabulary_requires_fallback_tag(self):
        doc = scenario_doc(action_vocabulary=["study"])
        with pytest.raises(ScenarioError, match="noop"):
            build_world(doc)

    def test_bias_on_unknown_tag_rejected(self):
        doc = scenario_doc()
        doc["layers"][0]["biases"] = {"juggle": 1.0}
        with pytest.raises(ScenarioError, match="juggle"):
            build_world(doc)

    def test_duplicate_ids_rejected(self):
        doc = scenario_doc()
        doc["agents"].append({"id": "a", "role": "pupil", "zone": "east"})
        with pytest.raises(ScenarioError, match="duplicate id 'a'"):
            build_world(doc)

    def test_edge_weight_domain(self):
        doc = scenario_doc(edges=[{"a": "a", "b": "b", "w": 1.5}])
        with pytest.raises(ScenarioError, match="weight"):
            build_world(doc)

    def test_zone_layer_index_derived_in_stack_order(self, campus_world):
        library = campus_world.zone("library")
        assert library.layer_ids == ("silence", "academic_focus")
        classroom = campus_world.zone("classroom")
        assert classroom.layer_ids == ("exam_lockdown", "academic_focus")


class TestCanonicalSerialization:
    def test_state_dict_serializes_identically_twice(self, campus_world):
        first = canonical_json(campus_world.to_state_dict())
        second = canonical_json(campus_world.to_state_dict())
        assert first == second

    def test_same_doc_same_bytes(self, campus_doc):
        a = canonical_json(build_world(campus_doc).to_state_dict())
        b = canonical_json(build_world(campus_doc).to_state_dict())
        assert a == b


class TestPlaceAgent:
    def test_adjacent_move_updates_coordinate_and_marks_stale(self):
        world = build_world(scenario_doc())
        result = place_agent(world, "a", "west", tick=3)
        agent = world.agent("a")
        assert result.moved and result.record == {
            "agent": "a", "from": "east", "to": "west", "tick": 3,
        }
        assert agent.zone_id == "west" and agent.tick == 3 and agent.stack_stale

    def test_non_adjacent_move_rejected_without_teleport(self):
        doc = scenario_doc()
        doc["zones"].append({"id": "far", "name": "Far", "adjacent": []})
        world = build_world(doc)
        with pytest.raises(WorldError, match="not adjacent"):
            place_agent(world, "a", "far", tick=1)
        assert place_agent(world, "a", "far", tick=1, teleport=True).moved

    def test_move_to_current_zone_is_silent_noop(self):
        world = build_world(scenario_doc())
        result = place_agent(world, "a", "east", tick=1)
        assert not result.moved and result.record is None

    def test_unknown_ids(self):
        world = build_world(scenario_doc())
        with pytest.raises(WorldError, match="unknown agent"):
            place_agent(world, "zz", "west", tick=0)
        with pytest.raises(WorldError, match="unknown zone"):
            place_agent(world, "a", "zz", tick=0)


class TestLiveParams:
    def test_set_within_domain(self):
        world = build_world(scenario_doc())
        record = set_live_param(world, "pressure", 2.0)
        assert record == {"name": "pressure", "from": 1.0, "to": 2.0}
        assert world.params["pressure"].value == 2.0

    def test_unknown_name(self):
        world = build_world(scenario_doc())
        with pytest.raises(WorldError, match="unknown live param 'x'"):
            set_live_param(world, "x", 1.0)

    def test_out_of_domain_value(self):
        world = build_world(scenario_doc())
        with pytest.raises(WorldError, match="outside domain"):
            set_live_param(world, "pressure", -1.0)
