from __future__ import annotations

import copy
import json
from pathlib import Path

import pytest

from socmatrix import build_world

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

CAMPUS = SCENARIO_DIR / "campus-small.json"
MINIMAL = SCENARIO_DIR / "minimal.json"
VALUE_LAB = SCENARIO_DIR / "value-lab.json"


def scenario_doc(**overrides) -> dict:
    """A small valid scenario document, field-overridable per test."""
    doc = {
        "zones": [
            {"id": "east", "name": "East", "adjacent": ["west"]},
            {"id": "west", "name": "West", "adjacent": ["east"]},
        ],
        "layers": [
            {
                "id": "quiet",
                "name": "Quiet",
                "priority": 5,
                "when": {"zones": ["east"]},
                "directive": "Quiet please.",
                "biases": {"study": 1.0},
                "forbid": [],
                "scales_with": {},
            }
        ],
        "roles": [
            {
                "id": "pupil",
                "title": "Pupil",
                "tier": "student",
                "anchor": "a",
                "value_bias": {"study": 0.2},
                "persona": ["keen"],
                "value_weights": {},
            }
        ],
        "agents": [
            {"id": "a", "role": "pupil", "zone": "east"},
            {"id": "b", "role": "pupil", "zone": "west"},
        ],
        "edges": [{"a": "a", "b": "b", "w": 0.8}],
        "params": [{"name": "pressure", "min": 0.0, "max": 5.0, "value": 1.0}],
        "action_vocabulary": ["chat", "noop", "study"],
        "values": [],
    }
    doc.update(copy.deepcopy(overrides))
    return doc


@pytest.fixture
def campus_doc() -> dict:
    return json.loads(CAMPUS.read_text(encoding="utf-8"))


@pytest.fixture
def campus_world(campus_doc):
    return build_world(campus_doc)


@pytest.fixture
def campus_path() -> Path:
    return CAMPUS


@pytest.fixture
def minimal_path() -> Path:
    return MINIMAL


@pytest.fixture
def value_lab_path() -> Path:
    return VALUE_LAB
