from __future__ import annotations

import json
from pathlib import Path

from wsnguard_core.adversary.behaviors import AttackerConfig
from wsnguard_core.config import Scenario, load_scenario, scenario_json_schema
from wsnguard_core.schemas import AttackerKind, json_schema_for, validate_json

ROOT = Path(__file__).resolve().parents[1]
FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"


def test_example_scenario_loads() -> None:
    scenario = load_scenario(ROOT / "config" / "scenario.example.json")

    assert scenario.topology.mote_ids() == list(range(25))
    assert [attacker.behavior for attacker in scenario.attackers] == [AttackerKind.SPOOF]
    assert scenario.detection.enabled


def test_scenario_json_roundtrip_from_fixture() -> None:
    raw = (FIXTURE_DIR / "scenario.spoof_line.json").read_text(encoding="utf-8")
    scenario = validate_json(Scenario, raw)

    restored = Scenario.model_validate_json(scenario.model_dump_json())
    assert restored == scenario


def test_json_schema_utility() -> None:
    schema = json_schema_for(AttackerConfig)

    assert schema["title"] == "AttackerConfig"
    assert "behavior" in schema["properties"]
    assert "p" in schema["properties"]


def test_generated_schema_declares_draft_2020_12() -> None:
    schema = scenario_json_schema()

    assert schema["$schema"] == "https://json-schema.org/draft/2020-12/schema"
    assert set(schema["properties"]) == set(Scenario.model_fields)


def test_published_schema_matches_the_model() -> None:
    published = json.loads((ROOT / "schemas" / "scenario.schema.json").read_text(encoding="utf-8"))

    assert set(published["properties"]) == set(Scenario.model_fields)
    assert published["additionalProperties"] is False
    attacker = published["$defs"]["AttackerConfig"]
    assert set(attacker["properties"]) == set(AttackerConfig.model_fields)
