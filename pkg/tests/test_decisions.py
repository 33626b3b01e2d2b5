"""Decision engine: the single write path and its failure modes."""

from __future__ import annotations

import json

import pytest

from conftest import (
    CHARACTERISTICS,
    ENCOUNTERS,
    N_FISH,
    N_SALMON,
    PLAN,
    build_fixture_store,
    run_cli,
)
from taxoforge.audit import audit_all
from taxoforge.decisions import apply_decision, record_and_apply
from taxoforge.model import DecisionError, DecisionRecord, ForgeError
from taxoforge.store import export_doc, load


def test_cli_decisions_carry_deterministic_timestamps(fish_store):
    stamps = [d.timestamp for d in fish_store.decisions]
    assert stamps == list(range(len(stamps)))


def test_set_succession_rejects_gate_failing_characteristic(fish_store):
    with pytest.raises(ForgeError, match="ascertainability"):
        record_and_apply(
            fish_store,
            "set-succession",
            {
                "purpose_id": "biology",
                "relevance_tag": "biology",
                "succession": ["pyloric_caeca", "tail_shape"],
            },
        )


def test_set_succession_without_order_uses_default_and_warns(fish_store):
    record_and_apply(
        fish_store,
        "set-succession",
        {"purpose_id": "biology", "relevance_tag": "biology", "succession": []},
    )
    plan = fish_store.taxonomy.plan
    assert not plan.curated
    # Default order: descending partition count, name-ascending ties.
    assert plan.characteristics[0] in ("body_plan", "habitat_stratum")
    report = audit_all(fish_store)
    assert any(v.canon == "relevant-succession" for v in report.violations)
    assert report.errors == 0


def test_set_succession_rejects_duplicate_characteristics(fish_store):
    with pytest.raises(ForgeError, match="repeats"):
        record_and_apply(
            fish_store,
            "set-succession",
            {
                "purpose_id": "biology",
                "relevance_tag": "biology",
                "succession": ["tail_shape", "tail_shape"],
            },
        )


def test_resolve_violation_requires_known_fix(fish_store):
    with pytest.raises(DecisionError, match="unknown resolve-violation fix"):
        record_and_apply(fish_store, "resolve-violation", {"fix": "wish-harder"})


def test_set_override_requires_existing_plan(tmp_path):
    store_dir = tmp_path / "store"
    run_cli(
        [
            "ingest",
            "--store",
            str(store_dir),
            "--encounters",
            str(ENCOUNTERS),
            "--characteristics",
            str(CHARACTERISTICS),
        ]
    )
    store = load(store_dir)
    with pytest.raises(DecisionError, match="no plan"):
        record_and_apply(
            store,
            "resolve-violation",
            {"fix": "set-override", "node_id": "root", "characteristic": "tail_shape"},
        )


def test_approve_merge_payload_is_validated(fish_store):
    with pytest.raises(DecisionError, match="percept_id"):
        record_and_apply(fish_store, "approve-merge", {"target": "sc-chinook-01"})


def test_failed_decision_appends_nothing(fish_store):
    log_before = list(fish_store.decisions)
    with pytest.raises(ForgeError):
        record_and_apply(fish_store, "confirm-mapping", {"sc_id": "ghost", "concept_id": 1})
    assert fish_store.decisions == log_before


def test_assign_label_decision_round_trip(fish_store):
    record = record_and_apply(
        fish_store,
        "assign-label",
        {"node_id": N_FISH, "language": "de", "lemmas": ["Fisch"], "gloss": ""},
    )
    assert fish_store.lexicons["de"].entries[N_FISH].preferred == "Fisch"
    assert record.decision_id in {d.decision_id for d in fish_store.decisions}


def test_insert_node_decision_mints_and_keeps_store_clean(fish_store):
    from taxoforge.percepts import ingest_session
    from test_percepts import enc

    ingest_session(
        fish_store,
        [enc("pink-01", habitat_stratum="open_water", body_plan="finned",
             tail_shape="concave", parr_marks="faint", has_gills="present")],
    )
    record_and_apply(
        fish_store,
        "resolve-violation",
        {
            "fix": "insert-node",
            "parent": N_SALMON,
            "differentia": {"characteristic": "parr_marks", "value": "faint"},
            "sc_ref": "sc-pink-01",
        },
    )
    assert audit_all(fish_store).errors == 0
    assert f"{N_SALMON}/parr_marks=faint" in fish_store.taxonomy.nodes


def test_replaying_foreign_record_preserves_it_verbatim(fish_store):
    record = DecisionRecord(
        decision_id="d-curator-7",
        kind="assign-label",
        payload={"node_id": N_FISH, "language": "fr", "lemmas": ["poisson"]},
        author="marie",
        timestamp=1723000000000,
    )
    apply_decision(fish_store, record)
    stored = fish_store.decisions[-1]
    assert stored == record


def test_engine_never_reads_entity_hints(tmp_path):
    """Stripping every entity_hint must not change any derived state."""
    with_hints = tmp_path / "hints"
    build_fixture_store(with_hints)

    stripped_encounters = tmp_path / "stripped.jsonl"
    lines = []
    for line in ENCOUNTERS.read_text(encoding="utf-8").splitlines():
        if line.strip():
            doc = json.loads(line)
            doc.pop("entity_hint", None)
            lines.append(json.dumps(doc, sort_keys=True))
    stripped_encounters.write_text("\n".join(lines) + "\n", encoding="utf-8")

    without_hints = tmp_path / "nohints"
    run_cli(
        [
            "ingest",
            "--store",
            str(without_hints),
            "--encounters",
            str(stripped_encounters),
            "--characteristics",
            str(CHARACTERISTICS),
        ]
    )
    run_cli(["build", "--store", str(without_hints), "--plan", str(PLAN), "--purpose", "biology"])

    a = export_doc(load(with_hints))
    b = export_doc(load(without_hints))
    for section in ("mass", "taxonomy", "concepts"):
        assert a[section] == b[section]
