from __future__ import annotations

import pytest

from taxoforge.model import (
    Bucket,
    Characteristic,
    DecisionError,
    DecisionRecord,
    EncounterRecord,
    ForgeError,
    ValueDomain,
    canonical_json,
    obs_from_mapping,
    obs_to_mapping,
)


def test_categorical_bucketing_accepts_declared_tokens():
    c = Characteristic("tail_shape", ValueDomain("categorical", tokens=("concave", "convex")))
    assert c.bucket("concave") == "concave"
    with pytest.raises(ForgeError, match="tail_shape"):
        c.bucket("forked")


def test_numeric_bucketing_maps_ranges_to_labels():
    c = Characteristic(
        "body_length_cm",
        ValueDomain(
            "numeric",
            buckets=(Bucket("small", 0, 50), Bucket("large", 50, 200)),
        ),
    )
    assert c.bucket(0) == "small"
    assert c.bucket(49.9) == "small"
    assert c.bucket(50) == "large"
    assert c.bucket(200) == "large"  # last bucket closed on the right
    with pytest.raises(ForgeError):
        c.bucket(201)
    with pytest.raises(ForgeError):
        c.bucket("tall")


def test_value_domain_round_trip():
    dom = ValueDomain("numeric", buckets=(Bucket("small", 0, 50), Bucket("large", 50, 200)))
    assert ValueDomain.from_dict(dom.to_dict()) == dom
    cat = ValueDomain("categorical", tokens=("a", "b"))
    assert ValueDomain.from_dict(cat.to_dict()) == cat


def test_observation_mapping_round_trip():
    obs = obs_from_mapping({"b": "2", "a": "1"})
    assert obs_to_mapping(obs) == {"a": "1", "b": "2"}


def test_canonical_json_sorts_keys_and_ends_with_newline():
    text = canonical_json({"b": 1, "a": [2, 1]})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")


def test_decision_record_rejects_unknown_kind():
    with pytest.raises(DecisionError):
        DecisionRecord(decision_id="d-1", kind="delete-everything", payload={})


def test_encounter_record_round_trip_preserves_hint():
    rec = EncounterRecord.from_dict(
        {
            "encounter_id": "e1",
            "media_ref": "m1",
            "timestamp": 5,
            "observations": {"a": 1},
            "entity_hint": "thing",
        }
    )
    assert rec.to_dict()["entity_hint"] == "thing"
    assert EncounterRecord.from_dict(rec.to_dict()) == rec
