from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[ACCEPTANCE] {name}: {report.outcome.upper()}")

from taxoforge import cli
from taxoforge.store import Store, load

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "fish"

ENCOUNTERS = FIXTURES / "encounters.jsonl"
CHARACTERISTICS = FIXTURES / "characteristics.json"
PLAN = FIXTURES / "plan.json"
LEXICON_EN = FIXTURES / "lexicon-en.csv"
LEXICON_IT = FIXTURES / "lexicon-it.csv"

# Node ids of the built fish fixture, by the entity they cover.
N_ROOT = "root"
N_FISH = "root/habitat_stratum=open_water"
N_AGNATHAN = "root/habitat_stratum=riverbed"
N_PLACODERM = "root/habitat_stratum=seabed"
N_SALMON = f"{N_FISH}/tail_shape=concave"
N_TROUT = f"{N_FISH}/tail_shape=convex"
N_CHINOOK = f"{N_SALMON}/parr_marks=absent"
N_BLUEBACK = f"{N_SALMON}/parr_marks=present"
N_RAINBOW = f"{N_TROUT}/parr_marks=present"
N_STEELHEAD = f"{N_TROUT}/parr_marks=absent"

ALL_NODES = {
    N_ROOT,
    N_FISH,
    N_AGNATHAN,
    N_PLACODERM,
    N_SALMON,
    N_TROUT,
    N_CHINOOK,
    N_BLUEBACK,
    N_RAINBOW,
    N_STEELHEAD,
}


def run_cli(args: list[str], expect_exit: int = 0) -> str:
    runner = CliRunner()
    result = runner.invoke(cli.main, args, catch_exceptions=False)
    assert result.exit_code == expect_exit, (
        f"forge {' '.join(args)} exited {result.exit_code}, expected {expect_exit}:\n{result.output}"
    )
    return result.output


def build_fixture_store(store_dir: Path, lexicalize: bool = True) -> Store:
    """Run the standard pipeline on the fish fixture into store_dir."""
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
    run_cli(["build", "--store", str(store_dir), "--plan", str(PLAN), "--purpose", "biology"])
    if lexicalize:
        run_cli(["lexicalize", "--store", str(store_dir), "--lang", "en", "--file", str(LEXICON_EN)])
        run_cli(["lexicalize", "--store", str(store_dir), "--lang", "it", "--file", str(LEXICON_IT)])
    return load(store_dir)


@pytest.fixture
def fish_store(tmp_path: Path) -> Store:
    return build_fixture_store(tmp_path / "store")


@pytest.fixture
def fish_store_dir(tmp_path: Path) -> Path:
    store_dir = tmp_path / "store"
    build_fixture_store(store_dir)
    return store_dir


def read_taxonomy_json(store_dir: Path) -> dict:
    return json.loads((store_dir / "taxonomy.json").read_text(encoding="utf-8"))


def write_taxonomy_json(store_dir: Path, doc: dict) -> None:
    store_dir.joinpath("taxonomy.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def seed_differentiation_store(store_dir: Path) -> None:
    """A store whose root split was (wrongly) made on a one-valued
    characteristic: audit reports a differentiation violation at the root
    with ready-to-post set-override fixes.

    Built by running the normal pipeline over the fish varieties only, then
    grafting a single-child has_gills layer between the root and its children,
    the way a careless manual edit would.
    """
    varieties = [
        line
        for line in ENCOUNTERS.read_text(encoding="utf-8").splitlines()
        if line.strip() and "placoderm" not in line and "agnathan" not in line
    ]
    store_dir.parent.mkdir(parents=True, exist_ok=True)
    enc_path = store_dir.parent / "varieties.jsonl"
    enc_path.write_text("\n".join(varieties) + "\n", encoding="utf-8")
    plan_path = store_dir.parent / "varieties-plan.json"
    plan_path.write_text(
        json.dumps(
            {
                "purposes": [
                    {
                        "purpose_id": "biology",
                        "relevance_tag": "biology",
                        "succession": ["tail_shape", "parr_marks"],
                    }
                ]
            }
        ),
        encoding="utf-8",
    )
    run_cli(
        [
            "ingest",
            "--store",
            str(store_dir),
            "--encounters",
            str(enc_path),
            "--characteristics",
            str(CHARACTERISTICS),
        ]
    )
    run_cli(["build", "--store", str(store_dir), "--plan", str(plan_path), "--purpose", "biology"])

    doc = read_taxonomy_json(store_dir)
    by_id = {n["node_id"]: n for n in doc["nodes"]}
    root = by_id["root"]
    gilled = dict(
        root,
        node_id="root/has_gills=present",
        parent="root",
        differentia={"characteristic": "has_gills", "value": "present"},
        rank=1,
        rank_label=None,
        children=list(root["children"]),
        split_characteristic="tail_shape",
    )
    for child_id in root["children"]:
        by_id[child_id]["parent"] = gilled["node_id"]
        stack = [child_id]
        while stack:
            node = by_id[stack.pop()]
            node["rank"] += 1
            stack.extend(node["children"])
    root["children"] = [gilled["node_id"]]
    root["split_characteristic"] = "has_gills"
    doc["nodes"] = sorted(by_id.values(), key=lambda n: n["node_id"]) + [gilled]
    write_taxonomy_json(store_dir, doc)


def hint_of(store: Store, sc_id: str) -> str | None:
    """Test-only oracle: recover the ground-truth entity of a leaf concept
    from the entity_hints of its member encounters."""
    sc = store.substance_concepts[sc_id]
    hints = set()
    for vo_id in sc.visual_objects:
        for frame_id in store.visual_objects[vo_id].frames:
            enc = store.encounters[store.frames[frame_id].encounter_id]
            if enc.entity_hint:
                hints.add(enc.entity_hint)
    if len(hints) == 1:
        return hints.pop()
    return None
