"""Idea plane: gating, succession, recursive build, and the hierarchy canons."""

from __future__ import annotations

from dataclasses import replace

import pytest

from conftest import (
    N_BLUEBACK,
    N_CHINOOK,
    N_FISH,
    N_RAINBOW,
    N_ROOT,
    N_SALMON,
    N_STEELHEAD,
    N_TROUT,
    ALL_NODES,
    hint_of,
)
from taxoforge.audit import audit_all
from taxoforge.hierarchy import (
    audit_idea_plane,
    build_hierarchy,
    check_chain_extension,
    check_differentiation,
    check_exhaustiveness,
    check_modulation,
    gate_characteristic,
    order_characteristics,
    partition_count,
)
from taxoforge.model import (
    BuildPurpose,
    Characteristic,
    DecisionRecord,
    ForgeError,
    SubstanceConcept,
    SuccessionPlan,
    ValueDomain,
)
from taxoforge.percepts import ingest_session
from taxoforge.store import Store
from test_percepts import enc, make_store

BIOLOGY = BuildPurpose(purpose_id="biology", relevance_tag="biology")


def sc(sc_id: str, **pairs: str) -> SubstanceConcept:
    """Bare concept for canon-check unit tests (no backing frames needed)."""
    return SubstanceConcept(
        sc_id=sc_id,
        visual_objects=frozenset({f"vo-{sc_id}"}),
        intension=frozenset(pairs.items()),
        extension=frozenset({f"media/{sc_id}.jpg"}),
    )


def char(name: str, tokens: tuple[str, ...] = ("a", "b"), **flags) -> Characteristic:
    return Characteristic(
        name=name,
        value_domain=ValueDomain("categorical", tokens=tokens),
        ascertainable=flags.get("ascertainable", True),
        permanent=flags.get("permanent", True),
        relevance_tags=frozenset(flags.get("relevance_tags", {"biology"})),
    )


# -- gating -----------------------------------------------------------------


def test_gate_rejects_gills_that_differentiate_nothing():
    # Salmon and trout both show gills: one class only, no differentiation.
    salmon = sc("salmon", has_gills="present", tail_shape="concave")
    trout = sc("trout", has_gills="present", tail_shape="convex")
    gills = char("has_gills", ("absent", "present"))
    found = gate_characteristic(gills, BIOLOGY, [salmon, trout])
    assert [v.canon for v in found] == ["differentiation"]


def test_gate_rejects_unascertainable_internal_anatomy():
    fishes = [sc("a", pyloric_caeca="present"), sc("b", pyloric_caeca="absent")]
    pyloric = char("pyloric_caeca", ("absent", "present"), ascertainable=False)
    assert "ascertainability" in {v.canon for v in gate_characteristic(pyloric, BIOLOGY, fishes)}


def test_gate_rejects_impermanent_colour_of_camouflaging_fishes():
    fishes = [sc("a", colour="silver"), sc("b", colour="camouflage")]
    colour = char("colour", ("camouflage", "silver"), permanent=False)
    assert "permanence" in {v.canon for v in gate_characteristic(colour, BIOLOGY, fishes)}


def test_gate_rejects_characteristic_irrelevant_to_purpose():
    fishes = [sc("a", fin_spots="present"), sc("b", fin_spots="absent")]
    fin_spots = char("fin_spots", ("absent", "present"), relevance_tags={"habitat"})
    assert "relevance" in {v.canon for v in gate_characteristic(fin_spots, BIOLOGY, fishes)}


def test_gate_passes_a_clean_characteristic():
    fishes = [sc("a", tail_shape="concave"), sc("b", tail_shape="convex")]
    assert gate_characteristic(char("tail_shape", ("concave", "convex")), BIOLOGY, fishes) == []


def test_gate_requires_nonempty_universe():
    with pytest.raises(ForgeError):
        gate_characteristic(char("x"), BIOLOGY, [])


# -- succession -------------------------------------------------------------


def fish_varieties() -> list[SubstanceConcept]:
    return [
        sc("chinook", tail_shape="concave", parr_marks="absent"),
        sc("blueback", tail_shape="concave", parr_marks="present"),
        sc("rainbow", tail_shape="convex", parr_marks="present"),
        sc("steelhead", tail_shape="convex", parr_marks="absent"),
    ]


def test_curated_succession_puts_tail_shape_first():
    # The expert orders tail shape before parr marks (relevant succession).
    cands = [char("tail_shape", ("concave", "convex")), char("parr_marks", ("absent", "present"))]
    decision = DecisionRecord(
        decision_id="d-1",
        kind="set-succession",
        payload={"purpose_id": "biology", "succession": ["tail_shape", "parr_marks"]},
    )
    plan = order_characteristics(cands, BIOLOGY, fish_varieties(), decisions=[decision])
    assert plan.characteristics == ("tail_shape", "parr_marks")
    assert plan.curated


def test_default_order_breaks_partition_ties_by_name():
    # Both characteristics split the varieties two ways: the default falls
    # back to name order and the plan is flagged as awaiting confirmation.
    cands = [char("tail_shape", ("concave", "convex")), char("parr_marks", ("absent", "present"))]
    plan = order_characteristics(cands, BIOLOGY, fish_varieties())
    assert plan.characteristics == ("parr_marks", "tail_shape")
    assert not plan.curated


def test_default_order_prefers_higher_partition_counts():
    universe = [
        sc("a", habitat="open_water", tail_shape="concave"),
        sc("b", habitat="riverbed", tail_shape="convex"),
        sc("c", habitat="seabed", tail_shape="concave"),
    ]
    cands = [
        char("tail_shape", ("concave", "convex")),
        char("habitat", ("open_water", "riverbed", "seabed")),
    ]
    plan = order_characteristics(cands, BIOLOGY, universe)
    assert plan.characteristics == ("habitat", "tail_shape")
    assert partition_count(universe, "habitat") == 3


def test_single_candidate_orders_trivially():
    plan = order_characteristics([char("tail_shape", ("concave", "convex"))], BIOLOGY, fish_varieties())
    assert plan.characteristics == ("tail_shape",)


def test_succession_decision_with_unknown_characteristic_errors():
    decision = DecisionRecord(
        decision_id="d-1",
        kind="set-succession",
        payload={"purpose_id": "biology", "succession": ["wingspan"]},
    )
    with pytest.raises(ForgeError, match="wingspan"):
        order_characteristics([char("tail_shape")], BIOLOGY, fish_varieties(), decisions=[decision])


# -- build ------------------------------------------------------------------


def built_varieties_store() -> Store:
    store = make_store(
        tail_shape=["concave", "convex"],
        parr_marks=["absent", "present"],
    )
    ingest_session(
        store,
        [
            enc("chinook", tail_shape="concave", parr_marks="absent"),
            enc("blueback", tail_shape="concave", parr_marks="present"),
            enc("rainbow", tail_shape="convex", parr_marks="present"),
            enc("steelhead", tail_shape="convex", parr_marks="absent"),
        ],
    )
    return store


def test_build_fish_fixture_matches_worked_example_chains(fish_store):
    tax = fish_store.taxonomy
    assert set(tax.nodes) == ALL_NODES
    assert tax.nodes[N_FISH].parent == N_ROOT
    assert tax.nodes[N_SALMON].parent == N_FISH
    assert tax.nodes[N_TROUT].parent == N_FISH
    assert set(tax.nodes[N_SALMON].children) == {N_CHINOOK, N_BLUEBACK}
    assert set(tax.nodes[N_TROUT].children) == {N_RAINBOW, N_STEELHEAD}
    # Entity hints (test oracle only) confirm which leaf is which.
    assert hint_of(fish_store, tax.nodes[N_CHINOOK].sc_ref) == "chinook salmon"
    assert hint_of(fish_store, tax.nodes[N_RAINBOW].sc_ref) == "rainbow trout"
    # Ranks run root=0 downward; fish is a basic category at depth 1.
    assert tax.nodes[N_ROOT].rank == 0
    assert tax.nodes[N_CHINOOK].rank == 3
    assert tax.nodes[N_FISH].basic_category


def test_build_single_concept_universe_yields_bare_root():
    store = make_store(tail_shape=["concave", "convex"])
    ingest_session(store, [enc("only", tail_shape="concave")])
    plan = SuccessionPlan(purpose=BuildPurpose("t", "test"), characteristics=("tail_shape",))
    build_hierarchy(store, plan)
    assert list(store.taxonomy.nodes) == ["root"]
    assert store.taxonomy.nodes["root"].children == ()


def test_build_two_concepts_one_characteristic():
    store = make_store(tail_shape=["concave", "convex"])
    ingest_session(
        store,
        [enc("a", tail_shape="concave"), enc("b", tail_shape="convex")],
    )
    plan = SuccessionPlan(purpose=BuildPurpose("t", "test"), characteristics=("tail_shape",))
    build_hierarchy(store, plan)
    tax = store.taxonomy
    assert len(tax.nodes) == 3
    leaves = [n for n in tax.nodes.values() if not n.children]
    assert {n.differentia for n in leaves} == {("tail_shape", "concave"), ("tail_shape", "convex")}


def test_build_skips_non_differentiating_characteristic_with_warning():
    store = built_varieties_store()
    store.characteristics["habitat"] = char("habitat", ("open_water", "riverbed"))
    plan = SuccessionPlan(
        purpose=BuildPurpose("t", "test"),
        characteristics=("habitat", "tail_shape", "parr_marks"),
    )
    warnings = build_hierarchy(store, plan)
    assert any("habitat" in w for w in warnings)
    assert len(store.taxonomy.nodes) == 7  # root + 2 tails + 4 varieties


def test_build_requires_nonempty_mass():
    store = make_store(tail_shape=["concave", "convex"])
    plan = SuccessionPlan(purpose=BuildPurpose("t", "test"), characteristics=("tail_shape",))
    with pytest.raises(ForgeError, match="empty apperception mass"):
        build_hierarchy(store, plan)


def test_build_never_reads_lexicons(fish_store):
    # Rebuilding with every lexicon gone must give the identical tree.
    before = {(n.node_id, n.parent, n.children) for n in fish_store.taxonomy.nodes.values()}
    fish_store.lexicons.clear()
    build_hierarchy(fish_store, fish_store.taxonomy.plan)
    after = {(n.node_id, n.parent, n.children) for n in fish_store.taxonomy.nodes.values()}
    assert before == after


def test_per_node_override_changes_the_split(fish_store):
    plan = fish_store.taxonomy.plan
    forced = SuccessionPlan(
        purpose=plan.purpose,
        characteristics=plan.characteristics,
        overrides=((N_FISH, "parr_marks"),),
        curated=True,
        rank_scheme=plan.rank_scheme,
        basic_rank_label=plan.basic_rank_label,
    )
    build_hierarchy(fish_store, forced)
    fish = fish_store.taxonomy.nodes[N_FISH]
    assert fish.split_characteristic == "parr_marks"
    assert {fish_store.taxonomy.nodes[c].differentia for c in fish.children} == {
        ("parr_marks", "absent"),
        ("parr_marks", "present"),
    }


# -- canon checks over built taxonomies --------------------------------------


def drop_subtree(store: Store, node_id: str) -> None:
    """Raw mutation: remove a node and its subtree, leaving ancestors stale."""
    tax = store.taxonomy
    node = tax.nodes[node_id]
    parent = tax.nodes[node.parent]
    tax.nodes[parent.node_id] = replace(
        parent, children=tuple(c for c in parent.children if c != node_id)
    )
    stack = [node_id]
    while stack:
        gone = tax.nodes.pop(stack.pop())
        stack.extend(gone.children)


def delete_middle_node(store: Store, node_id: str) -> None:
    """Raw mutation: splice a node out, reattaching children to its parent.

    Persisted rank labels are deliberately kept: the missing link must stay
    visible to the modulation check.
    """
    tax = store.taxonomy
    node = tax.nodes.pop(node_id)
    parent = tax.nodes[node.parent]
    kept = tuple(c for c in parent.children if c != node_id) + node.children
    tax.nodes[parent.node_id] = replace(parent, children=kept)
    for child_id in node.children:
        tax.nodes[child_id] = replace(tax.nodes[child_id], parent=parent.node_id)


def test_fixture_audit_is_clean(fish_store):
    report = audit_all(fish_store)
    assert report.errors == 0, [v.explanation for v in report.violations]


def test_leaf_extensions_union_to_root_extension(fish_store):
    # An audit-clean taxonomy loses no media on the way down.
    tax = fish_store.taxonomy
    leaf_union: set[str] = set()
    for leaf in tax.leaves():
        leaf_union |= fish_store.node_concept(leaf).extension
    assert leaf_union == set(fish_store.node_concept(tax.nodes[tax.root]).extension)


def test_exhaustiveness_flags_missing_variety(fish_store):
    drop_subtree(fish_store, N_BLUEBACK)
    found = check_exhaustiveness(fish_store, fish_store.taxonomy.nodes[N_SALMON])
    assert len(found) == 1
    v = found[0]
    assert v.canon == "exhaustiveness"
    assert "media/blueback-01.jpg" in v.explanation
    assert "media/blueback-02.jpg" in v.explanation
    assert v.suggested_fixes


def test_exhaustiveness_not_applicable_to_leaves(fish_store):
    assert check_exhaustiveness(fish_store, fish_store.taxonomy.nodes[N_CHINOOK]) == []


def test_exhaustiveness_clean_on_complete_fixture(fish_store):
    for node in fish_store.taxonomy.nodes.values():
        assert check_exhaustiveness(fish_store, node) == []


def test_chain_extension_clean_on_fixture_chain(fish_store):
    chain = fish_store.taxonomy.chain_to(N_RAINBOW)
    assert chain == [N_ROOT, N_FISH, N_TROUT, N_RAINBOW]
    assert check_chain_extension(fish_store, chain) == []


def test_chain_extension_flags_duplicate_class(fish_store):
    # A child with its parent's exact extension and intension adds nothing.
    salmon = fish_store.taxonomy.nodes[N_SALMON]
    dup_sc = fish_store.substance_concepts[salmon.sc_ref]
    clone = replace(dup_sc, sc_id="sc-dup")
    fish_store.substance_concepts["sc-dup"] = clone
    fish_store.taxonomy.nodes["dup"] = replace(
        salmon, node_id="dup", sc_ref="sc-dup", parent=N_SALMON, children=(), rank=salmon.rank + 1
    )
    found = check_chain_extension(fish_store, [N_SALMON, "dup"])
    assert [v.canon for v in found] == ["extension"]
    assert "no strict step" in found[0].explanation


def test_chain_extension_flags_foreign_media(fish_store):
    rainbow = fish_store.taxonomy.nodes[N_RAINBOW]
    sc_obj = fish_store.substance_concepts[rainbow.sc_ref]
    fish_store.substance_concepts[rainbow.sc_ref] = replace(
        sc_obj, extension=sc_obj.extension | {"media/intruder.jpg"}
    )
    found = check_chain_extension(fish_store, fish_store.taxonomy.chain_to(N_RAINBOW))
    assert any("not contained in parent extension" in v.explanation for v in found)


def test_modulation_clean_on_fixture(fish_store):
    scheme = fish_store.taxonomy.plan.rank_scheme
    for leaf in fish_store.taxonomy.leaves():
        chain = fish_store.taxonomy.chain_to(leaf.node_id)
        assert check_modulation(fish_store, chain, scheme) == []


def test_modulation_two_adjacent_nodes_pass(fish_store):
    scheme = fish_store.taxonomy.plan.rank_scheme
    assert check_modulation(fish_store, [N_ROOT, N_FISH], scheme) == []


def test_deleting_trout_creates_missing_links(fish_store):
    # Jumping from fish straight to rainbow trout skips the class between.
    delete_middle_node(fish_store, N_TROUT)
    scheme = fish_store.taxonomy.plan.rank_scheme
    found = check_modulation(fish_store, [N_ROOT, N_FISH, N_RAINBOW], scheme)
    assert len(found) == 1
    assert "subordinate" in found[0].explanation
    report_violations = audit_idea_plane(fish_store)
    modulation = [v for v in report_violations if v.canon == "modulation"]
    assert len(modulation) == 2  # one per reattached trout variety


def test_modulation_rejects_label_outside_scheme(fish_store):
    tax = fish_store.taxonomy
    tax.nodes[N_FISH] = replace(tax.nodes[N_FISH], rank_label="order")
    with pytest.raises(ForgeError, match="outside the scheme"):
        check_modulation(fish_store, [N_ROOT, N_FISH], tax.plan.rank_scheme)


def test_differentiation_check_flags_single_child_split(fish_store):
    drop_subtree(fish_store, N_BLUEBACK)
    found = check_differentiation(fish_store)
    assert [v.location for v in found] == [N_SALMON]


def test_differentiation_fixes_suggest_alternative_characteristics(fish_store):
    # A one-child split over a group that another characteristic could divide
    # carries ready-to-post set-override templates.
    fish = fish_store.taxonomy.nodes[N_FISH]
    gilled_id = f"{N_FISH}/has_gills=present"
    fish_store.taxonomy.nodes[gilled_id] = replace(
        fish,
        node_id=gilled_id,
        differentia=("has_gills", "present"),
        rank=fish.rank + 1,
        parent=N_FISH,
    )
    for child_id in fish.children:
        fish_store.taxonomy.nodes[child_id] = replace(
            fish_store.taxonomy.nodes[child_id], parent=gilled_id
        )
    fish_store.taxonomy.nodes[N_FISH] = replace(
        fish, split_characteristic="has_gills", children=(gilled_id,)
    )
    found = [v for v in check_differentiation(fish_store) if v.location == N_FISH]
    assert len(found) == 1
    alternatives = {f["payload"]["characteristic"] for f in found[0].suggested_fixes}
    assert "tail_shape" in alternatives


def test_audit_aggregates_and_is_idempotent(fish_store):
    drop_subtree(fish_store, N_BLUEBACK)
    first = audit_idea_plane(fish_store)
    second = audit_idea_plane(fish_store)
    assert [v.to_dict() for v in first] == [v.to_dict() for v in second]
    assert any(v.canon == "exhaustiveness" for v in first)
