"""Notational plane: language-agnostic numeric concept identifiers.

Identifiers are opaque integers decoupled from tree position, so classes can
be inserted anywhere (hospitality in array and chain) without renumbering;
the mint counter only moves forward, and retired ids are never reused.
"""

from __future__ import annotations

import dataclasses
from typing import Any, Sequence

from .model import (
    ClassificationConcept,
    CanonViolation,
    DecisionRecord,
    ForgeError,
    SubstanceConcept,
    TaxonomyNode,
    violation,
)
from .percepts import superordinate_signature
from .store import Store


def mint_ids(store: Store) -> list[int]:
    """Assign fresh ids to every node lacking one, in pre-order.

    Existing assignments are untouched; concepts whose node vanished in a
    rebuild are retired (their ids stay burned).  Returns the new ids.
    """
    if not store.taxonomy.is_built():
        raise ForgeError("no taxonomy to mint identifiers for")
    live = set(store.taxonomy.nodes)
    store.concepts.rows = [c for c in store.concepts.rows if c.node_ref in live]
    assigned = {c.node_ref for c in store.concepts.rows}
    minted: list[int] = []
    for node in store.taxonomy.preorder():
        if node.node_id in assigned:
            continue
        concept_id = store.concepts.next_id
        store.concepts.next_id += 1
        store.concepts.rows.append(
            ClassificationConcept(concept_id=concept_id, node_ref=node.node_id)
        )
        minted.append(concept_id)
    return minted


def check_synonym_homonym(store: Store) -> list[CanonViolation]:
    """Concept ids and nodes must correspond one-to-one.

    A node holding two ids breaks the synonym canon (one idea, one number); an
    id on two nodes breaks the homonym canon (one number, one idea).
    """
    out: list[CanonViolation] = []
    nodes_seen: dict[str, list[int]] = {}
    ids_seen: dict[int, list[str]] = {}
    for concept in store.concepts.rows:
        nodes_seen.setdefault(concept.node_ref, []).append(concept.concept_id)
        ids_seen.setdefault(concept.concept_id, []).append(concept.node_ref)
    for node_ref, ids in sorted(nodes_seen.items()):
        if len(ids) > 1:
            out.append(
                violation(
                    "synonym",
                    node_ref,
                    f"class carries {len(ids)} concept ids {sorted(ids)}; one and only one required",
                )
            )
    for concept_id, refs in sorted(ids_seen.items()):
        if len(refs) > 1:
            out.append(
                violation(
                    "homonym",
                    str(concept_id),
                    f"concept id {concept_id} stands for {len(refs)} classes {sorted(refs)}",
                )
            )
    return out


def _recompute_ancestors(store: Store, node_id: str) -> None:
    """Refresh synthesized concepts up the chain after a structural edit."""
    tax = store.taxonomy
    cur: str | None = node_id
    while cur is not None:
        node = tax.nodes[cur]
        if node.children:
            sc = store.substance_concepts.get(node.sc_ref)
            if sc is not None and sc.synthetic:
                children = [store.node_concept(tax.nodes[c]) for c in node.children]
                store.substance_concepts[node.sc_ref] = superordinate_signature(
                    store, children, sc_id=node.sc_ref
                )
        cur = node.parent


def _reset_depths(store: Store, node_id: str) -> None:
    """Recompute rank = parent.rank + 1 down a reparented subtree."""
    tax = store.taxonomy
    stack = [node_id]
    while stack:
        node = tax.nodes[stack.pop()]
        parent_rank = tax.nodes[node.parent].rank if node.parent else -1
        tax.nodes[node.node_id] = dataclasses.replace(node, rank=parent_rank + 1)
        stack.extend(node.children)


def insert_concept(
    store: Store,
    parent_id: str,
    differentia: tuple[str, str],
    sc_ref: str | None = None,
    adopt: Sequence[str] = (),
    rank_label: str | None = None,
) -> TaxonomyNode:
    """Insert a class as a new coordinate sibling (array hospitality) or as a
    new link above adopted children (chain hospitality).

    Existing nodes keep their ids and concept numbers; the new node is minted
    exactly one fresh id.  The inserted class needs a substance concept:
    either an existing unplaced one (``sc_ref``) or, when adopting children,
    the synthesis of their signatures.
    """
    tax = store.taxonomy
    if not tax.is_built():
        raise ForgeError("no taxonomy to insert into")
    parent = tax.nodes.get(parent_id)
    if parent is None:
        raise ForgeError(f"unknown parent node: {parent_id}")
    char, value = differentia

    characteristic = store.characteristics.get(char)
    if characteristic is None:
        raise ForgeError(f"unknown characteristic: {char!r}")
    if value not in characteristic.value_domain.labels():
        raise ForgeError(f"value {value!r} not in domain of {char!r}")
    if parent.split_characteristic is not None and parent.split_characteristic != char:
        raise ForgeError(
            f"differentia characteristic {char!r} differs from the parent's "
            f"splitting characteristic {parent.split_characteristic!r}"
        )
    for sibling_id in parent.children:
        sib = tax.nodes[sibling_id]
        if sib.differentia == differentia:
            raise ForgeError(
                f"differentia {char}={value} duplicates sibling {sibling_id}; "
                "coordinate classes must differ"
            )

    adopted = list(adopt)
    for child_id in adopted:
        child = tax.nodes.get(child_id)
        if child is None:
            raise ForgeError(f"cannot adopt unknown node {child_id}")
        if child.parent != parent_id:
            raise ForgeError(f"node {child_id} is not a child of {parent_id}")

    node_id = f"{parent_id}/{char}={value}"
    if node_id in tax.nodes:
        raise ForgeError(f"node id already in use: {node_id}")

    new_sc: SubstanceConcept
    if adopted:
        children_scs = [store.node_concept(tax.nodes[c]) for c in adopted]
        new_sc = superordinate_signature(store, children_scs, sc_id=f"syn:{node_id}")
        store.substance_concepts[new_sc.sc_id] = new_sc
    elif sc_ref is not None:
        sc = store.substance_concepts.get(sc_ref)
        if sc is None:
            raise ForgeError(f"unknown substance concept: {sc_ref}")
        placed = {n.sc_ref for n in tax.nodes.values()}
        if sc_ref in placed:
            raise ForgeError(f"substance concept {sc_ref} is already placed on a node")
        new_sc = sc
    else:
        raise ForgeError("insertion needs an sc_ref or children to adopt")

    label = rank_label
    if label is None and tax.plan and tax.plan.rank_scheme:
        scheme = tax.plan.rank_scheme
        depth = parent.rank + 1
        label = scheme[depth] if depth < len(scheme) else scheme[-1]

    split_char = None
    if adopted:
        child_chars = {tax.nodes[c].differentia[0] for c in adopted if tax.nodes[c].differentia}
        if len(child_chars) == 1:
            split_char = child_chars.pop()

    node = TaxonomyNode(
        node_id=node_id,
        sc_ref=new_sc.sc_id,
        parent=parent_id,
        differentia=differentia,
        rank=parent.rank + 1,
        children=tuple(adopted),
        split_characteristic=split_char,
        rank_label=label,
        basic_category=bool(
            tax.plan and tax.plan.basic_rank_label and label == tax.plan.basic_rank_label
        ),
    )
    tax.nodes[node_id] = node

    kept = tuple(c for c in parent.children if c not in adopted) + (node_id,)
    tax.nodes[parent_id] = dataclasses.replace(
        parent,
        children=kept,
        split_characteristic=parent.split_characteristic or char,
    )
    for child_id in adopted:
        tax.nodes[child_id] = dataclasses.replace(tax.nodes[child_id], parent=node_id)
        _reset_depths(store, child_id)

    _recompute_ancestors(store, node_id)
    mint_ids(store)
    return tax.nodes[node_id]


def confirm_mapping(
    store: Store, sc_id: str, concept_id: int, decision: DecisionRecord
) -> ClassificationConcept:
    """Bind a substance concept to a classification concept one-to-one.

    Rejects anything that would break the bijection; remapping requires an
    explicit supersede decision.
    """
    if decision.kind != "confirm-mapping":
        raise ForgeError("mapping requires a confirm-mapping decision")
    if sc_id not in store.substance_concepts:
        raise ForgeError(f"unknown substance concept: {sc_id}")
    concept = store.concepts.get(concept_id)
    if concept is None:
        raise ForgeError(f"unknown concept id: {concept_id}")
    supersede = bool(decision.payload.get("supersede", False))
    if concept.mapped_sc is not None and concept.mapped_sc != sc_id and not supersede:
        raise ForgeError(
            f"concept {concept_id} is already mapped to {concept.mapped_sc}; "
            "remapping requires a supersede decision"
        )
    rows = store.concepts.rows
    for i, other in enumerate(rows):
        if other.concept_id != concept_id and other.mapped_sc == sc_id:
            if not supersede:
                raise ForgeError(
                    f"substance concept {sc_id} is already mapped to concept "
                    f"{other.concept_id}; conflicting pair ({other.concept_id}, {concept_id})"
                )
            rows[i] = dataclasses.replace(other, mapped_sc=None)
    updated = dataclasses.replace(concept, mapped_sc=sc_id)
    for i, row in enumerate(rows):
        if row.concept_id == concept_id:
            rows[i] = updated
            break
    return updated


def concept_view(store: Store, concept: ClassificationConcept) -> dict[str, Any]:
    """Concept with its per-language synsets gathered from the lexicons."""
    synsets = {
        lang: {"lemmas": list(lex.entries[concept.node_ref].lemmas), "gloss": lex.entries[concept.node_ref].gloss}
        for lang, lex in sorted(store.lexicons.items())
        if concept.node_ref in lex.entries
    }
    return {
        "concept_id": concept.concept_id,
        "node_ref": concept.node_ref,
        "mapped_sc": concept.mapped_sc,
        "synsets": synsets,
    }
