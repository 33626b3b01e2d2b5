"""Idea plane: gate characteristics, order them, build the subsumption
hierarchy by recursive partitioning, and audit it against the hierarchy
canons.

This module never reads synsets or lemmas ("idea first, word next"): the
hierarchy is built purely from the perceptual signatures in the apperception
mass, and labeling happens strictly afterwards in the verbal plane.
"""

from __future__ import annotations

import logging
import time
from typing import Any, Sequence

from .model import (
    ERROR,
    WARNING,
    AuditReport,
    BuildPurpose,
    CanonViolation,
    Characteristic,
    DecisionRecord,
    ForgeError,
    SubstanceConcept,
    SuccessionPlan,
    TaxonomyNode,
    violation,
)
from .percepts import superordinate_signature
from .store import Store, Taxonomy

log = logging.getLogger(__name__)

ROOT_ID = "root"


def _value_of(sc: SubstanceConcept, characteristic: str) -> str | None:
    for name, value in sc.intension:
        if name == characteristic:
            return value
    return None


def partition(
    universe: Sequence[SubstanceConcept], characteristic: str
) -> dict[str, list[SubstanceConcept]]:
    """Group concepts by their intension value for one characteristic.

    Concepts whose intension carries no value for it are left out; they make
    the characteristic unusable as a splitting basis for that group.
    """
    groups: dict[str, list[SubstanceConcept]] = {}
    for sc in universe:
        value = _value_of(sc, characteristic)
        if value is not None:
            groups.setdefault(value, []).append(sc)
    return groups


def partition_count(universe: Sequence[SubstanceConcept], characteristic: str) -> int:
    return len(partition(universe, characteristic))


def gate_characteristic(
    c: Characteristic,
    purpose: BuildPurpose,
    universe: Sequence[SubstanceConcept],
) -> list[CanonViolation]:
    """Admission test for a characteristic: it must differentiate the
    universe, be relevant to the purpose, and be ascertainable and permanent.

    An empty result means the characteristic passes.
    """
    if not universe:
        raise ForgeError("gate_characteristic needs a non-empty universe")
    out: list[CanonViolation] = []
    if partition_count(universe, c.name) < 2:
        out.append(
            violation(
                "differentiation",
                c.name,
                f"characteristic {c.name!r} does not give rise to at least two classes",
            )
        )
    if purpose.relevance_tag not in c.relevance_tags:
        out.append(
            violation(
                "relevance",
                c.name,
                f"characteristic {c.name!r} is not tagged relevant to purpose "
                f"{purpose.purpose_id!r} ({purpose.relevance_tag!r})",
            )
        )
    if not c.ascertainable:
        out.append(
            violation(
                "ascertainability",
                c.name,
                f"characteristic {c.name!r} is not perceptually ascertainable",
            )
        )
    if not c.permanent:
        out.append(
            violation(
                "permanence",
                c.name,
                f"characteristic {c.name!r} does not stay unchanged for this purpose",
            )
        )
    return out


def order_characteristics(
    cands: Sequence[Characteristic],
    purpose: BuildPurpose,
    universe: Sequence[SubstanceConcept],
    decisions: Sequence[DecisionRecord] = (),
    rank_scheme: Sequence[str] = (),
    basic_rank_label: str | None = None,
    overrides: dict[str, str] | None = None,
) -> SuccessionPlan:
    """Resolve the characteristic succession for a purpose.

    A curator-supplied order wins: the latest set-succession decision for the
    purpose, else the purpose's declared succession.  Otherwise the default
    order (descending partition count, ties by ascending name) is used and the
    plan is marked uncurated, which the auditor surfaces as a
    relevant-succession warning awaiting expert confirmation.
    """
    by_name = {c.name: c for c in cands}
    chosen: tuple[str, ...] | None = None
    curated = True
    decided_overrides = dict(overrides or {})

    def checked(succession: tuple[str, ...], source: str) -> tuple[str, ...]:
        if len(set(succession)) != len(succession):
            raise ForgeError(f"{source} succession repeats a characteristic")
        for name in succession:
            if name not in by_name:
                raise ForgeError(f"{source} succession names unknown characteristic {name!r}")
        return succession

    for record in reversed(list(decisions)):
        if record.kind == "set-succession" and record.payload.get("purpose_id") == purpose.purpose_id:
            chosen = checked(tuple(record.payload.get("succession", ())), "decision")
            decided_overrides.update(record.payload.get("overrides", {}))
            break

    if chosen is None and purpose.succession:
        chosen = checked(tuple(purpose.succession), "declared")

    if chosen is None:
        ranked = sorted(by_name.values(), key=lambda c: (-partition_count(universe, c.name), c.name))
        chosen = tuple(c.name for c in ranked)
        curated = False
        log.warning(
            "default characteristic succession in use for purpose %s; expert confirmation expected",
            purpose.purpose_id,
        )

    return SuccessionPlan(
        purpose=purpose,
        characteristics=chosen,
        overrides=tuple(sorted(decided_overrides.items())),
        curated=curated,
        rank_scheme=tuple(rank_scheme),
        basic_rank_label=basic_rank_label,
    )


def _usable(group: Sequence[SubstanceConcept], characteristic: str) -> bool:
    """A characteristic can split a group iff every member carries a value
    for it and at least two distinct values occur."""
    values = set()
    for sc in group:
        value = _value_of(sc, characteristic)
        if value is None:
            return False
        values.add(value)
    return len(values) >= 2


def build_hierarchy(store: Store, plan: SuccessionPlan) -> list[str]:
    """Recursively partition the leaf universe into a Genus-Differentia tree.

    The root covers every concept; each level splits by the next plan
    characteristic (or the node's override) into one child per observed
    value.  Non-leaf classes get synthesized concepts (union of children).
    A characteristic that no longer differentiates a subgroup is skipped
    there with a warning.  Returns the warnings.
    """
    universe = store.leaf_concepts()
    if not universe:
        raise ForgeError("empty apperception mass")
    if not plan.characteristics:
        raise ForgeError("succession plan has no characteristics")

    for sc_id in [sc.sc_id for sc in store.substance_concepts.values() if sc.synthetic]:
        del store.substance_concepts[sc_id]

    nodes: dict[str, TaxonomyNode] = {}
    warnings: list[str] = []
    overrides = dict(plan.overrides)
    scheme = plan.rank_scheme

    def rank_label(depth: int) -> str | None:
        if not scheme:
            return None
        return scheme[depth] if depth < len(scheme) else scheme[-1]

    def grow(
        group: list[SubstanceConcept],
        node_id: str,
        parent: str | None,
        differentia: tuple[str, str] | None,
        depth: int,
        remaining: tuple[str, ...],
    ) -> str:
        label = rank_label(depth)
        basic = label is not None and label == plan.basic_rank_label

        if len(group) == 1:
            sc_ref = group[0].sc_id
        else:
            synthesized = superordinate_signature(store, group, sc_id=f"syn:{node_id}")
            store.substance_concepts[synthesized.sc_id] = synthesized
            sc_ref = synthesized.sc_id

        # Skipped characteristics stay available to descendants: one that does
        # not differentiate here may differentiate a smaller subgroup.
        split_char: str | None = None
        rest = remaining
        if len(group) > 1:
            queue: list[str] = []
            forced = overrides.get(node_id)
            if forced:
                queue.append(forced)
            queue.extend(c for c in remaining if c != forced)
            for cand in queue:
                if _usable(group, cand):
                    split_char = cand
                    rest = tuple(c for c in remaining if c != cand)
                    break
                warnings.append(
                    f"characteristic {cand!r} no longer differentiates the group at {node_id}; skipped"
                )
                log.warning("%s", warnings[-1])

        children: list[str] = []
        if split_char is not None:
            groups = partition(group, split_char)
            for value in sorted(groups):
                child_id = f"{node_id}/{split_char}={value}"
                children.append(
                    grow(groups[value], child_id, node_id, (split_char, value), depth + 1, rest)
                )

        nodes[node_id] = TaxonomyNode(
            node_id=node_id,
            sc_ref=sc_ref,
            parent=parent,
            differentia=differentia,
            rank=depth,
            children=tuple(children),
            split_characteristic=split_char,
            rank_label=label,
            basic_category=basic,
        )
        return node_id

    grow(list(universe), ROOT_ID, None, None, 0, plan.characteristics)
    store.taxonomy = Taxonomy(root=ROOT_ID, nodes=nodes, plan=plan)
    return warnings


# ---------------------------------------------------------------------------
# Canon checks over a built taxonomy
# ---------------------------------------------------------------------------


def _group_under(store: Store, node: TaxonomyNode) -> list[SubstanceConcept]:
    """Leaf concepts covered by a node (its own concept if it is a leaf)."""
    tax = store.taxonomy
    out: list[SubstanceConcept] = []
    stack = [node.node_id]
    while stack:
        n = tax.nodes[stack.pop()]
        if n.children:
            stack.extend(n.children)
        else:
            out.append(store.node_concept(n))
    out.sort(key=lambda sc: sc.sc_id)
    return out


def check_differentiation(store: Store) -> list[CanonViolation]:
    """Every split must yield at least two coordinate classes."""
    out: list[CanonViolation] = []
    for node in store.taxonomy.nodes.values():
        if node.split_characteristic is not None and len(node.children) < 2:
            group = _group_under(store, node)
            fixes = tuple(
                {
                    "kind": "resolve-violation",
                    "payload": {"fix": "set-override", "node_id": node.node_id, "characteristic": alt},
                }
                for alt in sorted(store.characteristics)
                if alt != node.split_characteristic and _usable(group, alt)
            )
            out.append(
                violation(
                    "differentiation",
                    node.node_id,
                    f"split by {node.split_characteristic!r} yields "
                    f"{len(node.children)} class(es); at least two required",
                    fixes=fixes,
                )
            )
    return out


def check_characteristic_flags(store: Store) -> list[CanonViolation]:
    """Re-verify relevance/ascertainability/permanence for every
    characteristic actually used by a split."""
    plan = store.taxonomy.plan
    if plan is None:
        return []
    used = sorted(
        {n.split_characteristic for n in store.taxonomy.nodes.values() if n.split_characteristic}
    )
    out: list[CanonViolation] = []
    for name in used:
        c = store.characteristics.get(name)
        if c is None:
            out.append(violation("ascertainability", name, f"characteristic {name!r} is not registered"))
            continue
        if plan.purpose.relevance_tag not in c.relevance_tags:
            out.append(
                violation(
                    "relevance",
                    name,
                    f"characteristic {name!r} lacks the purpose tag {plan.purpose.relevance_tag!r}",
                )
            )
        if not c.ascertainable:
            out.append(violation("ascertainability", name, f"characteristic {name!r} is not ascertainable"))
        if not c.permanent:
            out.append(violation("permanence", name, f"characteristic {name!r} is not permanent"))
    return out


def _assignment_fixes(node_id: str, media: Sequence[str]) -> tuple[dict[str, Any], ...]:
    return (
        {
            "kind": "resolve-violation",
            "payload": {
                "fix": "insert-node",
                "parent": node_id,
                "note": f"form a new coordinate class for {sorted(media)}",
            },
        },
        {
            "kind": "approve-merge",
            "payload": {"note": f"assign {sorted(media)} to an existing child class"},
        },
    )


def check_exhaustiveness(store: Store, node: TaxonomyNode) -> list[CanonViolation]:
    """Children of a class must jointly exhaust its immediate universe."""
    if not node.children:
        return []
    tax = store.taxonomy
    node_ext = store.node_concept(node).extension
    child_union: set[str] = set()
    for child_id in node.children:
        child_union |= store.node_concept(tax.nodes[child_id]).extension
    if child_union == set(node_ext):
        return []
    unassigned = sorted(set(node_ext) - child_union)
    extra = sorted(child_union - set(node_ext))
    detail = []
    if unassigned:
        detail.append(f"unassigned media: {unassigned}")
    if extra:
        detail.append(f"children exceed the class universe: {extra}")
    return [
        violation(
            "exhaustiveness",
            node.node_id,
            "children are not exhaustive of their common immediate universe; " + "; ".join(detail),
            fixes=_assignment_fixes(node.node_id, unassigned or extra),
        )
    ]


def check_root_coverage(store: Store) -> list[CanonViolation]:
    """Every observed medium must be classified somewhere under the root."""
    tax = store.taxonomy
    if not tax.is_built():
        return []
    root_ext = store.node_concept(tax.nodes[tax.root]).extension
    all_media = {sc_media for sc in store.leaf_concepts() for sc_media in sc.extension}
    missing = sorted(all_media - set(root_ext))
    if not missing:
        return []
    return [
        violation(
            "exhaustiveness",
            tax.root,
            f"media not classified anywhere in the hierarchy: {missing}",
            fixes=_assignment_fixes(tax.root, missing),
        )
    ]


def check_chain_extension(store: Store, chain: Sequence[str]) -> list[CanonViolation]:
    """Down a chain, extension must shrink and intension must grow, strictly
    at each step on at least one side."""
    if len(chain) < 2:
        return []
    tax = store.taxonomy
    out: list[CanonViolation] = []
    for parent_id, child_id in zip(chain, chain[1:]):
        parent = store.node_concept(tax.nodes[parent_id])
        child = store.node_concept(tax.nodes[child_id])
        where = f"{parent_id}->{child_id}"
        if not child.extension <= parent.extension:
            out.append(
                violation(
                    "extension",
                    where,
                    "child extension is not contained in parent extension",
                )
            )
            continue
        if not child.intension >= parent.intension:
            out.append(
                violation(
                    "extension",
                    where,
                    "child intension does not include parent intension",
                )
            )
            continue
        if child.extension == parent.extension and child.intension == parent.intension:
            out.append(
                violation(
                    "extension",
                    where,
                    "no strict step: extension and intension are both unchanged",
                )
            )
    return out


def check_modulation(
    store: Store, chain: Sequence[str], rank_scheme: Sequence[str]
) -> list[CanonViolation]:
    """A chain must contain one class of every order between its first and
    last link: adjacent nodes must carry adjacent rank labels."""
    if not rank_scheme or len(chain) < 2:
        return []
    tax = store.taxonomy
    index = {label: i for i, label in enumerate(rank_scheme)}

    def label_of(node_id: str) -> str:
        node = tax.nodes[node_id]
        label = node.rank_label
        if label is None:
            if node.rank < len(rank_scheme):
                label = rank_scheme[node.rank]
            else:
                raise ForgeError(f"node {node_id} has no rank label and depth exceeds the scheme")
        if label not in index:
            raise ForgeError(f"node {node_id} carries rank label {label!r} outside the scheme")
        return label

    out: list[CanonViolation] = []
    for parent_id, child_id in zip(chain, chain[1:]):
        pi, ci = index[label_of(parent_id)], index[label_of(child_id)]
        if ci != pi + 1:
            skipped = rank_scheme[pi + 1 : ci] if ci > pi + 1 else ()
            what = (
                f"missing link: skips rank(s) {list(skipped)}"
                if skipped
                else f"rank order inverted or repeated ({rank_scheme[pi]!r} -> {rank_scheme[ci]!r})"
            )
            out.append(
                violation(
                    "modulation",
                    f"{parent_id}->{child_id}",
                    what,
                    fixes=(
                        {
                            "kind": "resolve-violation",
                            "payload": {
                                "fix": "insert-node",
                                "parent": parent_id,
                                "adopt": [child_id],
                                "rank_label": skipped[0] if skipped else None,
                            },
                        },
                    ),
                )
            )
    return out


def root_to_leaf_chains(store: Store) -> list[list[str]]:
    tax = store.taxonomy
    if not tax.is_built():
        return []
    return [tax.chain_to(leaf.node_id) for leaf in sorted(tax.leaves(), key=lambda n: n.node_id)]


def audit_idea_plane(store: Store) -> list[CanonViolation]:
    """All hierarchy-canon checks over every characteristic, array and chain."""
    tax = store.taxonomy
    if not tax.is_built():
        return []
    out: list[CanonViolation] = []
    out.extend(check_differentiation(store))
    out.extend(check_characteristic_flags(store))
    for node in tax.nodes.values():
        out.extend(check_exhaustiveness(store, node))
    out.extend(check_root_coverage(store))
    scheme = tax.plan.rank_scheme if tax.plan else ()
    for chain in root_to_leaf_chains(store):
        out.extend(check_chain_extension(store, chain))
        out.extend(check_modulation(store, chain, scheme))
    if tax.plan is not None and not tax.plan.curated:
        out.append(
            violation(
                "relevant-succession",
                tax.root or ROOT_ID,
                "default characteristic succession in use; expert confirmation expected",
                severity=WARNING,
            )
        )
    return out


def taxonomy_stats(store: Store) -> dict[str, Any]:
    """Depth/extension figures surfaced for the basic-category question."""
    tax = store.taxonomy
    if not tax.is_built():
        return {"nodes": 0, "leaves": 0, "max_depth": 0}
    leaves = tax.leaves()
    return {
        "nodes": len(tax.nodes),
        "leaves": len(leaves),
        "max_depth": max(n.rank for n in tax.nodes.values()),
        "extension_sizes": {
            n.node_id: len(store.node_concept(n).extension)
            for n in sorted(tax.nodes.values(), key=lambda n: n.node_id)
        },
    }


def build_report(violations: list[CanonViolation], stats: dict[str, Any] | None = None) -> AuditReport:
    # Chains overlap, so per-chain checks can report one bad edge repeatedly.
    unique: dict[tuple[str, str, str], CanonViolation] = {}
    for v in violations:
        unique.setdefault((v.canon, v.location, v.explanation), v)
    ordered = tuple(sorted(unique.values(), key=lambda v: (v.canon, v.location, v.explanation)))
    counts: dict[str, int] = {}
    for v in ordered:
        counts[v.canon] = counts.get(v.canon, 0) + 1
    return AuditReport(
        violations=ordered,
        counts=counts,
        audited_at=int(time.time() * 1000),
        stats=stats or {},
    )
