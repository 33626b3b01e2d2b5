"""Decision application: the single write path shared by the CLI, the
curation service, and replay.

Every state change is an append-only DecisionRecord plus a deterministic
apply.  Decisions that invalidate the derived taxonomy (merges, succession
changes, overrides) trigger a full rebuild and re-mint; structural inserts
edit the tree in place so existing identifiers stay stable.
"""

from __future__ import annotations

from typing import Any

from . import hierarchy, lexicon, notation, percepts
from .model import (
    BuildPurpose,
    DecisionError,
    DecisionRecord,
    ForgeError,
    SuccessionPlan,
    Synset,
)
from .store import Store


def rebuild(store: Store, plan: SuccessionPlan | None = None) -> list[str]:
    """Rebuild the hierarchy from the mass and re-mint ids for new nodes.

    Classes that vanish in the rebuild take their concept ids (retired, never
    reused) and their synsets with them; word follows idea, and stranded
    labels stay recoverable from the assign-label records in the log.
    """
    plan = plan or store.taxonomy.plan
    if plan is None:
        raise ForgeError("no succession plan recorded; build first")
    warnings = hierarchy.build_hierarchy(store, plan)
    notation.mint_ids(store)
    live = set(store.taxonomy.nodes)
    for lex in store.lexicons.values():
        for stranded in [node_id for node_id in lex.entries if node_id not in live]:
            del lex.entries[stranded]
    return warnings


def _gate_or_fail(store: Store, plan: SuccessionPlan) -> None:
    universe = store.leaf_concepts()
    if not universe:
        raise ForgeError("empty apperception mass")
    if len(set(plan.characteristics)) != len(plan.characteristics):
        raise ForgeError("succession repeats a characteristic")
    failures: list[str] = []
    for name in plan.characteristics:
        c = store.characteristics.get(name)
        if c is None:
            raise ForgeError(f"succession names unknown characteristic {name!r}")
        for v in hierarchy.gate_characteristic(c, plan.purpose, universe):
            failures.append(f"{v.canon}: {v.explanation}")
    if failures:
        raise ForgeError("succession characteristics fail the gate: " + "; ".join(failures))


def _apply_set_succession(store: Store, record: DecisionRecord) -> None:
    payload = record.payload
    purpose = BuildPurpose(
        purpose_id=payload["purpose_id"],
        relevance_tag=payload["relevance_tag"],
        succession=tuple(payload.get("succession", ())),
    )
    if purpose.succession:
        plan = SuccessionPlan(
            purpose=purpose,
            characteristics=purpose.succession,
            overrides=tuple(sorted(payload.get("overrides", {}).items())),
            curated=bool(payload.get("curated", True)),
            rank_scheme=tuple(payload.get("rank_scheme", ())),
            basic_rank_label=payload.get("basic_rank_label"),
        )
    else:
        universe = store.leaf_concepts()
        cands = [
            c
            for c in store.characteristics.values()
            if universe and not hierarchy.gate_characteristic(c, purpose, universe)
        ]
        if not cands:
            raise ForgeError("no characteristic passes the gate for this purpose")
        plan = hierarchy.order_characteristics(
            cands,
            purpose,
            universe,
            rank_scheme=tuple(payload.get("rank_scheme", ())),
            basic_rank_label=payload.get("basic_rank_label"),
            overrides=dict(payload.get("overrides", {})),
        )
    _gate_or_fail(store, plan)
    rebuild(store, plan)


def _apply_resolve_violation(store: Store, record: DecisionRecord) -> None:
    payload = record.payload
    fix = payload.get("fix")
    if fix == "set-override":
        plan = store.taxonomy.plan
        if plan is None:
            raise DecisionError("no plan to override; build first")
        overrides = dict(plan.overrides)
        overrides[payload["node_id"]] = payload["characteristic"]
        updated = SuccessionPlan(
            purpose=plan.purpose,
            characteristics=plan.characteristics,
            overrides=tuple(sorted(overrides.items())),
            curated=plan.curated,
            rank_scheme=plan.rank_scheme,
            basic_rank_label=plan.basic_rank_label,
        )
        rebuild(store, updated)
    elif fix == "insert-node":
        diff = payload.get("differentia") or {}
        if "characteristic" not in diff or "value" not in diff:
            raise DecisionError("insert-node needs a differentia {characteristic, value}")
        notation.insert_concept(
            store,
            parent_id=payload["parent"],
            differentia=(diff["characteristic"], diff["value"]),
            sc_ref=payload.get("sc_ref"),
            adopt=tuple(payload.get("adopt", ())),
            rank_label=payload.get("rank_label"),
        )
    else:
        raise DecisionError(f"unknown resolve-violation fix: {fix!r}")


def apply_decision(store: Store, record: DecisionRecord) -> None:
    """Append a decision and apply its effect.

    Raises without touching the log if the payload cannot be applied, so a
    failed decision leaves the store exactly as it was.
    """
    payload = record.payload
    if record.kind == "approve-merge":
        if "percept_id" not in payload or "target" not in payload:
            raise DecisionError("approve-merge needs percept_id and target")
        percepts.apply_merge(store, payload["percept_id"], payload["target"], decision=record)
        if store.taxonomy.is_built():
            rebuild(store)
    elif record.kind == "set-succession":
        _apply_set_succession(store, record)
    elif record.kind == "assign-label":
        if "node_id" not in payload or "language" not in payload:
            raise DecisionError("assign-label needs node_id and language")
        synset = Synset(
            language=payload["language"],
            lemmas=tuple(payload.get("lemmas", ())),
            gloss=payload.get("gloss", "") or "",
        )
        lexicon.assign_label(store, payload["node_id"], payload["language"], synset, decision=record)
    elif record.kind == "confirm-mapping":
        if "sc_id" not in payload or "concept_id" not in payload:
            raise DecisionError("confirm-mapping needs sc_id and concept_id")
        notation.confirm_mapping(store, payload["sc_id"], int(payload["concept_id"]), record)
    elif record.kind == "resolve-violation":
        _apply_resolve_violation(store, record)
    else:  # pragma: no cover - guarded by DecisionRecord construction
        raise DecisionError(f"unknown decision kind: {record.kind!r}")
    store.decisions.append(record)


def record_and_apply(
    store: Store,
    kind: str,
    payload: dict[str, Any],
    author: str = "cli",
    timestamp: int | None = None,
) -> DecisionRecord:
    """Mint the next decision id, apply, and append.

    CLI decisions default to a deterministic timestamp (the log position) so
    that scripted pipelines export byte-identically run after run.
    """
    record = DecisionRecord(
        decision_id=store.next_decision_id(),
        kind=kind,
        payload=payload,
        author=author,
        timestamp=len(store.decisions) if timestamp is None else timestamp,
    )
    apply_decision(store, record)
    return record
