"""Curation service: JSON-over-HTTP facade for the expert-in-the-loop flow.

Reads are side-effect free; every state change flows through
POST /api/decisions, which appends a DecisionRecord, applies it to a working
copy, rebuilds/audits what it invalidated, and persists atomically (a failed
decision leaves the store bit-identical).  Optimistic concurrency: each GET
echoes the store revision and each POST must present it; stale posts get 409.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response
from pydantic import BaseModel, Field

from . import hierarchy, lexicon
from .audit import audit_all
from .decisions import apply_decision
from .model import BuildPurpose, DecisionRecord, ForgeError, obs_to_mapping
from .store import Store, export_bytes, load, save


class DecisionIn(BaseModel):
    revision: str
    kind: Literal[
        "approve-merge",
        "set-succession",
        "resolve-violation",
        "assign-label",
        "confirm-mapping",
    ]
    payload: dict[str, Any] = Field(default_factory=dict)
    author: str = "curator"


def _node_payload(store: Store, node_id: str) -> dict[str, Any]:
    node = store.taxonomy.nodes[node_id]
    sc = store.substance_concepts.get(node.sc_ref)
    concept = store.concepts.for_node(node_id)
    concept_id = concept.concept_id if concept else None
    return {
        "node_id": node.node_id,
        "parent": node.parent,
        "children": list(node.children),
        "differentia": (
            {"characteristic": node.differentia[0], "value": node.differentia[1]}
            if node.differentia
            else None
        ),
        "rank": node.rank,
        "rank_label": node.rank_label,
        "basic_category": node.basic_category,
        "sc_ref": node.sc_ref,
        "media_refs": sorted(sc.extension) if sc else [],
        "intension": obs_to_mapping(sc.intension) if sc else {},
        "concept_id": concept_id,
        "lemmas": {
            lang: lex.entries[node_id].preferred
            for lang, lex in sorted(store.lexicons.items())
            if node_id in lex.entries
        },
    }


def create_app(store_dir: Path | str) -> FastAPI:
    store_dir = Path(store_dir)
    app = FastAPI(title="taxoforge curation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = {"store": load(store_dir) if store_dir.is_dir() else Store(path=store_dir)}
    write_lock = threading.Lock()

    def store() -> Store:
        return state["store"]

    @app.get("/api/taxonomy")
    def get_taxonomy() -> dict[str, Any]:
        s = store()
        tax = s.taxonomy
        return {
            "revision": s.revision(),
            "root": tax.root,
            "purpose": tax.plan.purpose.purpose_id if tax.plan else None,
            "nodes": [_node_payload(s, n.node_id) for n in tax.preorder()],
        }

    @app.get("/api/violations")
    def get_violations() -> dict[str, Any]:
        s = store()
        return {"revision": s.revision(), "report": audit_all(s).to_dict()}

    @app.get("/api/merges/pending")
    def get_pending() -> dict[str, Any]:
        s = store()
        pending = []
        for pm in s.pending_merges:
            percept = s.percepts.get(pm.percept_id)
            pending.append(
                {
                    "percept_id": pm.percept_id,
                    "signature": obs_to_mapping(percept.signature) if percept else {},
                    "candidates": [{"sc_id": c, "score": score} for c, score in pm.candidates],
                }
            )
        return {"revision": s.revision(), "pending": pending}

    @app.get("/api/succession/candidates")
    def get_candidates(purpose_id: str | None = None) -> dict[str, Any]:
        s = store()
        plan = s.taxonomy.plan
        if purpose_id is None:
            if plan is None:
                raise HTTPException(status_code=422, detail="no purpose known; pass ?purpose_id=")
            purpose = plan.purpose
        elif plan is not None and plan.purpose.purpose_id == purpose_id:
            purpose = plan.purpose
        else:
            purpose = BuildPurpose(purpose_id=purpose_id, relevance_tag=purpose_id)
        universe = s.leaf_concepts()
        candidates = []
        for c in sorted(s.characteristics.values(), key=lambda c: c.name):
            gate = (
                hierarchy.gate_characteristic(c, purpose, universe) if universe else []
            )
            candidates.append(
                {
                    "name": c.name,
                    "partition_count": hierarchy.partition_count(universe, c.name),
                    "gate": [v.to_dict() for v in gate],
                    "passes": not gate,
                }
            )
        return {
            "revision": s.revision(),
            "purpose_id": purpose.purpose_id,
            "candidates": candidates,
        }

    @app.get("/api/projection/{lang}")
    def get_projection(lang: str) -> dict[str, Any]:
        s = store()
        if lang not in s.lexicons:
            raise HTTPException(status_code=404, detail=f"no lexicon for language {lang!r}")
        try:
            projection = lexicon.project_language(s, lang)
        except ForgeError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        projection["revision"] = s.revision()
        return projection

    @app.get("/api/export")
    def get_export() -> Response:
        return Response(content=export_bytes(store()), media_type="application/json")

    @app.post("/api/decisions")
    def post_decision(decision: DecisionIn) -> dict[str, Any]:
        with write_lock:
            s = store()
            current = s.revision()
            if decision.revision != current:
                raise HTTPException(
                    status_code=409,
                    detail=f"stale revision {decision.revision}; current is {current}",
                )
            work = s.clone()
            record = DecisionRecord(
                decision_id=work.next_decision_id(),
                kind=decision.kind,
                payload=decision.payload,
                author=decision.author,
                timestamp=int(time.time() * 1000),
            )
            try:
                apply_decision(work, record)
            except ForgeError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            save(work, store_dir)
            state["store"] = work
            report = audit_all(work)
            return {
                "revision": work.revision(),
                "decision_id": record.decision_id,
                "errors": report.errors,
                "warnings": report.warnings,
            }

    return app
