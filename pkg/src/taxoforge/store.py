"""Store directory: canonical persistence for the whole data model.

Layout (UTF-8, LF, keys sorted, collections sorted by id):

    characteristics.json     registry of outer characteristics
    encounters.jsonl         one EncounterRecord per line
    substance_concepts.json  percepts, frames, visual objects, concepts, queue
    taxonomy.json            nodes + the succession plan that built them
    lexicon.<lang>.json      per-language synsets keyed by node_id
    concepts.json            classification concepts + id counter
    decisions.jsonl          append-only decision log

Byte-determinism of `export_bytes` is a contract: identical inputs and
identical decision logs must produce identical bytes.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from .model import (
    ERROR,
    Characteristic,
    ClassificationConcept,
    DecisionRecord,
    EncounterRecord,
    ForgeError,
    CanonViolation,
    PendingMerge,
    PurePercept,
    StoreError,
    SubstanceConcept,
    SuccessionPlan,
    Synset,
    TaxonomyNode,
    VisualFrame,
    VisualObject,
    canonical_json,
    canonical_line,
    obs_from_mapping,
    obs_to_mapping,
    violation,
)

LEXICON_PREFIX = "lexicon."
LOCK_NAME = ".lock"


@dataclass
class Lexicon:
    language: str
    entries: dict[str, Synset] = field(default_factory=dict)
    deprecated: frozenset[str] = frozenset()


@dataclass
class Taxonomy:
    root: str | None = None
    nodes: dict[str, TaxonomyNode] = field(default_factory=dict)
    plan: SuccessionPlan | None = None

    def is_built(self) -> bool:
        return self.root is not None and bool(self.nodes)

    def chain_to(self, node_id: str) -> list[str]:
        """Root-to-node path of node ids."""
        path: list[str] = []
        cur: str | None = node_id
        seen = 0
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent
            seen += 1
            if seen > len(self.nodes) + 1:
                raise StoreError("parent cycle in taxonomy")
        path.reverse()
        return path

    def leaves(self) -> list[TaxonomyNode]:
        return [n for n in self.nodes.values() if not n.children]

    def is_ancestor(self, a: str, b: str) -> bool:
        """True iff a is a proper ancestor of b."""
        cur = self.nodes[b].parent
        while cur is not None:
            if cur == a:
                return True
            cur = self.nodes[cur].parent
        return False

    def preorder(self) -> Iterator[TaxonomyNode]:
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))


@dataclass
class ConceptStore:
    """Concept table as rows, not a map: corruption (duplicate ids, one node
    with two rows) must stay representable so the canon checks can see it."""

    rows: list[ClassificationConcept] = field(default_factory=list)
    next_id: int = 1

    def get(self, concept_id: int) -> ClassificationConcept | None:
        for row in self.rows:
            if row.concept_id == concept_id:
                return row
        return None

    def for_node(self, node_ref: str) -> ClassificationConcept | None:
        for row in self.rows:
            if row.node_ref == node_ref:
                return row
        return None


@dataclass
class Store:
    """In-memory image of a store directory."""

    path: Path | None = None
    characteristics: dict[str, Characteristic] = field(default_factory=dict)
    encounters: dict[str, EncounterRecord] = field(default_factory=dict)
    percepts: dict[str, PurePercept] = field(default_factory=dict)
    frames: dict[str, VisualFrame] = field(default_factory=dict)
    visual_objects: dict[str, VisualObject] = field(default_factory=dict)
    substance_concepts: dict[str, SubstanceConcept] = field(default_factory=dict)
    pending_merges: list[PendingMerge] = field(default_factory=list)
    taxonomy: Taxonomy = field(default_factory=Taxonomy)
    lexicons: dict[str, Lexicon] = field(default_factory=dict)
    concepts: ConceptStore = field(default_factory=ConceptStore)
    decisions: list[DecisionRecord] = field(default_factory=list)

    # -- derived views ------------------------------------------------------

    def leaf_concepts(self) -> list[SubstanceConcept]:
        """The leaf universe: every non-synthetic substance concept."""
        return sorted(
            (sc for sc in self.substance_concepts.values() if not sc.synthetic),
            key=lambda sc: sc.sc_id,
        )

    def node_concept(self, node: TaxonomyNode) -> SubstanceConcept:
        try:
            return self.substance_concepts[node.sc_ref]
        except KeyError:
            raise StoreError(f"node {node.node_id} references missing concept {node.sc_ref}")

    def next_decision_id(self) -> str:
        return f"d-{len(self.decisions) + 1:06d}"

    def revision(self) -> str:
        return hashlib.sha256(export_bytes(self)).hexdigest()[:12]

    def clone(self) -> "Store":
        return copy.deepcopy(self)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _sc_to_dict(sc: SubstanceConcept) -> dict[str, Any]:
    return {
        "sc_id": sc.sc_id,
        "visual_objects": sorted(sc.visual_objects),
        "intension": obs_to_mapping(sc.intension),
        "extension": sorted(sc.extension),
        "provenance": list(sc.provenance),
        "synthetic": sc.synthetic,
    }


def _sc_from_dict(data: dict[str, Any]) -> SubstanceConcept:
    return SubstanceConcept(
        sc_id=data["sc_id"],
        visual_objects=frozenset(data["visual_objects"]),
        intension=obs_from_mapping(data["intension"]),
        extension=frozenset(data["extension"]),
        provenance=tuple(dict(p) for p in data.get("provenance", ())),
        synthetic=bool(data.get("synthetic", False)),
    )


def _node_to_dict(n: TaxonomyNode) -> dict[str, Any]:
    return {
        "node_id": n.node_id,
        "sc_ref": n.sc_ref,
        "parent": n.parent,
        "differentia": (
            {"characteristic": n.differentia[0], "value": n.differentia[1]}
            if n.differentia
            else None
        ),
        "rank": n.rank,
        "children": list(n.children),
        "split_characteristic": n.split_characteristic,
        "rank_label": n.rank_label,
        "basic_category": n.basic_category,
    }


def _node_from_dict(data: dict[str, Any]) -> TaxonomyNode:
    diff = data.get("differentia")
    return TaxonomyNode(
        node_id=data["node_id"],
        sc_ref=data["sc_ref"],
        parent=data.get("parent"),
        differentia=(diff["characteristic"], diff["value"]) if diff else None,
        rank=int(data.get("rank", 0)),
        children=tuple(data.get("children", ())),
        split_characteristic=data.get("split_characteristic"),
        rank_label=data.get("rank_label"),
        basic_category=bool(data.get("basic_category", False)),
    )


def _mass_to_dict(store: Store) -> dict[str, Any]:
    return {
        "percepts": [
            {
                "percept_id": p.percept_id,
                "encounter_id": p.encounter_id,
                "signature": obs_to_mapping(p.signature),
            }
            for p in sorted(store.percepts.values(), key=lambda p: p.percept_id)
        ],
        "frames": [
            {
                "frame_id": f.frame_id,
                "encounter_id": f.encounter_id,
                "observations": obs_to_mapping(f.observations),
            }
            for f in sorted(store.frames.values(), key=lambda f: f.frame_id)
        ],
        "visual_objects": [
            {
                "object_id": v.object_id,
                "frames": list(v.frames),
                "signature": obs_to_mapping(v.signature),
            }
            for v in sorted(store.visual_objects.values(), key=lambda v: v.object_id)
        ],
        "substance_concepts": [
            _sc_to_dict(sc)
            for sc in sorted(store.substance_concepts.values(), key=lambda s: s.sc_id)
        ],
        "pending_merges": [
            {
                "percept_id": pm.percept_id,
                "candidates": [{"sc_id": c, "score": s} for c, s in pm.candidates],
            }
            for pm in sorted(store.pending_merges, key=lambda pm: pm.percept_id)
        ],
    }


def _mass_from_dict(store: Store, data: dict[str, Any]) -> None:
    for p in data.get("percepts", ()):
        store.percepts[p["percept_id"]] = PurePercept(
            percept_id=p["percept_id"],
            encounter_id=p["encounter_id"],
            signature=obs_from_mapping(p["signature"]),
        )
    for f in data.get("frames", ()):
        store.frames[f["frame_id"]] = VisualFrame(
            frame_id=f["frame_id"],
            encounter_id=f["encounter_id"],
            observations=obs_from_mapping(f["observations"]),
        )
    for v in data.get("visual_objects", ()):
        store.visual_objects[v["object_id"]] = VisualObject(
            object_id=v["object_id"],
            frames=tuple(v["frames"]),
            signature=obs_from_mapping(v["signature"]),
        )
    for s in data.get("substance_concepts", ()):
        store.substance_concepts[s["sc_id"]] = _sc_from_dict(s)
    for pm in data.get("pending_merges", ()):
        store.pending_merges.append(
            PendingMerge(
                percept_id=pm["percept_id"],
                candidates=tuple((c["sc_id"], float(c["score"])) for c in pm["candidates"]),
            )
        )


def _taxonomy_to_dict(tax: Taxonomy) -> dict[str, Any]:
    return {
        "root": tax.root,
        "nodes": [_node_to_dict(n) for n in sorted(tax.nodes.values(), key=lambda n: n.node_id)],
        "plan": tax.plan.to_dict() if tax.plan else None,
    }


def _taxonomy_from_dict(data: dict[str, Any]) -> Taxonomy:
    tax = Taxonomy(root=data.get("root"))
    for n in data.get("nodes", ()):
        node = _node_from_dict(n)
        tax.nodes[node.node_id] = node
    plan = data.get("plan")
    tax.plan = SuccessionPlan.from_dict(plan) if plan else None
    return tax


def _lexicon_to_dict(lex: Lexicon) -> dict[str, Any]:
    return {
        "language": lex.language,
        "deprecated": sorted(lex.deprecated),
        "entries": {
            node_id: {"lemmas": list(syn.lemmas), "gloss": syn.gloss}
            for node_id, syn in sorted(lex.entries.items())
        },
    }


def _lexicon_from_dict(data: dict[str, Any]) -> Lexicon:
    lang = data["language"]
    entries = {
        node_id: Synset(language=lang, lemmas=tuple(e["lemmas"]), gloss=e.get("gloss", ""))
        for node_id, e in data.get("entries", {}).items()
    }
    return Lexicon(language=lang, entries=entries, deprecated=frozenset(data.get("deprecated", ())))


def _concepts_to_dict(cs: ConceptStore) -> dict[str, Any]:
    return {
        "concepts": [
            {"concept_id": c.concept_id, "node_ref": c.node_ref, "mapped_sc": c.mapped_sc}
            for c in sorted(cs.rows, key=lambda c: (c.concept_id, c.node_ref))
        ],
        "next_id": cs.next_id,
    }


def _concepts_from_dict(data: dict[str, Any]) -> ConceptStore:
    cs = ConceptStore(next_id=int(data.get("next_id", 1)))
    for c in data.get("concepts", ()):
        cs.rows.append(
            ClassificationConcept(
                concept_id=int(c["concept_id"]),
                node_ref=c["node_ref"],
                mapped_sc=c.get("mapped_sc"),
            )
        )
    return cs


def export_doc(store: Store) -> dict[str, Any]:
    """The full store as one canonical JSON document."""
    return {
        "characteristics": [
            c.to_dict() for c in sorted(store.characteristics.values(), key=lambda c: c.name)
        ],
        "encounters": [
            e.to_dict() for e in sorted(store.encounters.values(), key=lambda e: e.encounter_id)
        ],
        "mass": _mass_to_dict(store),
        "taxonomy": _taxonomy_to_dict(store.taxonomy),
        "lexicons": {lang: _lexicon_to_dict(lex) for lang, lex in sorted(store.lexicons.items())},
        "concepts": _concepts_to_dict(store.concepts),
        "decisions": [d.to_dict() for d in store.decisions],
    }


def export_bytes(store: Store) -> bytes:
    return canonical_json(export_doc(store)).encode("utf-8")


def import_doc(doc: dict[str, Any]) -> Store:
    """Inverse of export_doc: load a store from its canonical document."""
    store = Store()
    for c in doc.get("characteristics", ()):
        ch = Characteristic.from_dict(c)
        store.characteristics[ch.name] = ch
    for e in doc.get("encounters", ()):
        rec = EncounterRecord.from_dict(e)
        store.encounters[rec.encounter_id] = rec
    _mass_from_dict(store, doc.get("mass", {}))
    store.taxonomy = _taxonomy_from_dict(doc.get("taxonomy", {}))
    for lang, lex in doc.get("lexicons", {}).items():
        store.lexicons[lang] = _lexicon_from_dict(lex)
    store.concepts = _concepts_from_dict(doc.get("concepts", {}))
    for d in doc.get("decisions", ()):
        store.decisions.append(DecisionRecord.from_dict(d))
    return store


# ---------------------------------------------------------------------------
# Directory I/O
# ---------------------------------------------------------------------------


def save(store: Store, path: Path | None = None) -> None:
    target = Path(path) if path is not None else store.path
    if target is None:
        raise StoreError("store has no directory to save to")
    target.mkdir(parents=True, exist_ok=True)
    store.path = target

    doc = export_doc(store)
    _write(target / "characteristics.json", canonical_json(doc["characteristics"]))
    _write(
        target / "encounters.jsonl",
        "".join(canonical_line(e) for e in doc["encounters"]),
    )
    _write(target / "substance_concepts.json", canonical_json(doc["mass"]))
    _write(target / "taxonomy.json", canonical_json(doc["taxonomy"]))
    _write(target / "concepts.json", canonical_json(doc["concepts"]))
    _write(
        target / "decisions.jsonl",
        "".join(canonical_line(d) for d in doc["decisions"]),
    )
    wanted = {f"{LEXICON_PREFIX}{lang}.json" for lang in store.lexicons}
    for stale in target.glob(f"{LEXICON_PREFIX}*.json"):
        if stale.name not in wanted:
            stale.unlink()
    for lang, lex in store.lexicons.items():
        _write(target / f"{LEXICON_PREFIX}{lang}.json", canonical_json(doc["lexicons"][lang]))


def load(path: Path) -> Store:
    path = Path(path)
    if not path.is_dir():
        raise StoreError(f"store directory not found: {path}")
    store = Store(path=path)
    try:
        for c in _read_json(path / "characteristics.json", default=[]):
            ch = Characteristic.from_dict(c)
            store.characteristics[ch.name] = ch
        for line in _read_lines(path / "encounters.jsonl"):
            rec = EncounterRecord.from_dict(json.loads(line))
            store.encounters[rec.encounter_id] = rec
        _mass_from_dict(store, _read_json(path / "substance_concepts.json", default={}))
        store.taxonomy = _taxonomy_from_dict(_read_json(path / "taxonomy.json", default={}))
        store.concepts = _concepts_from_dict(_read_json(path / "concepts.json", default={}))
        for line in _read_lines(path / "decisions.jsonl"):
            store.decisions.append(DecisionRecord.from_dict(json.loads(line)))
        for lex_path in sorted(path.glob(f"{LEXICON_PREFIX}*.json")):
            lex = _lexicon_from_dict(_read_json(lex_path, default={}))
            store.lexicons[lex.language] = lex
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise StoreError(f"unreadable store at {path}: {exc}") from exc
    return store


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _read_json(path: Path, default: Any) -> Any:
    if not path.exists():
        return default
    return json.loads(path.read_text(encoding="utf-8"))


def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        return []
    return [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


class StoreLock:
    """One process per store directory; taken for every write command."""

    def __init__(self, path: Path) -> None:
        self.lock_path = Path(path) / LOCK_NAME
        self._held = False

    def __enter__(self) -> "StoreLock":
        self.lock_path.parent.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreError(f"store is locked by another writer: {self.lock_path}")
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        self._held = True
        return self

    def __exit__(self, *exc: Any) -> None:
        if self._held:
            try:
                self.lock_path.unlink()
            except FileNotFoundError:
                pass
            self._held = False


# ---------------------------------------------------------------------------
# Whole-store validation
# ---------------------------------------------------------------------------


def validate_store(store: Store) -> list[CanonViolation]:
    """Check every type invariant of the data model.

    Returns one store-integrity violation per breach; an empty list means the
    store is internally consistent.  Load failures raise StoreError instead.
    """
    out: list[CanonViolation] = []

    def bad(location: str, explanation: str) -> None:
        out.append(violation("store-integrity", location, explanation, severity=ERROR))

    # Encounters
    for enc in store.encounters.values():
        if not enc.observations:
            bad(enc.encounter_id, "encounter has no observations")
        names = [n for n, _ in enc.observations]
        if len(names) != len(set(names)):
            bad(enc.encounter_id, "duplicate characteristic in one encounter")

    # Frames belong to exactly one encounter
    for f in store.frames.values():
        if f.encounter_id not in store.encounters:
            bad(f.frame_id, f"frame references missing encounter {f.encounter_id}")

    # Visual objects: non-empty frames, signature = intersection of members
    for vo in store.visual_objects.values():
        if not vo.frames:
            bad(vo.object_id, "visual object has no frames")
            continue
        missing = [fid for fid in vo.frames if fid not in store.frames]
        if missing:
            bad(vo.object_id, f"visual object references missing frames {missing}")
            continue
        sig = frozenset.intersection(*(store.frames[fid].observations for fid in vo.frames))
        if sig != vo.signature:
            bad(vo.object_id, "signature is not the intersection of member frames")

    # Substance concepts; synthetic (superordinate) concepts legitimately
    # share their children's visual objects, leaf concepts must not.
    vo_owner: dict[str, str] = {}
    for sc in store.substance_concepts.values():
        if not sc.visual_objects:
            bad(sc.sc_id, "substance concept has no visual objects")
            continue
        missing = sorted(v for v in sc.visual_objects if v not in store.visual_objects)
        if missing:
            bad(sc.sc_id, f"substance concept references missing visual objects {missing}")
            continue
        if not sc.synthetic:
            for v in sc.visual_objects:
                if v in vo_owner:
                    bad(sc.sc_id, f"visual object {v} is shared with {vo_owner[v]}")
                vo_owner[v] = sc.sc_id
        intension = frozenset.intersection(
            *(store.visual_objects[v].signature for v in sc.visual_objects)
        )
        if intension != sc.intension:
            bad(sc.sc_id, "intension is not the intersection of member signatures")
        media = set()
        for v in sc.visual_objects:
            for fid in store.visual_objects[v].frames:
                enc_id = store.frames[fid].encounter_id
                if enc_id in store.encounters:
                    media.add(store.encounters[enc_id].media_ref)
        if frozenset(media) != sc.extension:
            bad(sc.sc_id, "extension is not the union of member encounters' media")

    # Characteristics registry
    for ch in store.characteristics.values():
        if not ch.value_domain.labels():
            bad(ch.name, "characteristic has an empty value domain")

    # Taxonomy
    tax = store.taxonomy
    if tax.nodes:
        roots = [n for n in tax.nodes.values() if n.parent is None]
        if len(roots) != 1:
            bad("taxonomy", f"expected exactly one root, found {len(roots)}")
        elif tax.root != roots[0].node_id:
            bad("taxonomy", "declared root does not match the parentless node")
        for n in tax.nodes.values():
            if n.sc_ref not in store.substance_concepts:
                bad(n.node_id, f"node references missing substance concept {n.sc_ref}")
            for child_id in n.children:
                child = tax.nodes.get(child_id)
                if child is None:
                    bad(n.node_id, f"child {child_id} does not exist")
                    continue
                if child.parent != n.node_id:
                    bad(child_id, "parent/children links are inconsistent")
                if child.rank != n.rank + 1:
                    bad(child_id, f"rank {child.rank} is not parent rank + 1")
                if child.differentia is None:
                    bad(child_id, "non-root node lacks a differentia")
                elif n.split_characteristic and child.differentia[0] != n.split_characteristic:
                    bad(
                        child_id,
                        "differentia characteristic differs from parent's splitting characteristic",
                    )
            if n.parent is not None:
                parent = tax.nodes.get(n.parent)
                if parent is None:
                    bad(n.node_id, f"parent {n.parent} does not exist")
                elif n.node_id not in parent.children:
                    bad(n.node_id, "node missing from its parent's children")

    # Lexicons
    for lang, lex in store.lexicons.items():
        for node_id, syn in lex.entries.items():
            if not syn.lemmas:
                bad(f"{lang}:{node_id}", "synset has no lemmas")
            if len(syn.lemmas) != len(set(syn.lemmas)):
                bad(f"{lang}:{node_id}", "duplicate lemmas within one synset")
            if tax.nodes and node_id not in tax.nodes:
                bad(f"{lang}:{node_id}", "synset attached to a missing node")

    # Classification concepts: id <-> node bijection, mapping bijection
    seen_ids: dict[int, str] = {}
    seen_nodes: dict[str, int] = {}
    seen_scs: dict[str, int] = {}
    for c in store.concepts.rows:
        if c.concept_id >= store.concepts.next_id:
            bad(str(c.concept_id), "concept id is not below the mint counter")
        if c.concept_id in seen_ids:
            bad(str(c.concept_id), f"concept id assigned to two nodes ({seen_ids[c.concept_id]}, {c.node_ref})")
        seen_ids[c.concept_id] = c.node_ref
        if c.node_ref in seen_nodes:
            bad(c.node_ref, f"node holds two concept ids ({seen_nodes[c.node_ref]}, {c.concept_id})")
        seen_nodes[c.node_ref] = c.concept_id
        if tax.nodes and c.node_ref not in tax.nodes:
            bad(str(c.concept_id), f"concept references dangling node {c.node_ref}")
        if c.mapped_sc is not None:
            if c.mapped_sc in seen_scs:
                bad(
                    c.mapped_sc,
                    f"substance concept mapped to two concepts ({seen_scs[c.mapped_sc]}, {c.concept_id})",
                )
            seen_scs[c.mapped_sc] = c.concept_id
            if c.mapped_sc not in store.substance_concepts:
                bad(str(c.concept_id), f"mapping references missing substance concept {c.mapped_sc}")

    # Decisions: ids unique, kinds already validated on construction
    seen_dids = set()
    for d in store.decisions:
        if d.decision_id in seen_dids:
            bad(d.decision_id, "duplicate decision id")
        seen_dids.add(d.decision_id)

    out.sort(key=lambda v: (v.canon, v.location, v.explanation))
    return out
