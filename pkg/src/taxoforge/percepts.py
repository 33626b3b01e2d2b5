"""Pre-idea stage: encounters to pure percepts to the apperception mass.

An encounter yields one visual frame and one pure percept whose signature is
the encounter's (bucketed) observation set.  Percepts with a signature
identical to an existing concept's intension are associated automatically;
anything else within the similarity threshold queues a merge proposal for
the curator, and whatever is still unmerged when the ingest session closes
becomes its own substance concept so that every observation stays
classifiable.
"""

from __future__ import annotations

import logging

from .model import (
    DecisionRecord,
    EncounterRecord,
    ForgeError,
    ObsSet,
    PendingMerge,
    PurePercept,
    SubstanceConcept,
    VisualFrame,
    VisualObject,
)
from .store import Store

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.8

NEW_CONCEPT = "NEW"


def jaccard(a: ObsSet, b: ObsSet) -> float:
    """Similarity of two signatures over (characteristic, value) pairs."""
    if not a and not b:
        return 1.0
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def ingest_encounter(store: Store, record: EncounterRecord) -> PurePercept:
    """Validate one encounter, bucket its values, and deposit a pure percept.

    Rejects empty observation sets, unregistered characteristics, out-of-domain
    values, and duplicate encounter ids.
    """
    if record.encounter_id in store.encounters:
        raise ForgeError(f"duplicate encounter id: {record.encounter_id}")
    if not record.observations:
        raise ForgeError(f"encounter {record.encounter_id} has no observations")
    names = [n for n, _ in record.observations]
    if len(names) != len(set(names)):
        raise ForgeError(f"encounter {record.encounter_id} repeats a characteristic")

    bucketed: set[tuple[str, str]] = set()
    for name, raw in record.observations:
        ch = store.characteristics.get(name)
        if ch is None:
            raise ForgeError(f"unknown characteristic: {name!r}")
        bucketed.add((name, ch.bucket(raw)))

    store.encounters[record.encounter_id] = record
    signature = frozenset(bucketed)
    frame = VisualFrame(
        frame_id=f"fr-{record.encounter_id}",
        encounter_id=record.encounter_id,
        observations=signature,
    )
    percept = PurePercept(
        percept_id=f"pp-{record.encounter_id}",
        encounter_id=record.encounter_id,
        signature=signature,
    )
    store.frames[frame.frame_id] = frame
    store.percepts[percept.percept_id] = percept
    return percept


def propose_merges(
    store: Store, percept: PurePercept, threshold: float = DEFAULT_THRESHOLD
) -> list[tuple[SubstanceConcept, float]]:
    """Candidate concepts whose intension is Jaccard-similar to the percept.

    Sorted by descending score, ties broken by ascending sc_id.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ForgeError(f"threshold must be in [0, 1], got {threshold}")
    scored = [
        (sc, jaccard(percept.signature, sc.intension))
        for sc in store.leaf_concepts()
    ]
    hits = [(sc, score) for sc, score in scored if score >= threshold]
    hits.sort(key=lambda item: (-item[1], item[0].sc_id))
    return hits


def _concept_from_percept(store: Store, percept: PurePercept) -> SubstanceConcept:
    vo = VisualObject(
        object_id=f"vo-{percept.encounter_id}",
        frames=(f"fr-{percept.encounter_id}",),
        signature=percept.signature,
    )
    store.visual_objects[vo.object_id] = vo
    sc = SubstanceConcept(
        sc_id=f"sc-{percept.encounter_id}",
        visual_objects=frozenset({vo.object_id}),
        intension=percept.signature,
        extension=frozenset({store.encounters[percept.encounter_id].media_ref}),
        provenance=({"event": "founded", "percept_id": percept.percept_id},),
    )
    store.substance_concepts[sc.sc_id] = sc
    return sc


def _singleton_home(store: Store, percept: PurePercept) -> str | None:
    """The concept founded by this percept at session close, if it exists."""
    sc_id = f"sc-{percept.encounter_id}"
    sc = store.substance_concepts.get(sc_id)
    if sc and f"vo-{percept.encounter_id}" in sc.visual_objects:
        return sc_id
    return None


def _percept_vo(store: Store, percept_id: str) -> str | None:
    """The visual object holding this percept's frame, if any."""
    percept = store.percepts.get(percept_id)
    if percept is None:
        return None
    frame_id = f"fr-{percept.encounter_id}"
    for vo in store.visual_objects.values():
        if frame_id in vo.frames:
            return vo.object_id
    return None


def _recompute(store: Store, sc: SubstanceConcept) -> SubstanceConcept:
    intension = frozenset.intersection(
        *(store.visual_objects[v].signature for v in sc.visual_objects)
    )
    media = set()
    for v in sc.visual_objects:
        for fid in store.visual_objects[v].frames:
            media.add(store.encounters[store.frames[fid].encounter_id].media_ref)
    updated = SubstanceConcept(
        sc_id=sc.sc_id,
        visual_objects=sc.visual_objects,
        intension=intension,
        extension=frozenset(media),
        provenance=sc.provenance,
        synthetic=sc.synthetic,
    )
    store.substance_concepts[sc.sc_id] = updated
    if not intension:
        log.warning("concept %s now has an empty intension; flag for curators", sc.sc_id)
    return updated


def apply_merge(
    store: Store,
    percept_id: str,
    target: str,
    decision: DecisionRecord | None = None,
    auto: bool = False,
) -> SubstanceConcept:
    """Associate a percept with a concept (or found a new one).

    ``target`` is an existing sc_id or ``NEW``.  Non-automatic merges require
    an approve-merge decision; merges at similarity 1.0 may pass ``auto=True``.
    """
    percept = store.percepts.get(percept_id)
    if percept is None:
        raise ForgeError(f"stale percept id: {percept_id}")
    if not auto:
        if decision is None or decision.kind != "approve-merge":
            raise ForgeError("merge requires an approve-merge decision")

    store.pending_merges = [pm for pm in store.pending_merges if pm.percept_id != percept_id]

    if target == NEW_CONCEPT:
        home = _singleton_home(store, percept)
        if home:
            return store.substance_concepts[home]  # already its own concept
        if _percept_vo(store, percept_id):
            raise ForgeError(f"stale percept id: {percept_id} (already merged)")
        return _concept_from_percept(store, percept)

    sc = store.substance_concepts.get(target)
    if sc is None or sc.synthetic:
        raise ForgeError(f"merge target does not exist: {target}")

    home = _singleton_home(store, percept)
    existing_vo = _percept_vo(store, percept_id)
    if home == target or (existing_vo is not None and existing_vo in sc.visual_objects):
        return sc  # confirming the percept where it already lives
    if existing_vo is not None and home is None:
        raise ForgeError(f"stale percept id: {percept_id} (already merged)")

    if home is not None:
        # Move the percept's visual object out of its session-close singleton.
        vo_id = f"vo-{percept.encounter_id}"
        del store.substance_concepts[home]
    else:
        vo = VisualObject(
            object_id=f"vo-{percept.encounter_id}",
            frames=(f"fr-{percept.encounter_id}",),
            signature=percept.signature,
        )
        store.visual_objects[vo.object_id] = vo
        vo_id = vo.object_id

    merged = SubstanceConcept(
        sc_id=sc.sc_id,
        visual_objects=sc.visual_objects | {vo_id},
        intension=sc.intension,
        extension=sc.extension,
        provenance=sc.provenance
        + ({"event": "merged", "percept_id": percept_id, "auto": "yes" if auto else "no"},),
        synthetic=False,
    )
    store.substance_concepts[sc.sc_id] = merged
    return _recompute(store, merged)


def ingest_session(
    store: Store,
    records: list[EncounterRecord],
    threshold: float = DEFAULT_THRESHOLD,
    auto_only: bool = False,
) -> dict[str, int]:
    """Ingest a batch of encounters in file order.

    Signature-identical percepts merge automatically; sub-identical matches at
    or above the threshold queue proposals unless ``auto_only``; at session
    close every unmerged percept founds its own concept (it stays in the
    pending queue so a curator may still fold it into a candidate later).
    """
    stats = {"encounters": 0, "auto_merged": 0, "queued": 0, "new_concepts": 0}
    queued: list[PurePercept] = []
    for record in records:
        percept = ingest_encounter(store, record)
        stats["encounters"] += 1
        candidates = propose_merges(store, percept, threshold)
        if candidates and candidates[0][1] == 1.0:
            apply_merge(store, percept.percept_id, candidates[0][0].sc_id, auto=True)
            stats["auto_merged"] += 1
        elif candidates and not auto_only:
            # Ambiguous: wait for the curator, but keep the percept in play.
            store.pending_merges.append(
                PendingMerge(
                    percept_id=percept.percept_id,
                    candidates=tuple((sc.sc_id, score) for sc, score in candidates),
                )
            )
            queued.append(percept)
            stats["queued"] += 1
        else:
            _concept_from_percept(store, percept)
            stats["new_concepts"] += 1
    # Session close: queued percepts never merged become their own concepts
    # (they stay pending so a curator can still fold them into a candidate).
    for percept in queued:
        if _percept_vo(store, percept.percept_id) is None:
            _concept_from_percept(store, percept)
            stats["new_concepts"] += 1
    return stats


def superordinate_signature(
    store: Store, children: list[SubstanceConcept], sc_id: str
) -> SubstanceConcept:
    """Synthesize the concept of a non-leaf class from its children.

    Visual objects are the disjoint union of the children's, the extension is
    the union of extensions, and the intension the intersection of intensions:
    more abstract classes are perceived only through their subclasses' media.
    """
    if not children:
        raise ForgeError("superordinate signature needs at least one child")
    vos: set[str] = set()
    for child in children:
        vos |= child.visual_objects
    intension = frozenset.intersection(*(c.intension for c in children))
    extension = frozenset().union(*(c.extension for c in children))
    return SubstanceConcept(
        sc_id=sc_id,
        visual_objects=frozenset(vos),
        intension=intension,
        extension=extension,
        provenance=({"event": "synthesized", "children": ",".join(sorted(c.sc_id for c in children))},),
        synthetic=True,
    )
