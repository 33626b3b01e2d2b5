"""Domain model for the faceted taxonomy engine.

Value objects shared by every stage of the pipeline: encounter records,
percepts and visual objects, substance concepts, taxonomy nodes, synsets,
classification concepts, decision records and canon violations.

All types are immutable once constructed; the stores create updated copies
(`dataclasses.replace`) instead of mutating in place, so instances are safe
to share across threads.

Observation sets are represented as frozensets of ``(characteristic, value)``
pairs with at most one value per characteristic.  Serialized form is a plain
JSON object with sorted keys, which keeps exports byte-deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

# One value per characteristic; values are categorical tokens after ingest.
Obs = tuple[str, str]
ObsSet = frozenset[Obs]

ERROR = "error"
WARNING = "warning"

# The thirteen checkable canons, plus the store-integrity pseudo-canon used
# by validate_store for type-invariant breaches.
CANONS = (
    "differentiation",
    "relevance",
    "ascertainability",
    "permanence",
    "relevant-succession",
    "exhaustiveness",
    "extension",
    "modulation",
    "context",
    "enumeration",
    "reticence",
    "synonym",
    "homonym",
    "store-integrity",
)

DECISION_KINDS = (
    "approve-merge",
    "set-succession",
    "resolve-violation",
    "assign-label",
    "confirm-mapping",
)


class ForgeError(Exception):
    """Base error for every engine-level failure."""


class StoreError(ForgeError):
    """Store directory is unreadable or structurally broken (load failure,
    not a canon violation)."""


class DecisionError(ForgeError):
    """A decision record cannot be applied to the current store state."""


def canonical_json(data: Any) -> str:
    """Canonical pretty JSON: sorted keys, UTF-8, LF, trailing newline."""
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def canonical_line(data: Any) -> str:
    """Canonical compact JSON line for .jsonl files."""
    return json.dumps(data, ensure_ascii=False, separators=(",", ":"), sort_keys=True) + "\n"


def obs_to_mapping(obs: ObsSet) -> dict[str, str]:
    return {name: value for name, value in sorted(obs)}


def obs_from_mapping(mapping: Mapping[str, Any]) -> ObsSet:
    return frozenset((str(k), str(v)) for k, v in mapping.items())


# ---------------------------------------------------------------------------
# Characteristics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bucket:
    """Half-open numeric range [lo, hi) mapped to a categorical label.

    The last bucket of a domain is closed on the right so the declared range
    is fully covered.
    """

    label: str
    lo: float
    hi: float


@dataclass(frozen=True)
class ValueDomain:
    """Enumerated tokens, or a numeric range with declared bucketing."""

    kind: str  # "categorical" | "numeric"
    tokens: tuple[str, ...] = ()
    buckets: tuple[Bucket, ...] = ()

    def labels(self) -> tuple[str, ...]:
        if self.kind == "categorical":
            return self.tokens
        return tuple(b.label for b in self.buckets)

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "categorical":
            return {"kind": "categorical", "tokens": list(self.tokens)}
        return {
            "kind": "numeric",
            "buckets": [{"label": b.label, "lo": b.lo, "hi": b.hi} for b in self.buckets],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ValueDomain":
        kind = data.get("kind")
        if kind == "categorical":
            return cls(kind="categorical", tokens=tuple(data["tokens"]))
        if kind == "numeric":
            buckets = tuple(Bucket(b["label"], float(b["lo"]), float(b["hi"])) for b in data["buckets"])
            return cls(kind="numeric", buckets=buckets)
        raise StoreError(f"unknown value_domain kind: {kind!r}")


@dataclass(frozen=True)
class Characteristic:
    """A named outer characteristic with its value domain and gate flags."""

    name: str
    value_domain: ValueDomain
    ascertainable: bool = True
    permanent: bool = True
    relevance_tags: frozenset[str] = frozenset()

    def bucket(self, value: Any) -> str:
        """Map a raw observed value onto a categorical label.

        Categorical domains accept their declared tokens; numeric domains
        bucket the number into the declared ranges.  Anything else is a
        rejection at ingest time.
        """
        dom = self.value_domain
        if dom.kind == "categorical":
            token = str(value)
            if token not in dom.tokens:
                raise ForgeError(
                    f"value {value!r} not in domain of characteristic {self.name!r}"
                )
            return token
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ForgeError(
                f"characteristic {self.name!r} is numeric; got {value!r}"
            )
        v = float(value)
        last = len(dom.buckets) - 1
        for i, b in enumerate(dom.buckets):
            if b.lo <= v < b.hi or (i == last and v == b.hi):
                return b.label
        raise ForgeError(
            f"value {value!r} outside declared buckets of characteristic {self.name!r}"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value_domain": self.value_domain.to_dict(),
            "ascertainable": self.ascertainable,
            "permanent": self.permanent,
            "relevance_tags": sorted(self.relevance_tags),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Characteristic":
        return cls(
            name=data["name"],
            value_domain=ValueDomain.from_dict(data["value_domain"]),
            ascertainable=bool(data.get("ascertainable", True)),
            permanent=bool(data.get("permanent", True)),
            relevance_tags=frozenset(data.get("relevance_tags", ())),
        )


# ---------------------------------------------------------------------------
# Encounters and percepts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EncounterRecord:
    """One observation event: a media reference plus characteristic=value
    observations.

    ``entity_hint`` is ground truth for test oracles only; engine code paths
    never read it.
    """

    encounter_id: str
    media_ref: str
    timestamp: int
    observations: tuple[tuple[str, Any], ...]  # raw values, pre-bucketing
    entity_hint: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "encounter_id": self.encounter_id,
            "media_ref": self.media_ref,
            "timestamp": self.timestamp,
            "observations": {k: v for k, v in sorted(self.observations)},
        }
        if self.entity_hint is not None:
            d["entity_hint"] = self.entity_hint
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EncounterRecord":
        obs = data.get("observations")
        if not isinstance(obs, Mapping):
            raise StoreError("encounter observations must be an object")
        return cls(
            encounter_id=str(data["encounter_id"]),
            media_ref=str(data["media_ref"]),
            timestamp=int(data["timestamp"]),
            observations=tuple(sorted(obs.items())),
            entity_hint=data.get("entity_hint"),
        )


@dataclass(frozen=True)
class VisualFrame:
    frame_id: str
    encounter_id: str
    observations: ObsSet


@dataclass(frozen=True)
class VisualObject:
    """A sequence of similar visual frames; its signature is the intersection
    of the member frames' observation sets."""

    object_id: str
    frames: tuple[str, ...]
    signature: ObsSet


@dataclass(frozen=True)
class PurePercept:
    """Meaningful impression from exactly one encounter."""

    percept_id: str
    encounter_id: str
    signature: ObsSet


@dataclass(frozen=True)
class SubstanceConcept:
    """Merged percept: a set of visual objects with a shared intension and
    the union of member encounters' media as extension.

    ``synthetic`` marks concepts synthesized for non-leaf taxonomy nodes
    (union of children); they are not part of the leaf universe.
    """

    sc_id: str
    visual_objects: frozenset[str]
    intension: ObsSet
    extension: frozenset[str]
    provenance: tuple[dict[str, str], ...] = ()
    synthetic: bool = False


@dataclass(frozen=True)
class PendingMerge:
    """A merge proposal awaiting curator confirmation."""

    percept_id: str
    candidates: tuple[tuple[str, float], ...]  # (sc_id, score), best first


# ---------------------------------------------------------------------------
# Taxonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaxonomyNode:
    """A class in the hierarchy.

    ``differentia`` is absent only at the root.  ``split_characteristic`` is
    the characteristic this node's children differentiate on; every child's
    differentia names it.  ``rank`` is depth (root = 0); ``rank_label`` is the
    persisted rank-scheme label assigned at build/insert time so that missing
    links stay detectable after structural mutations.
    """

    node_id: str
    sc_ref: str
    parent: str | None = None
    differentia: Obs | None = None
    rank: int = 0
    children: tuple[str, ...] = ()
    split_characteristic: str | None = None
    rank_label: str | None = None
    basic_category: bool = False


@dataclass(frozen=True)
class BuildPurpose:
    """A classification purpose: the relevance tag it gates on and the
    declared characteristic succession (may be empty = use the default)."""

    purpose_id: str
    relevance_tag: str
    succession: tuple[str, ...] = ()


@dataclass(frozen=True)
class SuccessionPlan:
    """Ordered, gate-passing characteristics for one purpose, plus per-node
    overrides and the rank scheme used for modulation labels."""

    purpose: BuildPurpose
    characteristics: tuple[str, ...]
    overrides: tuple[tuple[str, str], ...] = ()  # (node_id, characteristic)
    curated: bool = True
    rank_scheme: tuple[str, ...] = ()
    basic_rank_label: str | None = None

    def override_for(self, node_id: str) -> str | None:
        for nid, char in self.overrides:
            if nid == node_id:
                return char
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "purpose_id": self.purpose.purpose_id,
            "relevance_tag": self.purpose.relevance_tag,
            "succession": list(self.characteristics),
            "overrides": {nid: char for nid, char in sorted(self.overrides)},
            "curated": self.curated,
            "rank_scheme": list(self.rank_scheme),
            "basic_rank_label": self.basic_rank_label,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SuccessionPlan":
        purpose = BuildPurpose(
            purpose_id=data["purpose_id"],
            relevance_tag=data["relevance_tag"],
            succession=tuple(data.get("succession", ())),
        )
        return cls(
            purpose=purpose,
            characteristics=tuple(data.get("succession", ())),
            overrides=tuple(sorted((k, v) for k, v in data.get("overrides", {}).items())),
            curated=bool(data.get("curated", True)),
            rank_scheme=tuple(data.get("rank_scheme", ())),
            basic_rank_label=data.get("basic_rank_label"),
        )


# ---------------------------------------------------------------------------
# Verbal and notational planes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Synset:
    """Per-language synonym set; the first lemma is the preferred term."""

    language: str
    lemmas: tuple[str, ...]
    gloss: str = ""

    @property
    def preferred(self) -> str:
        return self.lemmas[0]


@dataclass(frozen=True)
class ClassificationConcept:
    """Notational-plane concept: a unique, never-reused numeric id bound
    one-to-one to a taxonomy node, optionally mapped one-to-one to a
    substance concept."""

    concept_id: int
    node_ref: str
    mapped_sc: str | None = None


# ---------------------------------------------------------------------------
# Violations, audit, decisions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonViolation:
    canon: str
    location: str
    severity: str  # ERROR | WARNING
    explanation: str
    suggested_fixes: tuple[dict[str, Any], ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "canon": self.canon,
            "location": self.location,
            "severity": self.severity,
            "explanation": self.explanation,
            "suggested_fixes": list(self.suggested_fixes),
        }


@dataclass(frozen=True)
class AuditReport:
    violations: tuple[CanonViolation, ...]
    counts: dict[str, int]
    audited_at: int
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def errors(self) -> int:
        return sum(1 for v in self.violations if v.severity == ERROR)

    @property
    def warnings(self) -> int:
        return sum(1 for v in self.violations if v.severity == WARNING)

    def to_dict(self) -> dict[str, Any]:
        return {
            "audited_at": self.audited_at,
            "counts": self.counts,
            "errors": self.errors,
            "warnings": self.warnings,
            "stats": self.stats,
            "violations": [v.to_dict() for v in self.violations],
        }


@dataclass(frozen=True)
class DecisionRecord:
    """One append-only curator decision; replaying the full log over the same
    inputs reproduces the same store."""

    decision_id: str
    kind: str
    payload: dict[str, Any]
    author: str = "curator"
    timestamp: int = 0

    def __post_init__(self) -> None:
        if self.kind not in DECISION_KINDS:
            raise DecisionError(f"unknown decision kind: {self.kind!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "decision_id": self.decision_id,
            "kind": self.kind,
            "payload": self.payload,
            "author": self.author,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DecisionRecord":
        return cls(
            decision_id=str(data["decision_id"]),
            kind=str(data["kind"]),
            payload=dict(data.get("payload", {})),
            author=str(data.get("author", "curator")),
            timestamp=int(data.get("timestamp", 0)),
        )


def violation(
    canon: str,
    location: str,
    explanation: str,
    severity: str = ERROR,
    fixes: tuple[dict[str, Any], ...] = (),
) -> CanonViolation:
    if canon not in CANONS:
        raise ForgeError(f"unknown canon: {canon!r}")
    return CanonViolation(
        canon=canon,
        location=location,
        severity=severity,
        explanation=explanation,
        suggested_fixes=fixes,
    )
