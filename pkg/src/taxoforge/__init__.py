"""taxoforge: a faceted taxonomy engine.

Streams of visual-property observations go in; a validated Genus-Differentia
concept hierarchy with per-language lexicalizations and stable numeric
identifiers comes out, with an executable canon auditor and an expert
curation loop in between.
"""

from .model import (
    BuildPurpose,
    CanonViolation,
    Characteristic,
    ClassificationConcept,
    DecisionRecord,
    EncounterRecord,
    ForgeError,
    PurePercept,
    StoreError,
    SubstanceConcept,
    SuccessionPlan,
    Synset,
    TaxonomyNode,
    ValueDomain,
    VisualFrame,
    VisualObject,
)
from .store import Store, load, save, validate_store

__version__ = "0.1.0"

__all__ = [
    "BuildPurpose",
    "CanonViolation",
    "Characteristic",
    "ClassificationConcept",
    "DecisionRecord",
    "EncounterRecord",
    "ForgeError",
    "PurePercept",
    "Store",
    "StoreError",
    "SubstanceConcept",
    "SuccessionPlan",
    "Synset",
    "TaxonomyNode",
    "ValueDomain",
    "VisualFrame",
    "VisualObject",
    "load",
    "save",
    "validate_store",
    "__version__",
]
