"""Full-store audit: integrity, hierarchy, verbal and notational checks
merged into one deterministic report."""

from __future__ import annotations

from .hierarchy import audit_idea_plane, build_report, taxonomy_stats
from .lexicon import audit_verbal_plane
from .model import AuditReport
from .notation import check_synonym_homonym
from .store import Store, validate_store


def audit_all(store: Store) -> AuditReport:
    violations = []
    violations.extend(validate_store(store))
    violations.extend(audit_idea_plane(store))
    violations.extend(audit_verbal_plane(store))
    violations.extend(check_synonym_homonym(store))
    return build_report(violations, stats=taxonomy_stats(store))
