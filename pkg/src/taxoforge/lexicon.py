"""Verbal plane: per-language synsets and glosses over the built hierarchy.

Labeling strictly follows hierarchy construction (idea first, word next);
every language gets its own lexicon, and languages with lexical gaps project
to hierarchies of different shapes via gap contraction.
"""

from __future__ import annotations

from typing import Any, Sequence

from .model import (
    WARNING,
    CanonViolation,
    DecisionRecord,
    ForgeError,
    Synset,
    violation,
)
from .store import Lexicon, Store


def _require_taxonomy(store: Store) -> None:
    if not store.taxonomy.is_built():
        raise ForgeError(
            "taxonomy is empty: the hierarchy must be built before verbal labeling "
            "(idea first, word next)"
        )


def default_gloss(store: Store, node_id: str, language: str) -> str:
    """Genus-phrase plus differentia-phrase from the parent's preferred lemma.

    Across a lexical gap the genus falls back to the nearest labeled ancestor.
    """
    node = store.taxonomy.nodes[node_id]
    lex = store.lexicons.get(language)
    if node.parent is None or node.differentia is None:
        return ""
    genus = node.parent
    cur: str | None = node.parent
    while cur is not None:
        syn = lex.entries.get(cur) if lex else None
        if syn is not None:
            genus = syn.preferred
            break
        cur = store.taxonomy.nodes[cur].parent
    char, value = node.differentia
    return f"a {genus} with {char} = {value}"


def assign_label(
    store: Store,
    node_id: str,
    language: str,
    synset: Synset,
    decision: DecisionRecord | None = None,
) -> Synset:
    """Attach a synset to a node in one language.

    Idempotent for an identical synset; replacing an existing different synset
    requires an assign-label decision.  The gloss is auto-completed from the
    genus/differentia template when the curator supplies lemmas only.
    """
    _require_taxonomy(store)
    if node_id not in store.taxonomy.nodes:
        raise ForgeError(f"unknown node: {node_id}")
    if not synset.lemmas:
        raise ForgeError("synset must carry at least one lemma")
    if len(synset.lemmas) != len(set(synset.lemmas)):
        raise ForgeError("duplicate lemmas within one synset")

    lex = store.lexicons.setdefault(language, Lexicon(language=language))
    filled = synset
    if not synset.gloss:
        filled = Synset(language=language, lemmas=synset.lemmas, gloss=default_gloss(store, node_id, language))
    current = lex.entries.get(node_id)
    if current is not None and current != filled:
        if decision is None or decision.kind != "assign-label":
            raise ForgeError(
                f"node {node_id} already labeled in {language}; replacement requires a decision"
            )
    lex.entries[node_id] = filled
    return filled


def check_context_enumeration(store: Store, language: str) -> list[CanonViolation]:
    """A shared term is acceptable only while upper links or subclasses
    disambiguate it.

    Violation: the same preferred lemma on two nodes, neither an ancestor of
    the other, whose parents carry identical labels too.
    """
    lex = store.lexicons.get(language)
    if lex is None:
        return []
    tax = store.taxonomy
    by_lemma: dict[str, list[str]] = {}
    for node_id, syn in lex.entries.items():
        if node_id in tax.nodes:
            by_lemma.setdefault(syn.preferred, []).append(node_id)

    def parent_label(node_id: str) -> str | None:
        parent = tax.nodes[node_id].parent
        if parent is None:
            return None
        parent_syn = lex.entries.get(parent)
        return parent_syn.preferred if parent_syn else None

    out: list[CanonViolation] = []
    for lemma, node_ids in sorted(by_lemma.items()):
        if len(node_ids) < 2:
            continue
        node_ids.sort()
        for i, a in enumerate(node_ids):
            for b in node_ids[i + 1 :]:
                if tax.is_ancestor(a, b) or tax.is_ancestor(b, a):
                    continue
                if parent_label(a) == parent_label(b):
                    out.append(
                        violation(
                            "context",
                            f"{language}:{a}+{b}",
                            f"term {lemma!r} denotes two unrelated classes and neither upper "
                            f"links nor subclasses disambiguate; chains: "
                            f"{' > '.join(tax.chain_to(a))} vs {' > '.join(tax.chain_to(b))}",
                        )
                    )
    return out


def check_reticence(store: Store, language: str) -> list[CanonViolation]:
    """Preferred terms should be current domain usage: warn on deprecated
    preferred lemmas and on sibling classes sharing any lemma."""
    lex = store.lexicons.get(language)
    if lex is None:
        return []
    tax = store.taxonomy
    out: list[CanonViolation] = []
    for node_id, syn in sorted(lex.entries.items()):
        if syn.preferred in lex.deprecated:
            out.append(
                violation(
                    "reticence",
                    f"{language}:{node_id}",
                    f"preferred term {syn.preferred!r} is on the deprecated list",
                    severity=WARNING,
                )
            )
    for node in sorted(tax.nodes.values(), key=lambda n: n.node_id):
        labeled = [c for c in node.children if c in lex.entries]
        for i, a in enumerate(labeled):
            for b in labeled[i + 1 :]:
                shared = set(lex.entries[a].lemmas) & set(lex.entries[b].lemmas)
                if shared:
                    out.append(
                        violation(
                            "reticence",
                            f"{language}:{a}+{b}",
                            f"sibling classes share lemma(s) {sorted(shared)}",
                            severity=WARNING,
                        )
                    )
    return out


def project_language(store: Store, language: str) -> dict[str, Any]:
    """Per-language hierarchy with lexical gaps contracted.

    Unlabeled nodes disappear; their children reattach to the nearest labeled
    ancestor, preserving ancestor ordering among the survivors.
    """
    _require_taxonomy(store)
    lex = store.lexicons.get(language)
    if lex is None:
        raise ForgeError(f"no lexicon loaded for language {language!r}")
    tax = store.taxonomy
    if tax.root not in lex.entries:
        raise ForgeError(f"root is unlabeled in {language!r}: no projection anchor")

    survivors = [n for n in tax.preorder() if n.node_id in lex.entries]
    nearest: dict[str, str | None] = {}
    for node in survivors:
        cur = node.parent
        while cur is not None and cur not in lex.entries:
            cur = tax.nodes[cur].parent
        nearest[node.node_id] = cur

    children: dict[str, list[str]] = {n.node_id: [] for n in survivors}
    for node in survivors:  # preorder keeps sibling order stable
        anchor = nearest[node.node_id]
        if anchor is not None:
            children[anchor].append(node.node_id)

    return {
        "language": language,
        "root": tax.root,
        "nodes": {
            n.node_id: {
                "parent": nearest[n.node_id],
                "children": children[n.node_id],
                "lemmas": list(lex.entries[n.node_id].lemmas),
                "gloss": lex.entries[n.node_id].gloss,
            }
            for n in survivors
        },
    }


def audit_verbal_plane(store: Store) -> list[CanonViolation]:
    out: list[CanonViolation] = []
    for language in sorted(store.lexicons):
        out.extend(check_context_enumeration(store, language))
        out.extend(check_reticence(store, language))
    return out


def parse_lexicalize_rows(text: str) -> list[tuple[str, tuple[str, ...], str]]:
    """Rows of ``node_id,lemma|lemma[,gloss]`` for the lexicalize command."""
    rows: list[tuple[str, tuple[str, ...], str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 2:
            raise ForgeError(f"lexicalize row {lineno}: expected node_id,lemmas[,gloss]")
        lemmas = tuple(lemma.strip() for lemma in parts[1].split("|") if lemma.strip())
        gloss = parts[2] if len(parts) > 2 else ""
        rows.append((parts[0], lemmas, gloss))
    return rows
