"""forge: command-line entry point for the taxonomy pipeline.

Exit codes: 0 success, 1 failed operation or audit errors, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import decisions as decisions_mod
from . import lexicon as lexicon_mod
from . import notation as notation_mod
from . import percepts as percepts_mod
from .audit import audit_all
from .model import (
    Characteristic,
    DecisionRecord,
    EncounterRecord,
    ForgeError,
    canonical_json,
)
from .store import Lexicon, Store, StoreLock, load, save, validate_store, export_bytes

store_option = click.option(
    "--store",
    "store_dir",
    envvar="FORGE_STORE",
    default="./store",
    show_default=True,
    type=click.Path(path_type=Path),
    help="Store directory.",
)


def _load_store(store_dir: Path, must_exist: bool = False) -> Store:
    if store_dir.is_dir():
        return load(store_dir)
    if must_exist:
        raise ForgeError(f"store directory not found: {store_dir}")
    return Store(path=store_dir)


def _register_characteristics(store: Store, path: Path) -> int:
    data = json.loads(path.read_text(encoding="utf-8"))
    count = 0
    for entry in data:
        ch = Characteristic.from_dict(entry)
        store.characteristics[ch.name] = ch
        count += 1
    return count


def _read_encounters(path: Path) -> list[EncounterRecord]:
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(EncounterRecord.from_dict(json.loads(line)))
    return records


@click.group()
def main() -> None:
    """Faceted taxonomy forge: encounters in, audited concept hierarchy out."""


@main.command()
@store_option
@click.option("--encounters", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--characteristics", type=click.Path(exists=True, path_type=Path))
@click.option("--threshold", default=percepts_mod.DEFAULT_THRESHOLD, show_default=True, type=float)
@click.option("--auto-only", is_flag=True, help="Merge only exact matches; queue nothing.")
def ingest(store_dir: Path, encounters: Path, characteristics: Path | None, threshold: float, auto_only: bool) -> None:
    """Ingest an encounters.jsonl file into the apperception mass."""
    try:
        with StoreLock(store_dir):
            store = _load_store(store_dir)
            if characteristics:
                n = _register_characteristics(store, characteristics)
                click.echo(f"registered {n} characteristics")
            stats = percepts_mod.ingest_session(
                store, _read_encounters(encounters), threshold=threshold, auto_only=auto_only
            )
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    click.echo(
        f"ingested {stats['encounters']} encounters: {stats['auto_merged']} auto-merged, "
        f"{stats['queued']} queued, {stats['new_concepts']} new concepts"
    )


@main.command()
@store_option
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--purpose", "purpose_id", required=True)
def build(store_dir: Path, plan_path: Path, purpose_id: str) -> None:
    """Build the hierarchy for one purpose from the declared plan."""
    plan_doc = json.loads(plan_path.read_text(encoding="utf-8"))
    chosen = None
    for p in plan_doc.get("purposes", ()):
        if p.get("purpose_id") == purpose_id:
            chosen = p
            break
    if chosen is None:
        raise click.ClickException(f"purpose {purpose_id!r} not found in {plan_path}")
    payload = {
        "purpose_id": chosen["purpose_id"],
        "relevance_tag": chosen["relevance_tag"],
        "succession": list(chosen.get("succession", ())),
        "overrides": dict(plan_doc.get("overrides", {})),
        "curated": bool(chosen.get("succession")),
        "rank_scheme": list(plan_doc.get("rank_scheme", ())),
        "basic_rank_label": plan_doc.get("basic_rank_label"),
    }
    try:
        with StoreLock(store_dir):
            store = _load_store(store_dir, must_exist=True)
            decisions_mod.record_and_apply(store, "set-succession", payload)
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    tax = store.taxonomy
    click.echo(f"built {len(tax.nodes)} nodes, minted up to id {store.concepts.next_id - 1}")


@main.command()
@store_option
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
@click.option("--text", "as_text", is_flag=True, help="Line-per-violation report (default).")
def audit(store_dir: Path, as_json: bool, as_text: bool) -> None:
    """Audit the store against every implemented canon."""
    try:
        store = _load_store(store_dir, must_exist=True)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    report = audit_all(store)
    if as_json:
        click.echo(canonical_json(report.to_dict()), nl=False)
    else:
        for v in report.violations:
            click.echo(f"[{v.severity}] {v.canon} @ {v.location}: {v.explanation}")
        click.echo(f"{report.errors} errors, {report.warnings} warnings")
    if report.errors:
        sys.exit(1)


@main.command()
@store_option
@click.option("--lang", required=True)
@click.option("--file", "rows_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--deprecated", "deprecated_path", type=click.Path(exists=True, path_type=Path))
def lexicalize(store_dir: Path, lang: str, rows_path: Path, deprecated_path: Path | None) -> None:
    """Attach synsets from a node,lemma|lemma[,gloss] file."""
    try:
        with StoreLock(store_dir):
            store = _load_store(store_dir, must_exist=True)
            if deprecated_path:
                lex = store.lexicons.setdefault(lang, Lexicon(language=lang))
                lex.deprecated = frozenset(
                    t.strip() for t in deprecated_path.read_text(encoding="utf-8").splitlines() if t.strip()
                )
            count = 0
            for node_id, lemmas, gloss in lexicon_mod.parse_lexicalize_rows(
                rows_path.read_text(encoding="utf-8")
            ):
                decisions_mod.record_and_apply(
                    store,
                    "assign-label",
                    {"node_id": node_id, "language": lang, "lemmas": list(lemmas), "gloss": gloss},
                )
                count += 1
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"labeled {count} nodes in {lang}")


@main.command()
@store_option
@click.option("--lang", required=True)
@click.option("--out", type=click.Path(path_type=Path))
def project(store_dir: Path, lang: str, out: Path | None) -> None:
    """Project the hierarchy into one language, contracting lexical gaps."""
    try:
        store = _load_store(store_dir, must_exist=True)
        projection = lexicon_mod.project_language(store, lang)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    text = canonical_json(projection)
    if out:
        out.write_text(text, encoding="utf-8", newline="\n")
    else:
        click.echo(text, nl=False)


@main.command("mint-ids")
@store_option
def mint_ids(store_dir: Path) -> None:
    """Assign fresh concept ids to any unminted nodes."""
    try:
        with StoreLock(store_dir):
            store = _load_store(store_dir, must_exist=True)
            minted = notation_mod.mint_ids(store)
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"minted {len(minted)} ids" + (f" ({minted[0]}..{minted[-1]})" if minted else ""))


@main.command("map")
@store_option
@click.option("--sc", "sc_id", required=True)
@click.option("--concept", "concept_id", required=True, type=int)
@click.option("--supersede", is_flag=True)
def map_cmd(store_dir: Path, sc_id: str, concept_id: int, supersede: bool) -> None:
    """Confirm a substance-to-classification concept mapping."""
    payload = {"sc_id": sc_id, "concept_id": concept_id, "supersede": supersede}
    try:
        with StoreLock(store_dir):
            store = _load_store(store_dir, must_exist=True)
            decisions_mod.record_and_apply(store, "confirm-mapping", payload)
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"mapped {sc_id} <-> {concept_id}")


@main.command()
@store_option
@click.option("--parent", required=True)
@click.option("--differentia", required=True, help="characteristic=value")
@click.option("--sc", "sc_ref")
@click.option("--adopt", multiple=True, help="Existing child to move under the new node.")
@click.option("--rank-label")
def insert(
    store_dir: Path, parent: str, differentia: str, sc_ref: str | None, adopt: tuple[str, ...], rank_label: str | None
) -> None:
    """Insert a new class without disturbing existing identifiers."""
    if "=" not in differentia:
        raise click.UsageError("--differentia must look like characteristic=value")
    char, _, value = differentia.partition("=")
    payload = {
        "fix": "insert-node",
        "parent": parent,
        "differentia": {"characteristic": char, "value": value},
        "sc_ref": sc_ref,
        "adopt": list(adopt),
        "rank_label": rank_label,
    }
    try:
        with StoreLock(store_dir):
            store = _load_store(store_dir, must_exist=True)
            decisions_mod.record_and_apply(store, "resolve-violation", payload)
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"inserted under {parent}: {differentia}")


@main.command()
@store_option
@click.option("--out", type=click.Path(path_type=Path))
def export(store_dir: Path, out: Path | None) -> None:
    """Write the canonical byte-deterministic export of the whole store."""
    try:
        store = _load_store(store_dir, must_exist=True)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    data = export_bytes(store)
    if out:
        out.write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


@main.command()
@store_option
@click.option("--port", default=8765, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(store_dir: Path, port: int, host: str) -> None:
    """Serve the curation API over HTTP."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(store_dir), host=host, port=port)


@main.command()
@store_option
@click.option("--encounters", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--characteristics", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--decisions", "decisions_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--threshold", default=percepts_mod.DEFAULT_THRESHOLD, show_default=True, type=float)
def replay(
    store_dir: Path, encounters: Path, characteristics: Path, decisions_path: Path, threshold: float
) -> None:
    """Reproduce a store from inputs plus a recorded decision log."""
    if store_dir.exists() and any(store_dir.iterdir()):
        raise click.ClickException(f"replay needs a fresh store directory, {store_dir} is not empty")
    try:
        with StoreLock(store_dir):
            store = Store(path=store_dir)
            _register_characteristics(store, characteristics)
            percepts_mod.ingest_session(store, _read_encounters(encounters), threshold=threshold)
            count = 0
            for line in decisions_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = DecisionRecord.from_dict(json.loads(line))
                decisions_mod.apply_decision(store, record)
                count += 1
            save(store, store_dir)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"replayed {count} decisions")


@main.command()
@store_option
def validate(store_dir: Path) -> None:
    """Check every type invariant of the store."""
    try:
        store = _load_store(store_dir, must_exist=True)
    except ForgeError as exc:
        raise click.ClickException(str(exc))
    problems = validate_store(store)
    for v in problems:
        click.echo(f"[{v.severity}] {v.location}: {v.explanation}")
    click.echo(f"{len(problems)} integrity problems")
    if problems:
        sys.exit(1)


if __name__ == "__main__":
    main()
