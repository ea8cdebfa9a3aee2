"""Command-line interface: ingest, ask, forge, convert-exam, sample-eval,
eval, compare, sweep, serve.

Exit codes: 0 success, 1 operational error, 2 usage error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import AppConfig, load_config
from .corpus import ChunkMode, ChunkPolicy, chunk_document
from .dataset_forge import (
    build_rtd,
    convert_exam_bank,
    dump_pairs_jsonl,
    forge_report_csv,
    load_exam_bank,
    load_pairs_jsonl,
    render_forge_table,
    sample_eval_set,
)
from .errors import AdvisorError
from .eval_harness import (
    chunk_sweep,
    compare as compare_reports,
    comparison_csv,
    evaluate,
    load_report,
    render_comparison_table,
    render_report_table,
    save_report,
)
from .rag_engine import AdvisoryEngine, EngineConfig
from .service import build_index_from_corpus, load_corpus_chunks
from .vindex import VectorIndex, entries_from_chunks


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_config(path: str) -> AppConfig:
    try:
        return load_config(path)
    except AdvisorError as exc:
        _fail(str(exc))


def _documents(config: AppConfig):
    from .corpus import load_corpus, load_manifest

    manifest = load_manifest(config.manifest_path) if config.manifest_path else None
    documents, errors = load_corpus(config.corpus_dir, manifest)
    for err in errors:
        click.echo(f"warning: {err.message}", err=True)
    return documents


def _engine(config: AppConfig, score_threshold: float | None = None) -> AdvisoryEngine:
    if not config.index_path.is_file():
        _fail(f"index not found at {config.index_path}; run `ingest` first")
    index = VectorIndex.load(config.index_path)
    engine_config = config.engine
    if score_threshold is not None:
        engine_config = EngineConfig(
            top_k=config.engine.top_k,
            score_threshold=score_threshold,
            draft_template=config.engine.draft_template,
            refine_template=config.engine.refine_template,
            citation_prefix=config.engine.citation_prefix,
        )
    return AdvisoryEngine(
        index=index,
        embedder=config.embedder,
        backend=config.backend,
        config=engine_config,
        template_dir=config.template_dir,
    )


config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="Config file."
)


@click.group()
def main():
    """Retrieval-augmented advisory engine for trainset fault handling."""


@main.command()
@config_option
@click.option(
    "--dump-chunks",
    "dump_chunks_path",
    type=click.Path(),
    default=None,
    help="Also write the chunk table as JSONL.",
)
def ingest(config_path: str, dump_chunks_path: str | None):
    """Build the vector index from the configured corpus and persist it."""
    config = _load_config(config_path)
    try:
        index, chunks, doc_count = build_index_from_corpus(config)
    except AdvisorError as exc:
        _fail(str(exc))
    config.index_path.parent.mkdir(parents=True, exist_ok=True)
    index.persist(config.index_path)
    if dump_chunks_path:
        from .corpus import dump_chunks_jsonl

        dump_chunks_jsonl(chunks, dump_chunks_path)
    click.echo(
        f"ingested {doc_count} documents into {len(chunks)} chunks "
        f"({len(index)} index entries) -> {config.index_path}"
    )


@main.command()
@config_option
@click.option("--question", required=True, help="The operator question.")
@click.option("--json", "as_json", is_flag=True, help="Print the full trace as JSON.")
def ask(config_path: str, question: str, as_json: bool):
    """Answer one question through the draft/retrieve/gate/refine loop."""
    if not question.strip():
        _fail("question must be nonempty")
    config = _load_config(config_path)
    engine = _engine(config)
    try:
        answer = engine.ask(question)
    except AdvisorError as exc:
        _fail(str(exc))
    if as_json:
        click.echo(json.dumps(answer.to_dict(), ensure_ascii=False))
        return
    click.echo(answer.final)
    if not answer.used_retrieval:
        click.echo("(no relevant documents; draft answer passed through)")
    for warning in answer.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@config_option
@click.option("--out-dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--max-q", default=3, show_default=True, help="Questions per chunk.")
def forge(config_path: str, out_dir: str, max_q: int):
    """Generate the Q&A training dataset from the corpus."""
    config = _load_config(config_path)
    documents = _documents(config)
    if not documents:
        _fail(f"no documents found under {config.corpus_dir}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        pairs, report = build_rtd(
            documents,
            config.chunk_policy,
            config.backend,
            out / "rtd.jsonl",
            max_q=max_q,
            root_dir_name=config.corpus_dir.name,
        )
    except AdvisorError as exc:
        _fail(str(exc))
    (out / "forge_report.txt").write_text(
        render_forge_table(report) + "\n", encoding="utf-8"
    )
    (out / "forge_report.csv").write_text(forge_report_csv(report), encoding="utf-8")
    click.echo(render_forge_table(report))
    click.echo(f"kept {len(pairs)} pairs -> {out / 'rtd.jsonl'}")


@main.command("convert-exam")
@config_option
@click.option("--bank", required=True, type=click.Path(exists=True), help="Exam bank JSONL.")
@click.option("--out", required=True, type=click.Path(), help="Output pairs JSONL.")
def convert_exam(config_path: str, bank: str, out: str):
    """Convert an exam bank into Q&A pairs."""
    config = _load_config(config_path)
    try:
        items = load_exam_bank(bank)
    except (ValueError, KeyError) as exc:
        _fail(f"bad exam bank: {exc}")
    pairs, skipped = convert_exam_bank(items, config.backend)
    for idx, reason in skipped:
        click.echo(f"skipped item {idx}: {reason}", err=True)
    dump_pairs_jsonl(pairs, out)
    click.echo(f"converted {len(pairs)} of {len(items)} items -> {out}")


@main.command("sample-eval")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--per-category", default=100, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--out", required=True, type=click.Path())
def sample_eval(pairs_path: str, per_category: int, seed: int, out: str):
    """Stratified sample of an evaluation set from a pairs file."""
    pairs = load_pairs_jsonl(pairs_path)
    try:
        sampled = sample_eval_set(pairs, per_category, seed)
    except AdvisorError as exc:
        _fail(str(exc))
    dump_pairs_jsonl(sampled, out)
    click.echo(f"sampled {len(sampled)} pairs -> {out}")


@main.command("eval")
@config_option
@click.option("--eval-set", "eval_set_path", required=True, type=click.Path(exists=True))
@click.option(
    "--mode",
    type=click.Choice(["rag", "draft"]),
    default="rag",
    show_default=True,
    help="rag = full loop; draft = retrieval forced off.",
)
@click.option("--name", default=None, help="System name in the report.")
@click.option("--out-dir", required=True, type=click.Path())
def eval_cmd(config_path: str, eval_set_path: str, mode: str, name: str | None, out_dir: str):
    """Evaluate the configured engine over an evaluation set."""
    config = _load_config(config_path)
    eval_set = load_pairs_jsonl(eval_set_path)
    if not eval_set:
        _fail(f"eval set is empty: {eval_set_path}")
    engine = _engine(config, score_threshold=1.01 if mode == "draft" else None)
    system_name = name or mode
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = evaluate(
        lambda q: engine.ask(q).final,
        eval_set,
        system_name=system_name,
        dump_path=out / f"{system_name}.examples.jsonl",
    )
    save_report(report, out / f"{system_name}.report.json")
    (out / f"{system_name}.report.txt").write_text(
        render_report_table(report) + "\n", encoding="utf-8"
    )
    click.echo(render_report_table(report))


@main.command()
@click.option("--report", "report_paths", multiple=True, required=True, type=click.Path(exists=True))
@click.option("--baseline", required=True)
@click.option("--treatment", required=True)
@click.option("--out-dir", required=True, type=click.Path())
def compare(report_paths: tuple[str, ...], baseline: str, treatment: str, out_dir: str):
    """Render a comparison table with a percentage-point delta row."""
    reports = [load_report(p) for p in report_paths]
    try:
        table = compare_reports(reports, baseline, treatment)
    except AdvisorError as exc:
        _fail(str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text = render_comparison_table(table)
    (out / "comparison.txt").write_text(text + "\n", encoding="utf-8")
    (out / "comparison.csv").write_text(comparison_csv(table), encoding="utf-8")
    click.echo(text)


@main.command()
@config_option
@click.option("--sizes", default="200,500,1000", show_default=True, help="Comma-separated chunk sizes.")
@click.option("--eval-set", "eval_set_path", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
def sweep(config_path: str, sizes: str, eval_set_path: str, out_dir: str):
    """Rebuild the index at several fixed chunk sizes and evaluate each."""
    config = _load_config(config_path)
    try:
        size_list = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError:
        raise click.UsageError(f"bad --sizes value: {sizes!r}")
    documents = _documents(config)
    if not documents:
        _fail(f"no documents found under {config.corpus_dir}")
    eval_set = load_pairs_jsonl(eval_set_path)
    if not eval_set:
        _fail(f"eval set is empty: {eval_set_path}")

    def engine_factory(docs, size):
        policy = ChunkPolicy(mode=ChunkMode.FIXED_TOKENS, chunk_size=size, overlap=0)
        chunks = []
        for doc in docs:
            chunks.extend(chunk_document(doc, policy, config.corpus_dir.name))
        index = VectorIndex()
        index.insert(entries_from_chunks(chunks, config.embedder))
        engine = AdvisoryEngine(
            index=index,
            embedder=config.embedder,
            backend=config.backend,
            config=config.engine,
            template_dir=config.template_dir,
        )
        return lambda q: engine.ask(q).final

    result = chunk_sweep(documents, size_list, eval_set, engine_factory, out_dir=out_dir)
    for size, message in sorted(result.errors.items()):
        click.echo(f"size {size} failed: {message}", err=True)
    for size in sorted(result.reports):
        click.echo(f"-- chunk size {size} --")
        click.echo(render_report_table(result.reports[size]))
    if not result.reports:
        _fail("every sweep size failed")


@main.command()
@config_option
def serve(config_path: str):
    """Run the HTTP service."""
    config = _load_config(config_path)
    from .service import serve as run_service

    run_service(config)


if __name__ == "__main__":
    main()
