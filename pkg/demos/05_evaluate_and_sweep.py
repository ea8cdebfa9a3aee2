"""Evaluate the advisory engine with and without retrieval, render the
comparison table, and sweep chunk sizes.

Run from the repository root:  python3 demos/05_evaluate_and_sweep.py
"""

import tempfile
from pathlib import Path

from railadvisor import (
    AdvisoryEngine,
    ChunkMode,
    ChunkPolicy,
    EmbedderSpec,
    EngineConfig,
    VectorIndex,
    chunk_document,
    chunk_sweep,
    compare,
    entries_from_chunks,
    evaluate,
)
from railadvisor.eval_harness import render_comparison_table, sweep_csv
from railadvisor.fixture_corpus import (
    fixture_documents,
    fixture_eval_pairs,
    scripted_backend,
)

spec = EmbedderSpec()
docs = fixture_documents()
eval_set = fixture_eval_pairs()
backend = scripted_backend()


def build_engine(chunk_policy: ChunkPolicy, threshold: float) -> AdvisoryEngine:
    chunks = []
    for doc in docs:
        chunks.extend(chunk_document(doc, chunk_policy))
    index = VectorIndex()
    index.insert(entries_from_chunks(chunks, spec))
    return AdvisoryEngine(
        index=index,
        embedder=spec,
        backend=backend,
        config=EngineConfig(score_threshold=threshold),
    )


structural = ChunkPolicy(mode=ChunkMode.STRUCTURAL)
with_rag = build_engine(structural, threshold=0.12)
without_rag = build_engine(structural, threshold=1.01)  # gate never opens

report_with = evaluate(lambda q: with_rag.ask(q).final, eval_set, "with-retrieval")
report_without = evaluate(lambda q: without_rag.ask(q).final, eval_set, "draft-only")
table = compare([report_without, report_with], "draft-only", "with-retrieval")
print(render_comparison_table(table))


def engine_factory(documents, size):
    engine = build_engine(ChunkPolicy(chunk_size=size), threshold=0.12)
    return lambda q: engine.ask(q).final


print("\n-- chunk-size sweep --")
with tempfile.TemporaryDirectory() as tmp:
    result = chunk_sweep(docs, [200, 500, 1000], eval_set, engine_factory, out_dir=Path(tmp))
    print(sweep_csv(result))
