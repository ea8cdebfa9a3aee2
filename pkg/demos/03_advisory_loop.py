"""The full draft -> retrieve -> gate -> refine advisory loop, end to end,
with the deterministic scripted backend.

Run from the repository root:  python3 demos/03_advisory_loop.py
"""

from railadvisor import (
    AdvisoryEngine,
    ChunkMode,
    ChunkPolicy,
    EmbedderSpec,
    EngineConfig,
    VectorIndex,
    chunk_document,
    entries_from_chunks,
)
from railadvisor.fixture_corpus import fixture_documents, scripted_backend

spec = EmbedderSpec()
chunks = []
for doc in fixture_documents():
    chunks.extend(chunk_document(doc, ChunkPolicy(mode=ChunkMode.STRUCTURAL)))
index = VectorIndex()
index.insert(entries_from_chunks(chunks, spec))

engine = AdvisoryEngine(
    index=index,
    embedder=spec,
    backend=scripted_backend(),
    config=EngineConfig(score_threshold=0.12),
)

question = "CR400AF动车组发生牵引丢失（故障代码3454、3457）时，司机应如何处置？"
answer = engine.ask(question)

print(f"Q: {answer.question}\n")
print(f"draft:\n{answer.draft}\n")
print(f"gate: {'refine' if answer.used_retrieval else 'passthrough'}")
print("hits:")
for hit in answer.hits:
    print(f"  {hit.score:.3f}  {hit.source_label}")
print(f"\nfinal:\n{answer.final}\n")
print("citations:")
for label in answer.citations:
    print(f"  Referenced from: {label}")

# An off-corpus question falls below the gate and passes the draft through.
small_talk = engine.ask("今天晚饭吃什么比较好呢？")
print(f"\noff-corpus question -> used_retrieval={small_talk.used_retrieval}")
