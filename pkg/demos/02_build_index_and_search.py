"""Build the vector index over the fixture corpus and run a few searches.

Run from the repository root:  python3 demos/02_build_index_and_search.py
"""

import tempfile
from pathlib import Path

from railadvisor import (
    ChunkMode,
    ChunkPolicy,
    EmbedderSpec,
    VectorIndex,
    chunk_document,
    embed,
    entries_from_chunks,
)
from railadvisor.fixture_corpus import fixture_documents

spec = EmbedderSpec()  # hashed embedder, dim 256
policy = ChunkPolicy(mode=ChunkMode.STRUCTURAL)

chunks = []
for doc in fixture_documents():
    chunks.extend(chunk_document(doc, policy))

index = VectorIndex()
index.insert(entries_from_chunks(chunks, spec))
print(f"indexed {len(index)} chunks from {len(fixture_documents())} documents")

for question in (
    "CR400AF牵引丢失故障代码3454如何处理？",
    "轴温传感器报警怎么办？",
    "接发列车作业前要确认什么？",
):
    query = embed(spec, [question])[0]
    print(f"\nQ: {question}")
    for hit in index.search(query, 3):
        print(f"  {hit.score:.3f}  {hit.source_label}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "index.bin"
    index.persist(path)
    reloaded = VectorIndex.load(path)
    query = embed(spec, ["牵引丢失"])[0]
    same = index.search(query, 5) == reloaded.search(query, 5)
    print(f"\npersist -> load search-equivalent: {same}")
