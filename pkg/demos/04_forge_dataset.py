"""Forge a Q&A dataset from the fixture corpus: chunk, generate questions,
generate answers, filter, report.

Run from the repository root:  python3 demos/04_forge_dataset.py
"""

import tempfile
from pathlib import Path

from railadvisor import ChunkMode, ChunkPolicy, build_rtd
from railadvisor.dataset_forge import render_forge_table
from railadvisor.fixture_corpus import fixture_documents, scripted_backend

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "rtd.jsonl"
    pairs, report = build_rtd(
        fixture_documents(),
        ChunkPolicy(mode=ChunkMode.STRUCTURAL),
        scripted_backend(),
        out,
    )
    print(render_forge_table(report))
    print(f"\nrejected: {dict((r.value, n) for r, n in report.rejected.items())}")
    print(f"kept {len(pairs)} pairs; first three:\n")
    for pair in pairs[:3]:
        print(f"  Q: {pair.question}")
        print(f"  A: {pair.answer[:60]}...")
        print(f"     ({pair.category.value}, from {pair.source_chunk_id})\n")
