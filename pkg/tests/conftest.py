from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from railadvisor.corpus import ChunkMode, ChunkPolicy, chunk_document
from railadvisor.embedding import EmbedderSpec
from railadvisor.fixture_corpus import fixture_documents, scripted_backend
from railadvisor.rag_engine import AdvisoryEngine, EngineConfig
from railadvisor.vindex import VectorIndex, entries_from_chunks

# Calibrated for the hashed embedder over the fixture corpus: related
# question/chunk pairs score well above it, unrelated ones below.
FIXTURE_THRESHOLD = 0.12


@pytest.fixture(scope="session")
def fixture_docs():
    return fixture_documents()


@pytest.fixture(scope="session")
def structural_policy():
    return ChunkPolicy(mode=ChunkMode.STRUCTURAL)


@pytest.fixture(scope="session")
def fixture_chunks(fixture_docs, structural_policy):
    chunks = []
    for doc in fixture_docs:
        chunks.extend(chunk_document(doc, structural_policy))
    return chunks


@pytest.fixture(scope="session")
def hashed_spec():
    return EmbedderSpec()


@pytest.fixture(scope="session")
def fixture_index(fixture_chunks, hashed_spec):
    index = VectorIndex()
    index.insert(entries_from_chunks(fixture_chunks, hashed_spec))
    return index


@pytest.fixture(scope="session")
def fixture_engine(fixture_index, hashed_spec):
    return AdvisoryEngine(
        index=fixture_index,
        embedder=hashed_spec,
        backend=scripted_backend(),
        config=EngineConfig(score_threshold=FIXTURE_THRESHOLD),
    )
