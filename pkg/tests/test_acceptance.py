"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.
"""

from __future__ import annotations

import random
import statistics
import time
from contextlib import contextmanager

import numpy as np
import pytest
from click.testing import CliRunner

from railadvisor.corpus import ChunkMode, ChunkPolicy, chunk_document
from railadvisor.dataset_forge import (
    CategoryStat,
    ForgeReport,
    QAPair,
    RejectReason,
    build_rtd,
    filter_pairs,
    is_duplicate,
    render_forge_table,
)
from railadvisor.corpus import Category
from railadvisor.embedding import EmbedderSpec, l2_normalize
from railadvisor.errors import CorruptIndex
from railadvisor.eval_harness import chunk_sweep, evaluate
from railadvisor.eval_metrics import bleu, rouge_l, rouge_n, score_pair
from railadvisor.fixture_corpus import (
    fixture_documents,
    fixture_eval_pairs,
    scripted_backend,
    write_fixture_corpus,
)
from railadvisor.rag_engine import AdvisoryEngine, EngineConfig, gate
from railadvisor.vindex import IndexEntry, RetrievalHit, VectorIndex, _HEADER
from conftest import FIXTURE_THRESHOLD
from oracles import brute_force_search, naive_bleu, naive_rouge_l, naive_rouge_n
from test_cli import pipeline_artifacts


@contextmanager
def criterion(name: str, budget_s: float | None = None):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE[{name}]: FAIL")
        raise
    elapsed = time.perf_counter() - started
    if budget_s is not None and elapsed >= budget_s:
        print(f"ACCEPTANCE[{name}]: FAIL (took {elapsed:.2f}s, budget {budget_s}s)")
        raise AssertionError(f"{name} exceeded budget: {elapsed:.2f}s >= {budget_s}s")
    print(f"ACCEPTANCE[{name}]: PASS ({elapsed:.2f}s)")


VOCAB = [
    "故", "障", "处", "理", "牵", "引", "丢", "失", "运", "行",
    "the", "cat", "on", "mat", "a", "b", "c", "d", "x", "y",
]


def test_metric_oracle_equivalence():
    """ROUGE-1/2/L and BLEU match the brute-force oracle on 50 random pairs."""
    with criterion("metric-oracle-equivalence", budget_s=5.0):
        rng = random.Random(20240501)
        for _ in range(50):
            cand = [rng.choice(VOCAB) for _ in range(rng.randint(0, 40))]
            ref = [rng.choice(VOCAB) for _ in range(rng.randint(0, 40))]
            assert rouge_n(cand, ref, 1) == pytest.approx(
                naive_rouge_n(cand, ref, 1), abs=1e-9
            )
            assert rouge_n(cand, ref, 2) == pytest.approx(
                naive_rouge_n(cand, ref, 2), abs=1e-9
            )
            assert rouge_l(cand, ref) == pytest.approx(
                naive_rouge_l(cand, ref), abs=1e-9
            )
            assert bleu(cand, ref) == pytest.approx(naive_bleu(cand, ref), abs=1e-9)


def test_metric_boundary_properties():
    """Identity scores 1, token-disjoint scores 0, empty candidate scores 0."""
    with criterion("metric-boundaries"):
        identical = "牵引丢失时利用剩余动力保持运行并通知随车机械师"
        assert score_pair(identical, identical).as_tuple() == (1.0, 1.0, 1.0, 1.0)
        disjoint = score_pair("alpha beta gamma", "轴温报警处置流程")
        assert disjoint.as_tuple() == (0.0, 0.0, 0.0, 0.0)
        assert score_pair("", identical).as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_retrieval_exactness():
    """search(k=5) returns the identical id sequence as a brute-force scan
    with the documented tie rule, over 1,000 vectors and 100 queries."""
    with criterion("retrieval-exactness", budget_s=10.0):
        rng = np.random.default_rng(33)
        dim = 256
        entries = [
            IndexEntry(
                chunk_id=f"c{i:05d}",
                vector=l2_normalize(rng.standard_normal(dim)),
                source_label=f"../data_source/doc{i % 11}.txt",
                category=Category.OTHER,
                text=f"t{i}",
            )
            for i in range(1000)
        ]
        index = VectorIndex()
        index.insert(entries)
        pairs = [(e.chunk_id, e.vector) for e in entries]
        for _ in range(100):
            query = l2_normalize(rng.standard_normal(dim))
            got = [h.chunk_id for h in index.search(query, 5)]
            assert got == brute_force_search(pairs, query, 5)


def test_gate_contract_and_answer_invariants(fixture_engine):
    """Gate laws over randomized hit lists plus AdvisoryAnswer invariants on
    every ask() output."""
    with criterion("gate-contract"):
        rng = random.Random(99)
        for _ in range(300):
            n = rng.randint(0, 8)
            scores = sorted((rng.random() for _ in range(n)), reverse=True)
            hits = [
                RetrievalHit(f"c{i}", s, f"l{i}", f"t{i}")
                for i, s in enumerate(scores)
            ]
            assert gate(hits, 1.01).passthrough
            if hits:
                decision = gate(hits, 0.0)
                assert not decision.passthrough
                assert len(decision.kept) == len(hits)
            threshold = rng.random()
            decision = gate(hits, threshold)
            if decision.passthrough:
                assert not hits or hits[0].score < threshold
            else:
                assert all(h.score >= threshold for h in decision.kept)

        questions = [p.question for p in fixture_eval_pairs()]
        questions += ["什么是分相区？", "完全无关的问题？"]
        for question in questions:
            answer = fixture_engine.ask(question)
            if answer.used_retrieval:
                assert answer.citations
                hit_labels = {h.source_label for h in answer.hits}
                assert set(answer.citations) <= hit_labels
            else:
                assert answer.final == answer.draft
                assert answer.citations == []
            assert len(answer.hits) <= fixture_engine.config.top_k


def test_desk_scale_table4_direction(fixture_docs, fixture_index, hashed_spec):
    """Mean ROUGE-1 with retrieval beats the no-retrieval baseline by >= 0.05
    on an eval set whose references quote the corpus."""
    with criterion("table4-direction", budget_s=30.0):
        assert len(fixture_docs) >= 30
        eval_set = fixture_eval_pairs()
        backend = scripted_backend()

        def engine_at(threshold: float) -> AdvisoryEngine:
            return AdvisoryEngine(
                index=fixture_index,
                embedder=hashed_spec,
                backend=backend,
                config=EngineConfig(score_threshold=threshold),
            )

        with_rag = engine_at(FIXTURE_THRESHOLD)
        without_rag = engine_at(1.01)

        def mean_r1(engine: AdvisoryEngine) -> float:
            report = evaluate(lambda q: engine.ask(q).final, eval_set)
            total = sum(report.example_count.values())
            return (
                sum(
                    report.per_category[cat].r1 * report.example_count[cat]
                    for cat in report.per_category
                )
                / total
            )

        r1_with = mean_r1(with_rag)
        r1_without = mean_r1(without_rag)
        print(f"  mean R1 with retrieval: {r1_with:.3f}, without: {r1_without:.3f}")
        assert r1_with - r1_without >= 0.05


def test_chunk_sweep_harness(fixture_docs, hashed_spec, tmp_path):
    """Sweep over {200, 500, 1000} completes with a report per size and a
    CSV; two runs are byte-identical."""
    with criterion("chunk-sweep", budget_s=120.0):
        eval_set = fixture_eval_pairs()
        backend = scripted_backend()

        def engine_factory(docs, size):
            policy = ChunkPolicy(mode=ChunkMode.FIXED_TOKENS, chunk_size=size)
            chunks = []
            for doc in docs:
                chunks.extend(chunk_document(doc, policy))
            index = VectorIndex()
            from railadvisor.vindex import entries_from_chunks

            index.insert(entries_from_chunks(chunks, hashed_spec))
            engine = AdvisoryEngine(
                index=index,
                embedder=hashed_spec,
                backend=backend,
                config=EngineConfig(score_threshold=FIXTURE_THRESHOLD),
            )
            return lambda q: engine.ask(q).final

        sizes = [200, 500, 1000]
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / run
            result = chunk_sweep(fixture_docs, sizes, eval_set, engine_factory, out_dir=out)
            assert result.errors == {}
            assert sorted(result.reports) == sizes
            assert (out / "sweep.csv").is_file()
            for size in sizes:
                assert (out / f"sweep_{size}.report.txt").is_file()
            outputs.append(
                {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}
            )
        assert outputs[0] == outputs[1]


def test_forge_pipeline(fixture_docs, structural_policy, tmp_path):
    """Forge yields unique questions with resolvable provenance, rejects the
    planted defects for the planned reasons, and the statistics table layout
    stays frozen on golden numbers."""
    with criterion("forge-pipeline", budget_s=30.0):
        pairs, report = build_rtd(
            fixture_docs, structural_policy, scripted_backend(), tmp_path / "rtd.jsonl"
        )
        assert pairs
        chunk_ids = set()
        for doc in fixture_docs:
            for chunk in chunk_document(doc, structural_policy):
                chunk_ids.add(chunk.id)
        for p in pairs:
            assert p.source_chunk_id in chunk_ids
            assert p.answer.strip()
        for i, p in enumerate(pairs):
            for prior in pairs[:i]:
                assert not is_duplicate(p.question, prior.question)

        # planted defects: 3 of 10 rejected, with these exact reasons
        good = [
            QAPair(f"g{i}", f"第{i}号设备故障应如何处理操作？",
                   f"第{i}号设备按照手册规定流程处置即可。", Category.OTHER, "c1")
            for i in range(7)
        ]
        planted = [
            QAPair("dup", "第0号设备故障应如何处理操作？", "重复问题的独立答案。",
                   Category.OTHER, "c1"),
            QAPair("shortq", "短？", "这个答案本身合规且足够长。", Category.OTHER, "c1"),
            QAPair("noans", "第9号设备故障应如何处理操作？", "", Category.OTHER, "c1"),
        ]
        batch = good[:3] + planted[:1] + good[3:5] + planted[1:2] + good[5:] + planted[2:]
        kept, rejected = filter_pairs(batch)
        assert len(batch) == 10 and len(kept) == 7
        assert {p.id: r for p, r in rejected} == {
            "dup": RejectReason.DUPLICATE,
            "shortq": RejectReason.INVALID_QUESTION,
            "noans": RejectReason.MISSING_ANSWER,
        }

        golden_report = ForgeReport()
        golden_report.per_category[Category.LEGAL_PROVISION] = CategoryStat(138809, 4553)
        golden_report.per_category[Category.RAILWAY_REGULATION] = CategoryStat(371914, 3052)
        golden_report.per_category[Category.RAILWAY_EXPERTISE] = CategoryStat(265634, 2517)
        assert render_forge_table(golden_report) == (
            "Category            Total Tokens  Number of Q&A\n"
            "Legal Provision          138,809          4,553\n"
            "Railway Regulation       371,914          3,052\n"
            "Railway Expertise        265,634          2,517"
        )


def test_index_round_trip_and_corruption(tmp_path):
    """A 10,000-entry index is search-equivalent after persist+load; a
    flipped checksum byte raises CorruptIndex."""
    with criterion("index-round-trip", budget_s=30.0):
        rng = np.random.default_rng(77)
        dim = 256
        entries = [
            IndexEntry(
                chunk_id=f"c{i:06d}",
                vector=l2_normalize(rng.standard_normal(dim)),
                source_label=f"../data_source/doc{i % 40}.txt",
                category=Category.OTHER,
                text=f"text {i}",
            )
            for i in range(10_000)
        ]
        index = VectorIndex()
        index.insert(entries)
        path = tmp_path / "big.bin"
        index.persist(path)
        loaded = VectorIndex.load(path)
        for _ in range(100):
            query = l2_normalize(rng.standard_normal(dim))
            assert index.search(query, 5) == loaded.search(query, 5)

        blob = bytearray(path.read_bytes())
        blob[_HEADER.size - 32] ^= 0x01  # first checksum byte
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptIndex):
            VectorIndex.load(path)


def test_performance_floor(tmp_path):
    """p50 latency of exact top-5 over 10,000 entries (dim 256) < 50 ms."""
    with criterion("performance-floor"):
        rng = np.random.default_rng(123)
        dim = 256
        entries = [
            IndexEntry(
                chunk_id=f"c{i:06d}",
                vector=l2_normalize(rng.standard_normal(dim)),
                source_label="l",
                category=Category.OTHER,
                text="t",
            )
            for i in range(10_000)
        ]
        index = VectorIndex()
        index.insert(entries)
        index.search(l2_normalize(rng.standard_normal(dim)), 5)  # warm the snapshot
        latencies = []
        for _ in range(50):
            query = l2_normalize(rng.standard_normal(dim))
            started = time.perf_counter()
            hits = index.search(query, 5)
            latencies.append(time.perf_counter() - started)
            assert len(hits) == 5
        p50 = statistics.median(latencies)
        print(f"  p50 search latency: {p50 * 1000:.2f} ms")
        assert p50 < 0.050


def test_end_to_end_determinism(tmp_path):
    """ingest && forge && eval produce byte-identical artifacts twice."""
    with criterion("e2e-determinism"):
        runner = CliRunner()
        runs = []
        for name in ("one", "two"):
            workspace = tmp_path / name
            write_fixture_corpus(workspace)
            runs.append(pipeline_artifacts(workspace, tmp_path / f"{name}_out", runner))
        assert runs[0].keys() == runs[1].keys()
        for key in runs[0]:
            assert runs[0][key] == runs[1][key], f"artifact differs: {key}"
