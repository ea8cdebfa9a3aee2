from __future__ import annotations

import numpy as np
import pytest

from railadvisor.corpus import Category
from railadvisor.embedding import l2_normalize
from railadvisor.errors import CorruptIndex, DimensionMismatch, VersionUnsupported
from railadvisor.vindex import IndexEntry, RetrievalHit, VectorIndex, _HEADER
from oracles import brute_force_search


def unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    return l2_normalize(rng.standard_normal(dim))


def make_entries(n: int, dim: int = 16, seed: int = 0) -> list[IndexEntry]:
    rng = np.random.default_rng(seed)
    return [
        IndexEntry(
            chunk_id=f"c{i:05d}",
            vector=unit(rng, dim),
            source_label=f"../data_source/doc{i % 7}.txt",
            category=Category.OTHER,
            text=f"text {i}",
        )
        for i in range(n)
    ]


class TestInsert:
    def test_insert_nothing(self):
        index = VectorIndex()
        assert index.insert([]) == 0
        assert len(index) == 0

    def test_upsert_same_id_latest_wins(self):
        dim = 16
        rng = np.random.default_rng(1)
        v1, v2 = unit(rng, dim), unit(rng, dim)
        index = VectorIndex()
        base = make_entries(1, dim)[0]
        assert index.insert([IndexEntry("x", v1, "l", Category.OTHER, "old")]) == 1
        assert index.insert([IndexEntry("x", v2, "l", Category.OTHER, "new")]) == 1
        assert len(index) == 1
        hit = index.search(v2, 1)[0]
        assert hit.text == "new"
        assert hit.score == pytest.approx(1.0, abs=1e-9)
        del base

    def test_upsert_idempotent_for_search(self):
        entries = make_entries(20)
        index = VectorIndex()
        index.insert(entries)
        q = entries[3].vector
        before = index.search(q, 5)
        index.insert([entries[7]])
        assert index.search(q, 5) == before

    def test_dim_fixed_by_first_insert(self):
        index = VectorIndex()
        index.insert(make_entries(1, dim=16))
        with pytest.raises(DimensionMismatch):
            index.insert(make_entries(1, dim=32))

    def test_rejects_non_unit_vectors(self):
        index = VectorIndex()
        bad = IndexEntry("x", np.ones(16), "l", Category.OTHER, "t")
        with pytest.raises(ValueError):
            index.insert([bad])

    def test_zero_vector_accepted(self):
        index = VectorIndex()
        index.insert([IndexEntry("z", np.zeros(16), "l", Category.OTHER, "t")])
        assert len(index) == 1


class TestSearch:
    def test_empty_index(self):
        assert VectorIndex().search(np.zeros(8), 5) == []

    def test_self_match_scores_one(self):
        entries = make_entries(50)
        index = VectorIndex()
        index.insert(entries)
        hits = index.search(entries[17].vector, 1)
        assert hits[0].chunk_id == "c00017"
        assert hits[0].score == pytest.approx(1.0, abs=1e-9)

    def test_query_dim_checked(self):
        index = VectorIndex()
        index.insert(make_entries(3, dim=16))
        with pytest.raises(DimensionMismatch):
            index.search(np.zeros(8), 1)

    def test_k_validated(self):
        with pytest.raises(ValueError):
            VectorIndex().search(np.zeros(8), 0)

    def test_min_k_n_hits_nonincreasing(self):
        entries = make_entries(7)
        index = VectorIndex()
        index.insert(entries)
        q = entries[0].vector
        hits = index.search(q, 20)
        assert len(hits) == 7
        assert all(a.score >= b.score for a, b in zip(hits, hits[1:]))

    def test_tie_break_by_chunk_id_ascending(self):
        rng = np.random.default_rng(5)
        v = unit(rng, 16)
        entries = [
            IndexEntry(cid, v, "l", Category.OTHER, "t")
            for cid in ("m", "a", "z", "k")
        ]
        index = VectorIndex()
        index.insert(entries)
        hits = index.search(v, 4)
        assert [h.chunk_id for h in hits] == ["a", "k", "m", "z"]

    def test_matches_brute_force(self):
        entries = make_entries(200, dim=24, seed=9)
        index = VectorIndex()
        index.insert(entries)
        pairs = [(e.chunk_id, e.vector) for e in entries]
        rng = np.random.default_rng(10)
        for _ in range(20):
            q = unit(rng, 24)
            got = [h.chunk_id for h in index.search(q, 5)]
            assert got == brute_force_search(pairs, q, 5)

    def test_unnormalized_query_same_ranking(self):
        entries = make_entries(60, dim=16, seed=2)
        index = VectorIndex()
        index.insert(entries)
        rng = np.random.default_rng(3)
        q = unit(rng, 16)
        assert [h.chunk_id for h in index.search(q, 5)] == [
            h.chunk_id for h in index.search(q * 7.5, 5)
        ]

    def test_dot_equals_cosine_within_tolerance(self):
        # stored vectors are unit, so dot == cosine to float64 accuracy
        from railadvisor.embedding import cosine

        entries = make_entries(40, dim=16, seed=4)
        index = VectorIndex()
        index.insert(entries)
        rng = np.random.default_rng(6)
        q = unit(rng, 16)
        for hit in index.search(q, 10):
            entry = next(e for e in entries if e.chunk_id == hit.chunk_id)
            assert hit.score == pytest.approx(cosine(q, entry.vector), abs=1e-9)


class TestPersistence:
    def test_empty_round_trip(self, tmp_path):
        index = VectorIndex()
        path = tmp_path / "empty.bin"
        index.persist(path)
        loaded = VectorIndex.load(path)
        assert len(loaded) == 0
        assert loaded.search(np.zeros(1), 1) == [] if loaded.dim else True

    def test_three_entry_byte_identity(self, tmp_path):
        entries = make_entries(3)
        index = VectorIndex()
        index.insert(entries)
        path = tmp_path / "small.bin"
        index.persist(path)
        loaded = VectorIndex.load(path)
        for original in entries:
            hits = loaded.search(original.vector, 1)
            assert hits[0].chunk_id == original.chunk_id
            assert hits[0].source_label == original.source_label
            assert hits[0].text == original.text
        # persisting the loaded index reproduces the file bit for bit
        path2 = tmp_path / "small2.bin"
        loaded.persist(path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_round_trip_search_equivalence(self, tmp_path):
        entries = make_entries(500, dim=32, seed=21)
        index = VectorIndex()
        index.insert(entries)
        path = tmp_path / "idx.bin"
        index.persist(path)
        loaded = VectorIndex.load(path)
        rng = np.random.default_rng(22)
        for _ in range(25):
            q = unit(rng, 32)
            assert index.search(q, 5) == loaded.search(q, 5)

    def test_flipped_checksum_byte_raises(self, tmp_path):
        index = VectorIndex()
        index.insert(make_entries(10))
        path = tmp_path / "idx.bin"
        index.persist(path)
        blob = bytearray(path.read_bytes())
        checksum_offset = _HEADER.size - 32
        blob[checksum_offset] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptIndex):
            VectorIndex.load(path)

    def test_flipped_record_byte_raises(self, tmp_path):
        index = VectorIndex()
        index.insert(make_entries(10))
        path = tmp_path / "idx.bin"
        index.persist(path)
        blob = bytearray(path.read_bytes())
        blob[-1] ^= 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptIndex):
            VectorIndex.load(path)

    def test_bad_magic(self, tmp_path):
        index = VectorIndex()
        index.insert(make_entries(2))
        path = tmp_path / "idx.bin"
        index.persist(path)
        blob = bytearray(path.read_bytes())
        blob[0] = ord("X")
        path.write_bytes(bytes(blob))
        with pytest.raises(CorruptIndex):
            VectorIndex.load(path)

    def test_unsupported_version(self, tmp_path):
        index = VectorIndex()
        index.insert(make_entries(2))
        path = tmp_path / "idx.bin"
        index.persist(path)
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(VersionUnsupported):
            VectorIndex.load(path)

    def test_missing_sidecar(self, tmp_path):
        index = VectorIndex()
        index.insert(make_entries(2))
        path = tmp_path / "idx.bin"
        index.persist(path)
        (tmp_path / "idx.bin.meta.jsonl").unlink()
        with pytest.raises(CorruptIndex):
            VectorIndex.load(path)

    def test_truncated_records(self, tmp_path):
        index = VectorIndex()
        index.insert(make_entries(4))
        path = tmp_path / "idx.bin"
        index.persist(path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-8])
        with pytest.raises(CorruptIndex):
            VectorIndex.load(path)


class TestRetrievalHit:
    def test_to_dict_fields(self):
        hit = RetrievalHit("c1", 0.5, "label", "text")
        assert hit.to_dict() == {
            "chunk_id": "c1",
            "score": 0.5,
            "source_label": "label",
            "text": "text",
        }


class TestConcurrency:
    def test_searches_never_observe_partial_batches(self):
        import threading

        index = VectorIndex()
        index.insert(make_entries(100, dim=16, seed=31))
        rng = np.random.default_rng(32)
        queries = [unit(rng, 16) for _ in range(8)]
        batches = [make_entries(50, dim=16, seed=40 + i) for i in range(6)]
        # batch sizes observable from search: 100, then +50 each insert
        valid_sizes = {100 + 50 * i for i in range(len(batches) + 1)}
        problems: list[str] = []
        stop = threading.Event()

        def reader():
            while not stop.is_set():
                hits = index.search(queries[0], 200)
                if len(hits) not in valid_sizes:
                    problems.append(f"saw partial batch of {len(hits)}")
                if any(a.score < b.score for a, b in zip(hits, hits[1:])):
                    problems.append("unsorted hits")

        threads = [threading.Thread(target=reader) for _ in range(4)]
        for t in threads:
            t.start()
        for i, batch in enumerate(batches):
            # fresh ids per batch so sizes grow deterministically
            renamed = [
                IndexEntry(f"b{i}-{e.chunk_id}", e.vector, e.source_label,
                           e.category, e.text)
                for e in batch
            ]
            index.insert(renamed)
        stop.set()
        for t in threads:
            t.join()
        assert problems == []
        assert len(index) == 400
