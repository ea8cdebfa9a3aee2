"""Exact top-k cosine index over chunk embeddings.

A flat store: vectors are kept pre-normalized, so the similarity score is
a plain dot product and every search is an exact scan.  At the corpus
scales this package targets (tens of thousands of chunks) that is both
fast enough and makes every retrieval test an oracle test.

Ties are broken by chunk_id ascending, giving search a total order.
"""

from __future__ import annotations

import hashlib
import json
import struct
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Category, Chunk
from .embedding import EmbedderSpec, embed, l2_normalize
from .errors import CorruptIndex, DimensionMismatch, VersionUnsupported

_MAGIC = b"RVIX"
_VERSION = 1
# magic | version u32 | dim u32 | count u64 | sha256 of the record area
_HEADER = struct.Struct("<4sIIQ32s")


@dataclass(frozen=True)
class IndexEntry:
    chunk_id: str
    vector: np.ndarray
    source_label: str
    category: Category
    text: str


@dataclass(frozen=True)
class RetrievalHit:
    chunk_id: str
    score: float
    source_label: str
    text: str

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "score": self.score,
            "source_label": self.source_label,
            "text": self.text,
        }


_NORM_TOL = 1e-6


def _validate_vector(vector: np.ndarray, dim: int | None) -> np.ndarray:
    arr = np.ascontiguousarray(vector, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("index vectors must be 1-D")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"entry dim {arr.shape[0]} != index dim {dim}")
    norm = float(np.linalg.norm(arr))
    if norm != 0.0 and abs(norm - 1.0) > _NORM_TOL:
        raise ValueError(f"index vectors must be unit or all-zero, got norm {norm}")
    return arr


class VectorIndex:
    """Upsert-by-chunk_id flat index with exact top-k search.

    Concurrency: mutations run under an internal lock and publish an
    immutable snapshot; searches read the current snapshot, so they never
    observe a partially applied insert batch.
    """

    def __init__(self, dim: int | None = None):
        self.dim = dim
        self._ids: list[str] = []
        self._pos: dict[str, int] = {}
        self._vectors: list[np.ndarray] = []
        self._meta: list[tuple[str, Category, str]] = []
        self._lock = threading.Lock()
        self._snapshot: tuple | None = None

    def __len__(self) -> int:
        return len(self._ids)

    def insert(self, entries: list[IndexEntry]) -> int:
        """Append or replace entries; returns how many were processed."""
        with self._lock:
            for entry in entries:
                arr = _validate_vector(entry.vector, self.dim)
                if self.dim is None:
                    self.dim = arr.shape[0]
                meta = (entry.source_label, entry.category, entry.text)
                if entry.chunk_id in self._pos:
                    i = self._pos[entry.chunk_id]
                    self._vectors[i] = arr
                    self._meta[i] = meta
                else:
                    self._pos[entry.chunk_id] = len(self._ids)
                    self._ids.append(entry.chunk_id)
                    self._vectors.append(arr)
                    self._meta.append(meta)
            self._snapshot = None
            return len(entries)

    def _current_snapshot(self):
        snap = self._snapshot
        if snap is not None:
            return snap
        with self._lock:
            if self._snapshot is None:
                if self._ids:
                    matrix = np.vstack(self._vectors)
                    ids = list(self._ids)
                    order_by_id = sorted(range(len(ids)), key=lambda i: ids[i])
                    rank = np.empty(len(ids), dtype=np.int64)
                    for r, i in enumerate(order_by_id):
                        rank[i] = r
                else:
                    matrix = np.empty((0, self.dim or 0), dtype=np.float64)
                    ids = []
                    rank = np.empty(0, dtype=np.int64)
                self._snapshot = (matrix, ids, rank, list(self._meta))
            return self._snapshot

    def search(self, query: np.ndarray, k: int) -> list[RetrievalHit]:
        """The k entries with highest cosine to ``query``, exact.

        Sorted by score descending, ties by chunk_id ascending.  The query
        is normalized here, so scores are true cosines in [-1, 1].
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        matrix, ids, rank, meta = self._current_snapshot()
        if not ids:
            return []
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (matrix.shape[1],):
            raise DimensionMismatch(
                f"query dim {q.shape} != index dim {matrix.shape[1]}"
            )
        q = l2_normalize(q)
        scores = matrix @ q
        order = np.lexsort((rank, -scores))
        hits = []
        for i in order[:k]:
            label, _category, text = meta[i]
            hits.append(
                RetrievalHit(
                    chunk_id=ids[i],
                    score=float(scores[i]),
                    source_label=label,
                    text=text,
                )
            )
        return hits

    def persist(self, path: str | Path) -> None:
        """Write the index: binary vector records plus a JSONL metadata sidecar."""
        with self._lock:
            ids = list(self._ids)
            vectors = list(self._vectors)
            meta = list(self._meta)
            dim = self.dim if self.dim is not None else 0
        records = (
            np.vstack(vectors).astype("<f8").tobytes()
            if vectors
            else b""
        )
        header = _HEADER.pack(
            _MAGIC, _VERSION, dim, len(ids), hashlib.sha256(records).digest()
        )
        path = Path(path)
        path.write_bytes(header + records)
        with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
            for chunk_id, (label, category, text) in zip(ids, meta):
                fh.write(
                    json.dumps(
                        {
                            "chunk_id": chunk_id,
                            "source_label": label,
                            "category": category.value,
                            "text": text,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        path = Path(path)
        blob = path.read_bytes()
        if len(blob) < _HEADER.size:
            raise CorruptIndex(f"index file too short: {path}")
        magic, version, dim, count, checksum = _HEADER.unpack_from(blob)
        if magic != _MAGIC:
            raise CorruptIndex(f"bad magic in {path}")
        if version != _VERSION:
            raise VersionUnsupported(f"index version {version} unsupported")
        records = blob[_HEADER.size :]
        if len(records) != count * dim * 8:
            raise CorruptIndex(f"truncated record area in {path}")
        if hashlib.sha256(records).digest() != checksum:
            raise CorruptIndex(f"checksum mismatch in {path}")
        sidecar = _sidecar_path(path)
        if not sidecar.exists():
            raise CorruptIndex(f"missing metadata sidecar {sidecar}")
        metas = []
        with open(sidecar, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    metas.append(json.loads(line))
                except ValueError as exc:
                    raise CorruptIndex(f"bad sidecar line in {sidecar}: {exc}") from exc
        if len(metas) != count:
            raise CorruptIndex(
                f"sidecar holds {len(metas)} entries, header says {count}"
            )
        index = cls(dim=dim if count else None)
        if count:
            matrix = np.frombuffer(records, dtype="<f8").reshape(count, dim)
            entries = [
                IndexEntry(
                    chunk_id=m["chunk_id"],
                    vector=matrix[i],
                    source_label=m["source_label"],
                    category=Category.parse(m["category"]),
                    text=m["text"],
                )
                for i, m in enumerate(metas)
            ]
            index.insert(entries)
        return index


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.jsonl")


def entries_from_chunks(
    chunks: list[Chunk], spec: EmbedderSpec
) -> list[IndexEntry]:
    """Embed chunk texts with ``spec`` and wrap them as index entries."""
    if not chunks:
        return []
    vectors = embed(spec, [c.text for c in chunks])
    return [
        IndexEntry(
            chunk_id=c.id,
            vector=v,
            source_label=c.source_label,
            category=c.category,
            text=c.text,
        )
        for c, v in zip(chunks, vectors)
    ]
