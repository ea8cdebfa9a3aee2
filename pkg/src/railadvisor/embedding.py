"""Text embeddings: remote endpoint client and a deterministic hashed stand-in.

The hashed embedder exists so the whole pipeline can run and be tested
without a neural model: it hashes token unigrams and bigrams into a
fixed-dimension signed bag, which preserves the one property retrieval
tests rely on (more shared tokens -> higher cosine).
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
import requests

from .corpus import tokenize
from .errors import DimensionMismatch, RemoteUnavailable


class EmbedderKind(Enum):
    REMOTE = "Remote"
    HASHED = "Hashed"


@dataclass(frozen=True)
class EmbedderSpec:
    kind: EmbedderKind = EmbedderKind.HASHED
    dim: int = 256
    endpoint_url: str = ""
    model_name: str = ""
    api_key_env: str = "EMBEDDINGS_API_KEY"
    timeout: float = 10.0
    max_batch: int = 64
    max_retries: int = 2

    def __post_init__(self):
        if self.dim < 8:
            raise ValueError("embedding dim must be >= 8")
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.kind is EmbedderKind.REMOTE and not self.endpoint_url:
            raise ValueError("remote embedder requires endpoint_url")


def l2_normalize(values: np.ndarray) -> np.ndarray:
    """Unit-normalize; the all-zero vector stays all-zero."""
    arr = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        return arr
    return arr / norm


def _feature_hash(feature: str) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def hashed_embed(text: str, dim: int = 256) -> np.ndarray:
    """Signed feature hashing of token unigrams and bigrams, L2-normalized.

    Bucket and sign come from a blake2b hash of the feature string, so the
    embedding is identical across processes and platforms.  Empty text
    maps to the all-zero vector.
    """
    if dim < 8:
        raise ValueError("embedding dim must be >= 8")
    tokens = tokenize(text)
    vec = np.zeros(dim, dtype=np.float64)
    features = ["u\x1f" + t for t in tokens]
    features += [
        "b\x1f" + tokens[i] + "\x1f" + tokens[i + 1]
        for i in range(len(tokens) - 1)
    ]
    for feat in features:
        h = _feature_hash(feat)
        bucket = (h >> 1) % dim
        vec[bucket] += 1.0 if h & 1 else -1.0
    return l2_normalize(vec)


def _parse_embeddings(payload: dict, expected: int, dim: int) -> list[np.ndarray]:
    try:
        rows = sorted(payload["data"], key=lambda item: item["index"])
        vectors = []
        for row in rows:
            values = np.asarray(row["embedding"], dtype=np.float64)
            if values.shape != (dim,):
                raise DimensionMismatch(
                    f"endpoint returned dim {values.shape}, spec dim {dim}"
                )
            vectors.append(l2_normalize(values))
    except DimensionMismatch:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise RemoteUnavailable(f"malformed embeddings response: {exc}") from exc
    if len(vectors) != expected:
        raise RemoteUnavailable(
            f"endpoint returned {len(vectors)} vectors for {expected} inputs"
        )
    return vectors


def _remote_embed_batch(spec: EmbedderSpec, batch: list[str]) -> list[np.ndarray]:
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(spec.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body = {"model": spec.model_name, "input": batch}
    last_err: Exception | None = None
    for attempt in range(spec.max_retries + 1):
        try:
            resp = requests.post(
                spec.endpoint_url, json=body, headers=headers, timeout=spec.timeout
            )
        except (requests.Timeout, requests.ConnectionError) as exc:
            last_err = exc
            if attempt < spec.max_retries:
                time.sleep(min(0.1 * 2**attempt, 2.0))
            continue
        if resp.status_code >= 500 or resp.status_code == 429:
            last_err = RemoteUnavailable(
                f"embedding endpoint returned {resp.status_code}"
            )
            if attempt < spec.max_retries:
                time.sleep(min(0.1 * 2**attempt, 2.0))
            continue
        if resp.status_code != 200:
            raise RemoteUnavailable(
                f"embedding endpoint returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            payload = resp.json()
        except ValueError as exc:
            raise RemoteUnavailable(f"non-JSON embeddings response: {exc}") from exc
        return _parse_embeddings(payload, len(batch), spec.dim)
    raise RemoteUnavailable(f"embedding endpoint unavailable: {last_err}")


def embed(spec: EmbedderSpec, texts: list[str]) -> list[np.ndarray]:
    """Embed ``texts`` in order; one vector per input."""
    if not texts:
        raise ValueError("texts must be a nonempty list")
    if spec.kind is EmbedderKind.HASHED:
        return [hashed_embed(t, spec.dim) for t in texts]
    vectors: list[np.ndarray] = []
    for start in range(0, len(texts), spec.max_batch):
        vectors.extend(_remote_embed_batch(spec, texts[start : start + spec.max_batch]))
    return vectors


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0.0 when either vector is all-zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"cosine dims differ: {a.shape} vs {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(a, b)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))
