"""Corpus loading, token counting, and chunking.

The token rule used everywhere in this package: one CJK character is one
token; one maximal run of non-CJK letters/digits is one token; whitespace
and punctuation are not tokens.  So ``"CR400AF"`` is a single token and a
four-character Chinese phrase is four tokens.  The rule needs no external
segmenter and is deterministic across platforms.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path, PurePosixPath


class Category(Enum):
    """Source category of a corpus document."""

    LEGAL_PROVISION = "LegalProvision"
    RAILWAY_REGULATION = "RailwayRegulation"
    RAILWAY_EXPERTISE = "RailwayExpertise"
    OTHER = "Other"

    @property
    def display_name(self) -> str:
        return {
            Category.LEGAL_PROVISION: "Legal Provision",
            Category.RAILWAY_REGULATION: "Railway Regulation",
            Category.RAILWAY_EXPERTISE: "Railway Expertise",
            Category.OTHER: "Other",
        }[self]

    @classmethod
    def parse(cls, value: str) -> "Category":
        for member in cls:
            if value in (member.value, member.name, member.display_name):
                return member
        raise ValueError(f"unknown category: {value!r}")


# Unicode ranges treated as CJK: each character is one token.
_CJK_RANGES = (
    (0x3040, 0x30FF),   # hiragana, katakana
    (0x3400, 0x4DBF),   # CJK extension A
    (0x4E00, 0x9FFF),   # CJK unified ideographs
    (0xAC00, 0xD7A3),   # hangul syllables
    (0xF900, 0xFAFF),   # CJK compatibility ideographs
    (0x20000, 0x2EBEF), # CJK extensions B..F
)


def is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def token_spans(text: str) -> list[tuple[int, int]]:
    """Character spans ``[start, end)`` of every token in ``text``, in order."""
    spans: list[tuple[int, int]] = []
    run_start = -1
    for i, ch in enumerate(text):
        if is_cjk(ch):
            if run_start >= 0:
                spans.append((run_start, i))
                run_start = -1
            spans.append((i, i + 1))
        elif ch.isalnum():
            if run_start < 0:
                run_start = i
        else:
            if run_start >= 0:
                spans.append((run_start, i))
                run_start = -1
    if run_start >= 0:
        spans.append((run_start, len(text)))
    return spans


def tokenize(text: str) -> list[str]:
    """Tokens of ``text`` under the package token rule."""
    return [text[s:e] for s, e in token_spans(text)]


def count_tokens(text: str) -> int:
    """Number of tokens in ``text``; empty or token-free text counts 0."""
    return len(token_spans(text))


@dataclass(frozen=True)
class Document:
    id: str
    source_path: str
    category: Category
    title: str
    text: str
    token_count: int


@dataclass(frozen=True)
class Chunk:
    id: str
    document_id: str
    source_label: str
    category: Category
    ordinal: int
    text: str
    token_count: int


class ChunkMode(Enum):
    STRUCTURAL = "Structural"
    FIXED_TOKENS = "FixedTokens"


# A line matching any of these starts a new structural chunk.
DEFAULT_BOUNDARY_PATTERNS = (
    r"^第[0-9〇零一二三四五六七八九十百千]+[章节条篇编]",  # chapter/article markers
    r"^#{1,6}\s",                                            # markdown headings
    r"^\d+(\.\d+)*[\.、．:：)）]?\s",                        # numbered headings
    r"^[A-Z][A-Z0-9 \-]{3,}$",                               # ALL-CAPS headings
    r"^【.{1,30}】",                                          # bracketed headings
)


@dataclass(frozen=True)
class ChunkPolicy:
    mode: ChunkMode = ChunkMode.FIXED_TOKENS
    chunk_size: int = 500
    overlap: int = 0
    boundary_patterns: tuple[str, ...] = DEFAULT_BOUNDARY_PATTERNS

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not 0 <= self.overlap < self.chunk_size:
            raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")


def _document_id(source_path: str) -> str:
    return "d" + hashlib.sha1(source_path.encode("utf-8")).hexdigest()[:12]


def source_label_for(root_dir_name: str, source_path: str) -> str:
    """Provenance label shown in citations, e.g. ``../data_source/Manual.txt``."""
    return f"../{root_dir_name}/{source_path}"


@dataclass(frozen=True)
class CorpusLoadError:
    path: str
    message: str


def load_manifest(path: str | Path) -> dict[str, Category]:
    """Read a JSON manifest mapping relative path -> category string."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return {rel: Category.parse(cat) for rel, cat in raw.items()}


def load_corpus(
    root_dir: str | Path,
    manifest: dict[str, Category] | None = None,
) -> tuple[list[Document], list[CorpusLoadError]]:
    """Load every regular file under ``root_dir`` as one UTF-8 Document.

    Category comes from ``manifest`` (relative path keys) when present,
    else ``Other``.  Per-file failures are collected and returned; loading
    continues past them.  Documents come back sorted by source_path.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus root is not a directory: {root}")
    manifest = manifest or {}
    documents: list[Document] = []
    errors: list[CorpusLoadError] = []
    paths = sorted(
        p for p in root.rglob("*")
        if p.is_file() and not p.name.startswith(".")
    )
    for path in paths:
        rel = str(PurePosixPath(path.relative_to(root)))
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            errors.append(CorpusLoadError(rel, f"not UTF-8 text: {rel}"))
            continue
        except OSError as exc:
            errors.append(CorpusLoadError(rel, f"unreadable: {exc}"))
            continue
        documents.append(
            Document(
                id=_document_id(rel),
                source_path=rel,
                category=manifest.get(rel, Category.OTHER),
                title=path.stem.replace("_", " "),
                text=text,
                token_count=count_tokens(text),
            )
        )
    documents.sort(key=lambda d: d.source_path)
    return documents, errors


def _structural_segments(text: str, patterns: tuple[str, ...]) -> list[str]:
    compiled = [re.compile(p) for p in patterns]
    segments: list[str] = []
    buf: list[str] = []
    for line in text.splitlines(keepends=True):
        if buf and any(rx.match(line.rstrip("\n")) for rx in compiled):
            segments.append("".join(buf))
            buf = [line]
        else:
            buf.append(line)
    if buf:
        segments.append("".join(buf))
    return segments


def chunk_document(doc: Document, policy: ChunkPolicy, root_dir_name: str = "data_source") -> list[Chunk]:
    """Split ``doc`` into source-annotated chunks.

    Fixed mode cuts the text at token-start boundaries so that, for
    overlap 0, concatenating chunk texts reproduces the document exactly.
    Structural mode keeps line content intact, so it is lossless too.
    A document with zero tokens yields no chunks.
    """
    label = source_label_for(root_dir_name, doc.source_path)
    spans = token_spans(doc.text)
    if not spans:
        return []

    texts: list[str] = []
    if policy.mode is ChunkMode.STRUCTURAL:
        texts = _structural_segments(doc.text, policy.boundary_patterns)
    else:
        n = len(spans)
        size = policy.chunk_size
        step = size - policy.overlap
        start_tok = 0
        while start_tok < n:
            end_tok = min(start_tok + size, n)
            start_char = 0 if start_tok == 0 else spans[start_tok][0]
            end_char = len(doc.text) if end_tok == n else spans[end_tok][0]
            texts.append(doc.text[start_char:end_char])
            if start_tok + size >= n:
                break
            start_tok += step

    return [
        Chunk(
            id=f"{doc.id}-{ordinal:05d}",
            document_id=doc.id,
            source_label=label,
            category=doc.category,
            ordinal=ordinal,
            text=chunk_text,
            token_count=count_tokens(chunk_text),
        )
        for ordinal, chunk_text in enumerate(texts)
    ]


def reconstruct_document(chunks: list[Chunk], policy: ChunkPolicy) -> str:
    """Rebuild the original text from chunks, removing overlap regions."""
    if not chunks:
        return ""
    ordered = sorted(chunks, key=lambda c: c.ordinal)
    parts = [ordered[0].text]
    for chunk in ordered[1:]:
        if policy.mode is ChunkMode.FIXED_TOKENS and policy.overlap > 0:
            spans = token_spans(chunk.text)
            drop = spans[policy.overlap][0] if len(spans) > policy.overlap else len(chunk.text)
            parts.append(chunk.text[drop:])
        else:
            parts.append(chunk.text)
    return "".join(parts)


def chunk_to_dict(chunk: Chunk) -> dict:
    return {
        "id": chunk.id,
        "document_id": chunk.document_id,
        "source_label": chunk.source_label,
        "category": chunk.category.value,
        "ordinal": chunk.ordinal,
        "text": chunk.text,
        "token_count": chunk.token_count,
    }


def chunk_from_dict(d: dict) -> Chunk:
    return Chunk(
        id=d["id"],
        document_id=d["document_id"],
        source_label=d["source_label"],
        category=Category.parse(d["category"]),
        ordinal=int(d["ordinal"]),
        text=d["text"],
        token_count=int(d["token_count"]),
    )


def dump_chunks_jsonl(chunks: list[Chunk], path: str | Path) -> None:
    """Write one chunk per line; field names are the Chunk fields verbatim."""
    with open(path, "w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(json.dumps(chunk_to_dict(chunk), ensure_ascii=False) + "\n")


def load_chunks_jsonl(path: str | Path) -> list[Chunk]:
    chunks = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                chunks.append(chunk_from_dict(json.loads(line)))
    return chunks
