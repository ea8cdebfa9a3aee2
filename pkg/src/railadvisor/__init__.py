"""Retrieval-augmented advisory engine for high-speed trainset fault handling.

Library surface: corpus loading and chunking, hashed/remote embeddings, an
exact cosine index, a chat-completion gateway with scripted backends, the
draft/retrieve/gate/refine advisory loop, a Q&A dataset forge, and
BLEU/ROUGE evaluation harnesses.
"""

from .corpus import (
    Category,
    Chunk,
    ChunkMode,
    ChunkPolicy,
    Document,
    chunk_document,
    count_tokens,
    load_corpus,
    load_manifest,
    tokenize,
)
from .embedding import EmbedderKind, EmbedderSpec, cosine, embed, hashed_embed
from .eval_harness import MetricReport, chunk_sweep, compare, evaluate
from .eval_metrics import ScoreSet, bleu, lcs_length, metric_tokenize, rouge_l, rouge_n, score_pair
from .dataset_forge import (
    ExamItem,
    FilterConfig,
    ForgeReport,
    ItemType,
    QAPair,
    RejectReason,
    build_rtd,
    convert_exam_item,
    filter_pairs,
    is_duplicate,
    sample_eval_set,
)
from .llm_gateway import (
    BackendKind,
    BackendSpec,
    ChatExchange,
    FallbackMode,
    GenerationParams,
    PromptTemplate,
    ScriptRule,
    complete,
    load_template,
    render,
)
from .rag_engine import AdvisoryAnswer, AdvisoryEngine, EngineConfig, GateDecision, gate
from .vindex import IndexEntry, RetrievalHit, VectorIndex, entries_from_chunks

__version__ = "0.1.0"

__all__ = [
    "AdvisoryAnswer",
    "AdvisoryEngine",
    "BackendKind",
    "BackendSpec",
    "Category",
    "ChatExchange",
    "Chunk",
    "ChunkMode",
    "ChunkPolicy",
    "Document",
    "EmbedderKind",
    "EmbedderSpec",
    "EngineConfig",
    "ExamItem",
    "FallbackMode",
    "FilterConfig",
    "ForgeReport",
    "GateDecision",
    "GenerationParams",
    "IndexEntry",
    "ItemType",
    "MetricReport",
    "PromptTemplate",
    "QAPair",
    "RejectReason",
    "RetrievalHit",
    "ScoreSet",
    "ScriptRule",
    "VectorIndex",
    "bleu",
    "build_rtd",
    "chunk_document",
    "chunk_sweep",
    "compare",
    "complete",
    "convert_exam_item",
    "cosine",
    "count_tokens",
    "embed",
    "entries_from_chunks",
    "evaluate",
    "filter_pairs",
    "gate",
    "hashed_embed",
    "is_duplicate",
    "lcs_length",
    "load_corpus",
    "load_manifest",
    "load_template",
    "metric_tokenize",
    "render",
    "rouge_l",
    "rouge_n",
    "sample_eval_set",
    "score_pair",
    "tokenize",
]
