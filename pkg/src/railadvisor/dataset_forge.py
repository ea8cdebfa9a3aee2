"""Automated Q&A dataset construction from a chunked corpus.

Pipeline: chunk -> generate questions per chunk (few-shot prompt) ->
generate an answer per question from the chunk -> strict filtering
(invalid questions, missing/invalid answers, near-duplicate questions) ->
structured JSONL plus a per-category statistics report.  Exam-bank items
(single choice / multiple choice / true-false) convert into the same
QAPair shape for evaluation sets.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .corpus import Category, Chunk, ChunkPolicy, Document, chunk_document, count_tokens, is_cjk
from .errors import (
    ExamConversionError,
    ForgeError,
    InsufficientCategory,
    ResponseEmpty,
    UnparseableResponse,
)
from .llm_gateway import (
    BackendSpec,
    GenerationParams,
    PromptTemplate,
    complete,
    load_template,
    render,
)


class PairFlag(Enum):
    GENERATED = "Generated"
    EXAM_CONVERTED = "ExamConverted"


class RejectReason(Enum):
    DUPLICATE = "Duplicate"
    MISSING_ANSWER = "MissingAnswer"
    INVALID_ANSWER = "InvalidAnswer"
    INVALID_QUESTION = "InvalidQuestion"


@dataclass(frozen=True)
class QAPair:
    id: str
    question: str
    answer: str
    category: Category
    source_chunk_id: str
    flags: frozenset[PairFlag] = frozenset()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "category": self.category.value,
            "source_chunk_id": self.source_chunk_id,
            "flags": sorted(f.value for f in self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QAPair":
        return cls(
            id=d["id"],
            question=d["question"],
            answer=d["answer"],
            category=Category.parse(d["category"]),
            source_chunk_id=d.get("source_chunk_id", ""),
            flags=frozenset(PairFlag(f) for f in d.get("flags", [])),
        )


def dump_pairs_jsonl(pairs: list[QAPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_dict(), ensure_ascii=False) + "\n")


def load_pairs_jsonl(path: str | Path) -> list[QAPair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(QAPair.from_dict(json.loads(line)))
    return pairs


# --- question generation ---------------------------------------------------

_LINE_PREFIX_RE = re.compile(r"^\s*(?:\d+\s*[\.、．:：)）]|[-*•·]|[Qq]\d*\s*[:：])\s*")


def parse_question_lines(text: str, max_q: int) -> list[str]:
    """Extract up to ``max_q`` questions from a numbered or line-delimited list."""
    questions = []
    for line in text.splitlines():
        stripped = _LINE_PREFIX_RE.sub("", line).strip()
        if stripped:
            questions.append(stripped)
        if len(questions) >= max_q:
            break
    return questions


def render_few_shot(few_shot: list[tuple[str, str]]) -> str:
    if not few_shot:
        return ""
    lines = ["", "Examples of good question/answer pairs:"]
    for q, a in few_shot:
        lines.append(f"Q: {q}")
        lines.append(f"A: {a}")
    lines.append("")
    return "\n".join(lines)


def generate_questions(
    chunk: Chunk,
    backend: BackendSpec,
    max_q: int = 3,
    few_shot: list[tuple[str, str]] | None = None,
    template: PromptTemplate | None = None,
    params: GenerationParams | None = None,
) -> list[str]:
    """Ask the backend for questions a chunk can answer.

    Question generation keeps a diversity-friendly default temperature;
    everything downstream runs at 0.
    """
    if not chunk.text:
        raise ValueError("chunk text must be nonempty")
    template = template or load_template("question_gen")
    user = render(
        template,
        {
            "chunk": chunk.text,
            "max_q": str(max_q),
            "examples": render_few_shot(few_shot or []),
        },
    )
    try:
        exchange = complete(
            backend,
            "You write study questions for railway operations documents.",
            user,
            params or GenerationParams(temperature=0.7),
        )
    except ResponseEmpty as exc:
        raise UnparseableResponse(
            f"empty question response for chunk {chunk.id}"
        ) from exc
    questions = parse_question_lines(exchange.response, max_q)
    if not questions:
        raise UnparseableResponse(
            f"no questions extractable from response for chunk {chunk.id}"
        )
    return questions


def generate_answer(
    chunk: Chunk,
    question: str,
    backend: BackendSpec,
    template: PromptTemplate | None = None,
) -> str:
    """Answer ``question`` from the chunk text; returns the trimmed response."""
    if not chunk.text or not question:
        raise ValueError("chunk text and question must be nonempty")
    template = template or load_template("answer_gen")
    user = render(template, {"question": question, "chunk": chunk.text})
    exchange = complete(
        backend,
        "You answer questions strictly from the provided railway document excerpt.",
        user,
        GenerationParams(temperature=0.0),
    )
    return exchange.response.strip()


# --- filtering ---------------------------------------------------------------

DEFAULT_REFUSAL_PHRASES = (
    "无法回答",
    "我不知道",
    "抱歉",
    "cannot answer",
    "i don't know",
    "as an ai",
)

DEFAULT_INTERROGATIVE_MARKERS = (
    "?", "？", "吗", "么", "如何", "怎", "为何", "为什么", "哪", "是否",
    "多少", "何时", "谁", "请说明", "请列", "请简述",
    "what", "how", "why", "which", "when", "where", "who", "whether",
)


@dataclass(frozen=True)
class FilterConfig:
    min_question_tokens: int = 4
    min_answer_tokens: int = 5
    refusal_phrases: tuple[str, ...] = DEFAULT_REFUSAL_PHRASES
    interrogative_markers: tuple[str, ...] = DEFAULT_INTERROGATIVE_MARKERS
    duplicate_threshold: float = 0.9


def _normalize_question(q: str) -> str:
    folded = q.casefold()
    return "".join(ch for ch in folded if is_cjk(ch) or ch.isalnum())


def _char_bigrams(s: str) -> set[str]:
    return {s[i : i + 2] for i in range(len(s) - 1)}


def is_duplicate(q1: str, q2: str, threshold: float = 0.9) -> bool:
    """Near-duplicate test on character bigrams of the normalized questions.

    Similarity is the bigram overlap coefficient 2|A∩B| / (|A|+|B|), which
    works for CJK text without a word segmenter; equality of the
    normalized strings is always a duplicate.
    """
    n1, n2 = _normalize_question(q1), _normalize_question(q2)
    if n1 == n2:
        return True
    b1, b2 = _char_bigrams(n1), _char_bigrams(n2)
    if not b1 or not b2:
        return False
    similarity = 2 * len(b1 & b2) / (len(b1) + len(b2))
    return similarity >= threshold


def _question_valid(question: str, config: FilterConfig) -> bool:
    if count_tokens(question) < config.min_question_tokens:
        return False
    folded = question.casefold()
    return any(marker in folded for marker in config.interrogative_markers)


def _answer_invalid(answer: str, config: FilterConfig) -> bool:
    if count_tokens(answer) < config.min_answer_tokens:
        return True
    folded = answer.casefold()
    return any(phrase in folded for phrase in config.refusal_phrases)


def filter_pairs(
    pairs: list[QAPair], config: FilterConfig | None = None
) -> tuple[list[QAPair], list[tuple[QAPair, RejectReason]]]:
    """Strict data filtering; the first failing rule is the recorded reason.

    Rule order: InvalidQuestion, MissingAnswer, InvalidAnswer, Duplicate
    (against previously kept questions).  Kept pairs preserve input order,
    so filtering is idempotent.
    """
    config = config or FilterConfig()
    kept: list[QAPair] = []
    rejected: list[tuple[QAPair, RejectReason]] = []
    for pair in pairs:
        if not _question_valid(pair.question, config):
            rejected.append((pair, RejectReason.INVALID_QUESTION))
            continue
        if not pair.answer.strip():
            rejected.append((pair, RejectReason.MISSING_ANSWER))
            continue
        if _answer_invalid(pair.answer, config):
            rejected.append((pair, RejectReason.INVALID_ANSWER))
            continue
        if any(
            is_duplicate(pair.question, prior.question, config.duplicate_threshold)
            for prior in kept
        ):
            rejected.append((pair, RejectReason.DUPLICATE))
            continue
        kept.append(pair)
    return kept, rejected


# --- forge report ------------------------------------------------------------

@dataclass
class CategoryStat:
    total_tokens: int = 0
    qa_count: int = 0


@dataclass
class ForgeReport:
    per_category: dict[Category, CategoryStat] = field(default_factory=dict)
    rejected: Counter = field(default_factory=Counter)
    skipped_chunks: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_category": {
                cat.value: {"total_tokens": st.total_tokens, "qa_count": st.qa_count}
                for cat, st in self.per_category.items()
            },
            "rejected": {reason.value: n for reason, n in sorted(
                self.rejected.items(), key=lambda kv: kv[0].value
            )},
            "skipped_chunks": [list(item) for item in self.skipped_chunks],
        }


def render_forge_table(report: ForgeReport) -> str:
    """Aligned statistics table: category, token mass, kept Q&A count."""
    rows = [("Category", "Total Tokens", "Number of Q&A")]
    for cat in Category:
        stat = report.per_category.get(cat)
        if stat is None:
            continue
        if cat is Category.OTHER and stat.total_tokens == 0 and stat.qa_count == 0:
            continue
        rows.append((cat.display_name, f"{stat.total_tokens:,}", f"{stat.qa_count:,}"))
    widths = [max(len(row[col]) for row in rows) for col in range(3)]
    lines = []
    for name, tokens, count in rows:
        lines.append(
            f"{name:<{widths[0]}}  {tokens:>{widths[1]}}  {count:>{widths[2]}}"
        )
    return "\n".join(lines)


def forge_report_csv(report: ForgeReport) -> str:
    lines = ["category,total_tokens,qa_count"]
    for cat in Category:
        stat = report.per_category.get(cat)
        if stat is None:
            continue
        lines.append(f"{cat.value},{stat.total_tokens},{stat.qa_count}")
    lines.append("")
    lines.append("reject_reason,count")
    for reason in RejectReason:
        lines.append(f"{reason.value},{report.rejected.get(reason, 0)}")
    return "\n".join(lines) + "\n"


# --- the Figure-1 pipeline ----------------------------------------------------

def build_rtd(
    documents: list[Document],
    policy: ChunkPolicy,
    backend: BackendSpec,
    out_path: str | Path | None = None,
    *,
    max_q: int = 3,
    few_shot: list[tuple[str, str]] | None = None,
    filter_config: FilterConfig | None = None,
    question_template: PromptTemplate | None = None,
    answer_template: PromptTemplate | None = None,
    question_params: GenerationParams | None = None,
    root_dir_name: str = "data_source",
) -> tuple[list[QAPair], ForgeReport]:
    """Run the full chunk -> question -> answer -> filter pipeline.

    Per-chunk failures are recorded in the report and the pipeline
    continues; it fails only when a nonempty corpus yields zero kept pairs.
    Writes kept pairs as JSONL when ``out_path`` is given.
    """
    report = ForgeReport()
    for cat in Category:
        report.per_category[cat] = CategoryStat()
    candidates: list[QAPair] = []
    for doc in sorted(documents, key=lambda d: d.source_path):
        report.per_category[doc.category].total_tokens += doc.token_count
        for chunk in chunk_document(doc, policy, root_dir_name):
            if chunk.token_count == 0:
                continue
            try:
                questions = generate_questions(
                    chunk,
                    backend,
                    max_q=max_q,
                    few_shot=few_shot,
                    template=question_template,
                    params=question_params,
                )
            except UnparseableResponse as exc:
                report.skipped_chunks.append((chunk.id, str(exc)))
                continue
            for j, question in enumerate(questions):
                try:
                    answer = generate_answer(
                        chunk, question, backend, template=answer_template
                    )
                except Exception as exc:  # noqa: BLE001 - record and move on
                    report.skipped_chunks.append((chunk.id, f"answer failed: {exc}"))
                    continue
                candidates.append(
                    QAPair(
                        id=f"qa-{chunk.id}-{j}",
                        question=question,
                        answer=answer,
                        category=chunk.category,
                        source_chunk_id=chunk.id,
                        flags=frozenset({PairFlag.GENERATED}),
                    )
                )
    kept, rejected = filter_pairs(candidates, filter_config)
    for _pair, reason in rejected:
        report.rejected[reason] += 1
    for pair in kept:
        report.per_category[pair.category].qa_count += 1
    # Drop empty Other bucket so reports mirror the three-category layout.
    if (
        report.per_category[Category.OTHER].total_tokens == 0
        and report.per_category[Category.OTHER].qa_count == 0
    ):
        del report.per_category[Category.OTHER]
    if documents and not kept:
        raise ForgeError("no Q&A pairs survived filtering")
    if out_path is not None:
        dump_pairs_jsonl(kept, out_path)
    return kept, report


# --- exam-bank conversion ------------------------------------------------------

class ItemType(Enum):
    SINGLE_CHOICE = "SingleChoice"
    MULTIPLE_CHOICE = "MultipleChoice"
    TRUE_FALSE = "TrueFalse"


_OPTION_LETTERS = "ABCDEFGH"


@dataclass(frozen=True)
class ExamItem:
    stem: str
    item_type: ItemType
    options: tuple[str, ...]
    key: str
    category: Category

    def __post_init__(self):
        if self.item_type is ItemType.TRUE_FALSE:
            if self.options:
                raise ValueError("true/false items carry no options")
            if self.key not in ("true", "false"):
                raise ValueError("true/false key must be 'true' or 'false'")
            return
        letters = self.key_letters()
        if not letters:
            raise ValueError("choice items need at least one keyed option")
        if self.item_type is ItemType.SINGLE_CHOICE and len(letters) != 1:
            raise ValueError("single choice key must name exactly one option")
        for letter in letters:
            if _OPTION_LETTERS.index(letter) >= len(self.options):
                raise ValueError(f"key letter {letter} has no matching option")

    def key_letters(self) -> list[str]:
        return [ch for ch in self.key.upper() if ch in _OPTION_LETTERS]

    def keyed_options(self) -> list[str]:
        return [self.options[_OPTION_LETTERS.index(ch)] for ch in self.key_letters()]


def exam_item_from_dict(d: dict) -> ExamItem:
    key = d["key"]
    if isinstance(key, bool):
        key = "true" if key else "false"
    elif isinstance(key, list):
        key = "".join(key)
    return ExamItem(
        stem=d["stem"],
        item_type=ItemType(d["item_type"]),
        options=tuple(d.get("options", [])),
        key=str(key),
        category=Category.parse(d["category"]),
    )


def load_exam_bank(path: str | Path) -> list[ExamItem]:
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                items.append(exam_item_from_dict(json.loads(line)))
    return items


def rephrase_stem(item: ExamItem) -> str:
    """Deterministic question-side rephrasing, one template per item type."""
    if item.item_type is ItemType.TRUE_FALSE:
        return f"判断下列说法是否正确：{item.stem}"
    option_text = "；".join(
        f"{_OPTION_LETTERS[i]}. {opt}" for i, opt in enumerate(item.options)
    )
    if item.item_type is ItemType.SINGLE_CHOICE:
        return f"{item.stem}（单选）选项：{option_text}。正确的是哪一项？"
    return f"{item.stem}（多选）选项：{option_text}。正确的有哪些？"


def convert_exam_item(
    item: ExamItem,
    backend: BackendSpec,
    index: int = 0,
    template: PromptTemplate | None = None,
) -> QAPair:
    """One exam item -> one QAPair with a declarative reference answer.

    Choice items are validated post-hoc: every keyed option's text must
    appear in the generated answer, otherwise the conversion is rejected
    as an invalid answer.
    """
    template = template or load_template("exam_answer")
    if item.item_type is ItemType.TRUE_FALSE:
        key_text = "正确" if item.key == "true" else "错误"
    else:
        key_text = "；".join(item.keyed_options())
    user = render(
        template,
        {"item_type": item.item_type.value, "stem": item.stem, "key_text": key_text},
    )
    exchange = complete(
        backend,
        "You rewrite examination items as declarative reference answers.",
        user,
        GenerationParams(temperature=0.0),
    )
    answer = exchange.response.strip()
    if not answer:
        raise ExamConversionError(
            RejectReason.MISSING_ANSWER.value, f"empty conversion for item {index}"
        )
    if item.item_type is not ItemType.TRUE_FALSE:
        for option_text in item.keyed_options():
            if option_text not in answer:
                raise ExamConversionError(
                    RejectReason.INVALID_ANSWER.value,
                    f"keyed option {option_text!r} missing from answer for item {index}",
                )
    return QAPair(
        id=f"exam-{index:04d}",
        question=rephrase_stem(item),
        answer=answer,
        category=item.category,
        source_chunk_id="",
        flags=frozenset({PairFlag.EXAM_CONVERTED}),
    )


def convert_exam_bank(
    items: list[ExamItem],
    backend: BackendSpec,
    template: PromptTemplate | None = None,
) -> tuple[list[QAPair], list[tuple[int, str]]]:
    """Convert a whole bank; skipped items come back as (index, reason)."""
    pairs: list[QAPair] = []
    skipped: list[tuple[int, str]] = []
    for i, item in enumerate(items):
        try:
            pairs.append(convert_exam_item(item, backend, index=i, template=template))
        except ExamConversionError as exc:
            skipped.append((i, f"{exc.reason}: {exc}"))
    return pairs, skipped


# --- evaluation-set sampling ---------------------------------------------------

def sample_eval_set(
    pairs: list[QAPair],
    per_category: int,
    seed: int,
    categories: list[Category] | None = None,
) -> list[QAPair]:
    """Seeded uniform sample without replacement, per category.

    Deterministic for a fixed seed regardless of input order; output is
    sorted by (category, id).
    """
    if per_category == 0:
        return []
    if per_category < 0:
        raise ValueError("per_category must be >= 0")
    by_category: dict[Category, list[QAPair]] = {}
    for pair in pairs:
        by_category.setdefault(pair.category, []).append(pair)
    chosen_categories = categories or [c for c in Category if c in by_category]
    rng = random.Random(seed)
    sampled: list[QAPair] = []
    for cat in chosen_categories:
        pool = sorted(by_category.get(cat, []), key=lambda p: p.id)
        if len(pool) < per_category:
            raise InsufficientCategory(cat.value, len(pool), per_category)
        sampled.extend(rng.sample(pool, per_category))
    order = {cat: i for i, cat in enumerate(Category)}
    sampled.sort(key=lambda p: (order[p.category], p.id))
    return sampled
