"""Two-pass advisory pipeline: draft, retrieve, gate, refine, cite.

Every question is answered twice.  The first pass asks the backend
directly.  The second embeds the question, pulls the top-k chunks from
the index, and compares the best score against a preset threshold: below
it the retrieval is judged irrelevant and the draft passes through
unchanged; at or above it the kept chunks become extended context for a
refinement pass whose output carries document citations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .embedding import EmbedderSpec, embed
from .errors import BackendUnavailable, RemoteUnavailable, ResponseEmpty
from .llm_gateway import (
    BackendSpec,
    GenerationParams,
    PromptTemplate,
    complete,
    load_template,
    render,
)
from .vindex import RetrievalHit, VectorIndex


@dataclass(frozen=True)
class EngineConfig:
    top_k: int = 5
    score_threshold: float = 0.35
    draft_template: str = "draft"
    refine_template: str = "refine"
    citation_prefix: str = "Referenced from: "

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        # Thresholds above 1 are legal and force passthrough on every
        # question, which is how retrieval is switched off for comparisons.
        if self.score_threshold < 0.0:
            raise ValueError("score_threshold must be >= 0")


@dataclass(frozen=True)
class GateDecision:
    kind: str  # "passthrough" | "refine"
    kept: tuple[RetrievalHit, ...] = ()

    @property
    def passthrough(self) -> bool:
        return self.kind == "passthrough"


def gate(hits: list[RetrievalHit], threshold: float) -> GateDecision:
    """Passthrough when there are no hits or the best score sits below
    ``threshold``; otherwise keep every hit scoring at or above it."""
    if not hits or hits[0].score < threshold:
        return GateDecision(kind="passthrough")
    kept = tuple(h for h in hits if h.score >= threshold)
    return GateDecision(kind="refine", kept=kept)


@dataclass
class AdvisoryAnswer:
    question: str
    draft: str
    hits: list[RetrievalHit]
    used_retrieval: bool
    final: str
    citations: list[str]
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "draft": self.draft,
            "hits": [h.to_dict() for h in self.hits],
            "used_retrieval": self.used_retrieval,
            "final": self.final,
            "citations": list(self.citations),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdvisoryAnswer":
        return cls(
            question=d["question"],
            draft=d["draft"],
            hits=[RetrievalHit(**h) for h in d["hits"]],
            used_retrieval=bool(d["used_retrieval"]),
            final=d["final"],
            citations=list(d["citations"]),
            warnings=list(d.get("warnings", [])),
        )


def dedup_labels(hits) -> list[str]:
    """Distinct source labels in order of first appearance."""
    seen: list[str] = []
    for hit in hits:
        if hit.source_label not in seen:
            seen.append(hit.source_label)
    return seen


class AdvisoryEngine:
    """Wires an index, an embedder, and a chat backend into ask()."""

    def __init__(
        self,
        index: VectorIndex,
        embedder: EmbedderSpec,
        backend: BackendSpec,
        config: EngineConfig | None = None,
        template_dir: str | Path | None = None,
        system_prompt: str = "You assist high-speed train drivers with fault handling.",
    ):
        self.index = index
        self.embedder = embedder
        self.backend = backend
        self.config = config or EngineConfig()
        self.system_prompt = system_prompt
        self._draft_tpl: PromptTemplate = load_template(
            self.config.draft_template, template_dir
        )
        self._refine_tpl: PromptTemplate = load_template(
            self.config.refine_template, template_dir
        )

    def answer_direct(self, question: str) -> str:
        """First-pass answer straight from the backend, no retrieval."""
        if not question:
            raise ValueError("question must be nonempty")
        user = render(self._draft_tpl, {"question": question})
        exchange = complete(self.backend, self.system_prompt, user, GenerationParams(0.0))
        return exchange.response

    def retrieve(self, question: str) -> list[RetrievalHit]:
        """Top-k chunks for the question, embedded with the index's embedder spec."""
        if len(self.index) == 0:
            return []
        query = embed(self.embedder, [question])[0]
        return self.index.search(query, self.config.top_k)

    def refine(
        self, question: str, draft: str, kept_hits: list[RetrievalHit]
    ) -> tuple[str, list[str]]:
        """Second-pass answer grounded in the kept hits, with citations.

        Citation lines are appended only for labels the model did not
        already cite, so injection is idempotent.
        """
        if not kept_hits:
            raise ValueError("refine requires at least one kept hit")
        context = "\n\n".join(f"{h.source_label}\n{h.text}" for h in kept_hits)
        user = render(
            self._refine_tpl,
            {"question": question, "draft": draft, "context": context},
        )
        exchange = complete(self.backend, self.system_prompt, user, GenerationParams(0.0))
        final = exchange.response
        citations = dedup_labels(kept_hits)
        for label in citations:
            if f"{self.config.citation_prefix}{label}" not in final:
                final += f"\n({self.config.citation_prefix}{label})"
        return final, citations

    def ask(self, question: str) -> AdvisoryAnswer:
        """Full trace of one advisory turn."""
        if not question:
            raise ValueError("question must be nonempty")
        warnings: list[str] = []
        draft = self.answer_direct(question)
        try:
            hits = self.retrieve(question)
        except RemoteUnavailable as exc:
            hits = []
            warnings.append(f"retrieval failed, answering without context: {exc}")
        decision = gate(hits, self.config.score_threshold)
        if decision.passthrough:
            return AdvisoryAnswer(
                question=question,
                draft=draft,
                hits=hits,
                used_retrieval=False,
                final=draft,
                citations=[],
                warnings=warnings,
            )
        try:
            final, citations = self.refine(question, draft, list(decision.kept))
        except (BackendUnavailable, ResponseEmpty) as exc:
            warnings.append(f"refine failed, returning draft: {exc}")
            return AdvisoryAnswer(
                question=question,
                draft=draft,
                hits=hits,
                used_retrieval=False,
                final=draft,
                citations=[],
                warnings=warnings,
            )
        return AdvisoryAnswer(
            question=question,
            draft=draft,
            hits=hits,
            used_retrieval=True,
            final=final,
            citations=citations,
            warnings=warnings,
        )
