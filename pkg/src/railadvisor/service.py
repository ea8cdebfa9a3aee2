"""HTTP service exposing the advisory engine.

Endpoints (all JSON):

* ``POST /v1/ask`` ``{"question": str}`` -> full AdvisoryAnswer trace
* ``POST /v1/ingest`` -> rebuild the index from the configured corpus
* ``GET /v1/chunks/{chunk_id}`` -> chunk text for citation drill-down
* ``GET /v1/health`` -> index size and backend kinds
* ``GET /v1/config`` -> redacted configuration

Errors use ``{"error": {"code": ..., "message": ...}}`` with stable codes.
Queries keep answering on the previous index snapshot while an ingest
rebuild runs; only the brief swap itself answers 503 RETRY_LATER.
"""

from __future__ import annotations

import logging
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import AppConfig, redacted_config_dict
from .corpus import Chunk, chunk_document, chunk_to_dict, load_corpus, load_manifest
from .errors import AdvisorError, BackendUnavailable, RemoteUnavailable
from .rag_engine import AdvisoryEngine
from .vindex import VectorIndex, entries_from_chunks

logger = logging.getLogger("railadvisor.service")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class AskRequest(BaseModel):
    question: str = ""


def load_corpus_chunks(config: AppConfig) -> tuple[list[Chunk], int]:
    """Load and chunk the configured corpus (no embedding)."""
    manifest = load_manifest(config.manifest_path) if config.manifest_path else None
    documents, errors = load_corpus(config.corpus_dir, manifest)
    for err in errors:
        logger.warning("corpus load: %s", err.message)
    if not documents:
        raise AdvisorError(f"no documents found under {config.corpus_dir}")
    chunks: list[Chunk] = []
    for doc in documents:
        chunks.extend(
            chunk_document(doc, config.chunk_policy, config.corpus_dir.name)
        )
    return chunks, len(documents)


def build_index_from_corpus(config: AppConfig) -> tuple[VectorIndex, list[Chunk], int]:
    """Load, chunk, and embed the configured corpus into a fresh index."""
    chunks, doc_count = load_corpus_chunks(config)
    index = VectorIndex()
    index.insert(entries_from_chunks(chunks, config.embedder))
    return index, chunks, doc_count


class ServiceState:
    def __init__(self, config: AppConfig):
        self.config = config
        self.engine: AdvisoryEngine | None = None
        self.chunks: dict[str, Chunk] = {}
        self.document_count = 0
        self.swapping = False
        self._ingest_lock = threading.Lock()

    def install(self, index: VectorIndex, chunks: list[Chunk], doc_count: int) -> None:
        engine = AdvisoryEngine(
            index=index,
            embedder=self.config.embedder,
            backend=self.config.backend,
            config=self.config.engine,
            template_dir=self.config.template_dir,
        )
        # Brief swap window; concurrent asks observe either snapshot.
        self.swapping = True
        try:
            self.engine = engine
            self.chunks = {c.id: c for c in chunks}
            self.document_count = doc_count
        finally:
            self.swapping = False

    def startup(self) -> None:
        if self.config.index_path.is_file():
            index = VectorIndex.load(self.config.index_path)
            # Chunk store comes from the corpus so drill-down works after a
            # restart; the persisted index stays authoritative for search.
            try:
                chunks, doc_count = load_corpus_chunks(self.config)
            except AdvisorError:
                chunks, doc_count = [], 0
            self.install(index, chunks, doc_count)
        else:
            self.install(*self._rebuild())

    def _rebuild(self) -> tuple[VectorIndex, list[Chunk], int]:
        index, chunks, doc_count = build_index_from_corpus(self.config)
        self.config.index_path.parent.mkdir(parents=True, exist_ok=True)
        index.persist(self.config.index_path)
        return index, chunks, doc_count

    def ingest(self) -> dict:
        with self._ingest_lock:
            index, chunks, doc_count = self._rebuild()
            self.install(index, chunks, doc_count)
            return {
                "documents": doc_count,
                "chunks": len(chunks),
                "index_size": len(index),
            }


def create_app(config: AppConfig) -> FastAPI:
    state = ServiceState(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        state.startup()
        yield

    app = FastAPI(title="railadvisor", version="0.1.0", lifespan=lifespan)
    app.state.advisor = state

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.get("/v1/health")
    def health():
        engine = state.engine
        return {
            "status": "ok",
            "index_size": len(engine.index) if engine else 0,
            "documents": state.document_count,
            "backend": config.backend.kind.value,
            "embedder": config.embedder.kind.value,
            "score_threshold": config.engine.score_threshold,
        }

    @app.get("/v1/config")
    def get_config():
        return redacted_config_dict(config)

    @app.post("/v1/ask")
    def ask(body: AskRequest):
        if not body.question.strip():
            raise ApiError(400, "EMPTY_QUESTION", "question must be nonempty")
        if state.swapping or state.engine is None:
            raise ApiError(503, "RETRY_LATER", "index swap in progress")
        try:
            answer = state.engine.ask(body.question)
        except (BackendUnavailable, RemoteUnavailable) as exc:
            raise ApiError(502, "BACKEND_UNAVAILABLE", str(exc)) from exc
        except AdvisorError as exc:
            raise ApiError(500, "INTERNAL", str(exc)) from exc
        return answer.to_dict()

    @app.post("/v1/ingest")
    def ingest():
        try:
            return state.ingest()
        except AdvisorError as exc:
            raise ApiError(409, "INGEST_FAILED", str(exc)) from exc

    @app.get("/v1/chunks/{chunk_id}")
    def get_chunk(chunk_id: str):
        chunk = state.chunks.get(chunk_id)
        if chunk is None:
            raise ApiError(404, "UNKNOWN_CHUNK", f"no chunk with id {chunk_id!r}")
        return chunk_to_dict(chunk)

    return app


def serve(config: AppConfig) -> None:
    """Run the service until interrupted; uvicorn handles graceful shutdown."""
    import uvicorn

    logging.basicConfig(level=config.log_level)
    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="warning")
