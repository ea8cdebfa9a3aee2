"""Application configuration: one JSON file, env vars only for secrets.

Relative paths inside the file resolve against the file's own directory,
so a config can travel with its corpus.  Validation happens up front with
field-precise messages; secrets never appear in the file (backends name
the environment variable that holds their API key).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import ChunkMode, ChunkPolicy, DEFAULT_BOUNDARY_PATTERNS
from .embedding import EmbedderKind, EmbedderSpec
from .errors import ConfigError
from .llm_gateway import (
    BackendKind,
    BackendSpec,
    FallbackMode,
    ScriptRule,
    load_template,
)
from .rag_engine import EngineConfig


@dataclass
class AppConfig:
    corpus_dir: Path
    manifest_path: Path | None
    chunk_policy: ChunkPolicy
    embedder: EmbedderSpec
    backend: BackendSpec
    engine: EngineConfig
    index_path: Path
    listen_host: str = "127.0.0.1"
    listen_port: int = 8763
    log_level: str = "INFO"
    template_dir: Path | None = None
    base_dir: Path = field(default_factory=Path)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return d[key]


def _chunk_policy(d: dict) -> ChunkPolicy:
    try:
        mode = ChunkMode(d.get("mode", "FixedTokens"))
    except ValueError as exc:
        raise ConfigError(f"chunk.mode: {exc}") from exc
    try:
        return ChunkPolicy(
            mode=mode,
            chunk_size=int(d.get("chunk_size", 500)),
            overlap=int(d.get("overlap", 0)),
            boundary_patterns=tuple(
                d.get("boundary_patterns", DEFAULT_BOUNDARY_PATTERNS)
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"chunk: {exc}") from exc


def _embedder_spec(d: dict) -> EmbedderSpec:
    try:
        kind = EmbedderKind(d.get("kind", "Hashed"))
        return EmbedderSpec(
            kind=kind,
            dim=int(d.get("dim", 256)),
            endpoint_url=d.get("endpoint_url", ""),
            model_name=d.get("model_name", ""),
            api_key_env=d.get("api_key_env", "EMBEDDINGS_API_KEY"),
            timeout=float(d.get("timeout", 10.0)),
            max_batch=int(d.get("max_batch", 64)),
            max_retries=int(d.get("max_retries", 2)),
        )
    except ValueError as exc:
        raise ConfigError(f"embedder: {exc}") from exc


def _backend_spec(d: dict) -> BackendSpec:
    try:
        kind = BackendKind(d.get("kind", "Scripted"))
        rules = tuple(
            ScriptRule(
                pattern=_require(r, "pattern", "backend.rules"),
                response=_require(r, "response", "backend.rules"),
                regex=bool(r.get("regex", False)),
            )
            for r in d.get("rules", [])
        )
        return BackendSpec(
            kind=kind,
            endpoint_url=d.get("endpoint_url", ""),
            model_name=d.get("model_name", ""),
            api_key_env=d.get("api_key_env", "CHAT_API_KEY"),
            timeout=float(d.get("timeout", 30.0)),
            max_retries=int(d.get("max_retries", 2)),
            rules=rules,
            fallback=FallbackMode(d.get("fallback", "Echo")),
            fallback_text=d.get("fallback_text", ""),
        )
    except ValueError as exc:
        raise ConfigError(f"backend: {exc}") from exc


def _engine_config(d: dict) -> EngineConfig:
    try:
        return EngineConfig(
            top_k=int(d.get("top_k", 5)),
            score_threshold=float(d.get("score_threshold", 0.35)),
            draft_template=d.get("draft_template", "draft"),
            refine_template=d.get("refine_template", "refine"),
            citation_prefix=d.get("citation_prefix", "Referenced from: "),
        )
    except ValueError as exc:
        raise ConfigError(f"engine: {exc}") from exc


def load_config(path: str | Path) -> AppConfig:
    """Parse and validate the application config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    base = path.parent

    corpus_dir = base / _require(raw, "corpus_dir", str(path))
    manifest = raw.get("manifest")
    manifest_path = base / manifest if manifest else None

    listen = raw.get("listen", "127.0.0.1:8763")
    host, _, port_s = listen.partition(":")
    if not host or not port_s.isdigit():
        raise ConfigError(f"listen: expected host:port, got {listen!r}")

    log_level = str(raw.get("log_level", "INFO")).upper()
    if log_level not in logging._nameToLevel:
        raise ConfigError(f"log_level: unknown level {log_level!r}")

    template_dir = raw.get("template_dir")
    config = AppConfig(
        corpus_dir=corpus_dir,
        manifest_path=manifest_path,
        chunk_policy=_chunk_policy(raw.get("chunk", {})),
        embedder=_embedder_spec(raw.get("embedder", {})),
        backend=_backend_spec(raw.get("backend", {})),
        engine=_engine_config(raw.get("engine", {})),
        index_path=base / _require(raw, "index_path", str(path)),
        listen_host=host,
        listen_port=int(port_s),
        log_level=log_level,
        template_dir=base / template_dir if template_dir else None,
        base_dir=base,
    )
    validate_config(config)
    return config


def validate_config(config: AppConfig) -> None:
    if config.manifest_path is not None and not config.manifest_path.is_file():
        raise ConfigError(f"manifest: file not found: {config.manifest_path}")
    for name in (config.engine.draft_template, config.engine.refine_template):
        try:
            load_template(name, config.template_dir)
        except FileNotFoundError as exc:
            raise ConfigError(f"engine: template {name!r} not found: {exc}") from exc
    parent = config.index_path.parent
    if parent.exists() and not parent.is_dir():
        raise ConfigError(f"index_path: parent is not a directory: {parent}")


def redacted_config_dict(config: AppConfig) -> dict:
    """Config view for the /v1/config endpoint: no rule bodies, no secrets."""
    return {
        "corpus_dir": str(config.corpus_dir),
        "chunk": {
            "mode": config.chunk_policy.mode.value,
            "chunk_size": config.chunk_policy.chunk_size,
            "overlap": config.chunk_policy.overlap,
        },
        "embedder": {
            "kind": config.embedder.kind.value,
            "dim": config.embedder.dim,
            "model_name": config.embedder.model_name,
            "api_key_env": config.embedder.api_key_env,
        },
        "backend": {
            "kind": config.backend.kind.value,
            "model_name": config.backend.model_name,
            "api_key_env": config.backend.api_key_env,
            "rule_count": len(config.backend.rules),
            "fallback": config.backend.fallback.value,
        },
        "engine": {
            "top_k": config.engine.top_k,
            "score_threshold": config.engine.score_threshold,
            "citation_prefix": config.engine.citation_prefix,
        },
        "index_path": str(config.index_path),
    }
