"""Chat-completion gateway: remote endpoints and deterministic scripted backends.

Prompt templates live as text assets (one file per template under
``templates/``, name = filename stem) with ``{slot}`` markers.  Scripted
backends make every pipeline stage testable without a model: ordered
(matcher, response) rules, then a fallback of Echo, EchoContext, Fixed
text, or nothing.
"""

from __future__ import annotations

import os
import re
import time
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import requests

from .errors import (
    BackendUnavailable,
    MissingSlot,
    NoRuleMatched,
    ResponseEmpty,
    UnknownSlot,
)

# Delimiters around the retrieved-context region of a prompt.  EchoContext
# backends return exactly what sits between them, which lets desk-scale
# experiments produce grounded answers deterministically.
CONTEXT_BEGIN = "[[CONTEXT]]"
CONTEXT_END = "[[/CONTEXT]]"

_SLOT_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    required_slots: frozenset[str]

    def __post_init__(self):
        present = set(_SLOT_RE.findall(self.body))
        missing = self.required_slots - present
        if missing:
            raise ValueError(
                f"template {self.name!r} body lacks required slots: {sorted(missing)}"
            )

    @classmethod
    def from_body(cls, name: str, body: str) -> "PromptTemplate":
        return cls(name=name, body=body, required_slots=frozenset(_SLOT_RE.findall(body)))


def load_template(name: str, directory: str | Path | None = None) -> PromptTemplate:
    """Load ``<name>.txt`` from ``directory`` or the packaged template assets."""
    if directory is not None:
        body = (Path(directory) / f"{name}.txt").read_text(encoding="utf-8")
    else:
        body = (
            resources.files("railadvisor")
            .joinpath("templates", f"{name}.txt")
            .read_text(encoding="utf-8")
        )
    return PromptTemplate.from_body(name, body)


def render(template: PromptTemplate, slots: dict[str, str]) -> str:
    """Fill every ``{slot}`` in the body; strict about extras and omissions.

    Replacement is literal and single-pass: slot values are never rescanned
    for markers of their own.
    """
    present = set(_SLOT_RE.findall(template.body))
    for name in sorted(present):
        if name not in slots:
            raise MissingSlot(name)
    for name in sorted(slots):
        if name not in present:
            raise UnknownSlot(name)
    return _SLOT_RE.sub(lambda m: slots[m.group(1)], template.body)


class BackendKind(Enum):
    REMOTE = "Remote"
    SCRIPTED = "Scripted"


class FallbackMode(Enum):
    NONE = "None"
    ECHO = "Echo"
    ECHO_CONTEXT = "EchoContext"
    FIXED = "Fixed"


@dataclass(frozen=True)
class ScriptRule:
    pattern: str
    response: str
    regex: bool = False

    def matches(self, user: str) -> bool:
        if self.regex:
            return re.search(self.pattern, user, re.DOTALL) is not None
        return self.pattern in user


@dataclass(frozen=True)
class BackendSpec:
    kind: BackendKind = BackendKind.SCRIPTED
    endpoint_url: str = ""
    model_name: str = ""
    api_key_env: str = "CHAT_API_KEY"
    timeout: float = 30.0
    max_retries: int = 2
    rules: tuple[ScriptRule, ...] = ()
    fallback: FallbackMode = FallbackMode.ECHO
    fallback_text: str = ""

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.kind is BackendKind.REMOTE and not self.endpoint_url:
            raise ValueError("remote backend requires endpoint_url")


@dataclass(frozen=True)
class GenerationParams:
    temperature: float = 0.0
    max_tokens: int | None = None


@dataclass(frozen=True)
class ChatExchange:
    system: str
    user: str
    response: str
    latency: float
    backend: BackendKind


def extract_context(prompt: str) -> str:
    """Text between the first CONTEXT_BEGIN and the last CONTEXT_END.

    Falls back to the whole prompt when the delimiters are absent.
    """
    start = prompt.find(CONTEXT_BEGIN)
    end = prompt.rfind(CONTEXT_END)
    if start < 0 or end < 0 or end <= start:
        return prompt
    return prompt[start + len(CONTEXT_BEGIN) : end].strip("\n")


def _scripted_response(spec: BackendSpec, user: str) -> str:
    for rule in spec.rules:
        if rule.matches(user):
            return rule.response
    if spec.fallback is FallbackMode.ECHO:
        return user
    if spec.fallback is FallbackMode.ECHO_CONTEXT:
        return extract_context(user)
    if spec.fallback is FallbackMode.FIXED:
        return spec.fallback_text
    raise NoRuleMatched("no scripted rule matched and fallback is None")


def _remote_response(
    spec: BackendSpec, system: str, user: str, params: GenerationParams
) -> str:
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(spec.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    body: dict = {
        "model": spec.model_name,
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ],
        "temperature": params.temperature,
    }
    if params.max_tokens is not None:
        body["max_tokens"] = params.max_tokens
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
            last_err = BackendUnavailable(f"backend returned {resp.status_code}")
            if attempt < spec.max_retries:
                time.sleep(min(0.1 * 2**attempt, 2.0))
            continue
        if resp.status_code != 200:
            raise BackendUnavailable(
                f"backend returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"malformed completion response: {exc}") from exc
        return content if isinstance(content, str) else ""
    raise BackendUnavailable(f"backend unavailable: {last_err}")


def complete(
    backend: BackendSpec,
    system: str,
    user: str,
    params: GenerationParams | None = None,
) -> ChatExchange:
    """One chat completion through whichever backend ``backend`` names."""
    if not user:
        raise ValueError("user prompt must be nonempty")
    params = params or GenerationParams()
    started = time.perf_counter()
    if backend.kind is BackendKind.SCRIPTED:
        response = _scripted_response(backend, user)
    else:
        response = _remote_response(backend, system, user, params)
    if not response:
        raise ResponseEmpty("backend produced an empty response")
    return ChatExchange(
        system=system,
        user=user,
        response=response,
        latency=time.perf_counter() - started,
        backend=backend.kind,
    )
