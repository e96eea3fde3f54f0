"""Chat-completion and embedding backends.

Two implementations of the same small surface: a deterministic in-process
mock that makes every higher layer testable offline, and a remote backend
speaking the OpenAI-compatible chat/completions and embeddings schema.
"""
from __future__ import annotations

import math
import os
import re
import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Protocol, Sequence

import requests

from .errors import (
    InvalidSpecError,
    ProviderRejectedError,
    ProviderUnreachableError,
)

ROLES = ("system", "user", "assistant")

MOCK_DIMENSION = 64
FALLBACK_PREFIX = "ECHO:"
API_KEY_ENV = "AGENT_COFORGE_API_KEY"
DEFAULT_TIMEOUT_S = 30.0

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_UINT64_MASK = 0xFFFFFFFFFFFFFFFF

# alphanumeric runs; underscore is a separator, not a token character
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class ChatTurn:
    """One prompt turn. Content may be empty only for system turns."""

    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise InvalidSpecError(f"invalid turn role: {self.role!r}")
        if not self.content.strip() and self.role != "system":
            raise InvalidSpecError("user and assistant turns need non-blank content")


@dataclass(frozen=True)
class GenParams:
    """Generation controls forwarded to the backend."""

    temperature: float = 0.7
    max_output_tokens: int = 512
    stop_sequences: tuple = ()

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise InvalidSpecError("temperature must be within [0, 2]")
        if self.max_output_tokens < 1:
            raise InvalidSpecError("max_output_tokens must be at least 1")
        if len(self.stop_sequences) > 4:
            raise InvalidSpecError("at most 4 stop sequences are supported")


@dataclass(frozen=True)
class EmbeddingVector:
    """A dense embedding; either the zero vector or unit L2 norm."""

    components: tuple

    @property
    def dimension(self) -> int:
        return len(self.components)

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.components)

    @property
    def norm(self) -> float:
        return math.sqrt(_dot(self.components, self.components))


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    total = 0.0
    for x, y in zip(a, b):
        total += x * y
    return total


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; zero vectors score 0.0 against everything.

    Identical component tuples score exactly 1.0 so that an identical-text
    query ranks its own chunk first without float noise in the way.
    """
    if a.dimension != b.dimension:
        raise InvalidSpecError(
            f"embedding dimension mismatch: {a.dimension} vs {b.dimension}"
        )
    if a.components == b.components:
        return 1.0 if any(a.components) else 0.0
    da = _dot(a.components, a.components)
    db = _dot(b.components, b.components)
    if da == 0.0 or db == 0.0:
        return 0.0
    value = _dot(a.components, b.components) / math.sqrt(da * db)
    return max(-1.0, min(1.0, value))


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _UINT64_MASK
    return h


def hash_embed(text: str, dimension: int = MOCK_DIMENSION) -> EmbeddingVector:
    """Deterministic bag-of-words embedding.

    Lowercase, split into alphanumeric runs, hash each token with 64-bit
    FNV-1a, and add +1 or -1 (bit 6 of the hash picks the sign) at index
    ``hash mod dimension``. The result is L2-normalized; no tokens, or a
    fully cancelled accumulation, yields the zero vector.
    """
    accum = [0.0] * dimension
    for token in _TOKEN_RE.findall(text.lower()):
        h = fnv1a64(token.encode("utf-8"))
        sign = 1.0 if (h >> 6) & 1 == 0 else -1.0
        accum[h % dimension] += sign
    norm = math.sqrt(sum(c * c for c in accum))
    if norm == 0.0:
        return EmbeddingVector(tuple(accum))
    return EmbeddingVector(tuple(c / norm for c in accum))


class ChatProvider(Protocol):
    """What the engine needs from a model backend."""

    dimension: int

    def chat_complete(self, turns: Sequence[ChatTurn], params: Optional[GenParams] = None) -> str:
        ...

    def embed_text(self, text: str) -> EmbeddingVector:
        ...


class MockProvider:
    """Scripted chat replies with a deterministic fallback.

    Replies are consumed strictly FIFO under a lock, so concurrent callers
    each observe a distinct scripted line. When the script runs out the
    reply is ``"ECHO:"`` plus the content of the last user turn. Embeddings
    come from :func:`hash_embed` and never touch the script.

    The provider records every chat call (as an immutable copy of the turn
    list), which the persona accounting tests lean on.
    """

    def __init__(self, script: Iterable[str] = (), dimension: int = MOCK_DIMENSION):
        self.dimension = dimension
        self._script = deque(script)
        self._lock = threading.Lock()
        self.chat_calls = []
        self.embed_calls = 0

    def chat_complete(self, turns: Sequence[ChatTurn], params: Optional[GenParams] = None) -> str:
        if not turns:
            raise InvalidSpecError("chat_complete requires at least one turn")
        with self._lock:
            self.chat_calls.append(tuple(turns))
            if self._script:
                return self._script.popleft()
        last_user = ""
        for turn in reversed(turns):
            if turn.role == "user":
                last_user = turn.content
                break
        return FALLBACK_PREFIX + last_user

    def embed_text(self, text: str) -> EmbeddingVector:
        with self._lock:
            self.embed_calls += 1
        return hash_embed(text, self.dimension)

    def script_remaining(self) -> int:
        with self._lock:
            return len(self._script)

    def extend_script(self, lines: Iterable[str]) -> None:
        with self._lock:
            self._script.extend(lines)


class RemoteProvider:
    """OpenAI-compatible HTTP backend.

    One request per call, 30 second timeout, no retries; callers own their
    idempotency. The API key comes from the constructor or the
    ``AGENT_COFORGE_API_KEY`` environment variable.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        embed_model: str,
        dimension: int = 1536,
        api_key: Optional[str] = None,
        timeout: float = DEFAULT_TIMEOUT_S,
        session: Optional[requests.Session] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.embed_model = embed_model
        self.dimension = dimension
        self.timeout = timeout
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._session = session if session is not None else requests.Session()

    def chat_complete(self, turns: Sequence[ChatTurn], params: Optional[GenParams] = None) -> str:
        if not turns:
            raise InvalidSpecError("chat_complete requires at least one turn")
        params = params if params is not None else GenParams()
        payload = {
            "model": self.model,
            "messages": [{"role": t.role, "content": t.content} for t in turns],
            "temperature": params.temperature,
            "max_tokens": params.max_output_tokens,
        }
        if params.stop_sequences:
            payload["stop"] = list(params.stop_sequences)
        data = self._post("/chat/completions", payload)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ProviderRejectedError("malformed chat completion response", detail=data)
        if not isinstance(content, str):
            raise ProviderRejectedError("chat completion content is not text", detail=data)
        return content

    def embed_text(self, text: str) -> EmbeddingVector:
        data = self._post("/embeddings", {"model": self.embed_model, "input": text})
        try:
            raw = data["data"][0]["embedding"]
            components = tuple(float(x) for x in raw)
        except (KeyError, IndexError, TypeError, ValueError):
            raise ProviderRejectedError("malformed embeddings response", detail=data)
        return EmbeddingVector(components)

    def _post(self, path: str, payload: dict) -> dict:
        url = self.base_url + path
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        try:
            response = self._session.post(url, json=payload, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderUnreachableError(f"provider unreachable: {exc}") from exc
        if not 200 <= response.status_code < 300:
            raise ProviderRejectedError(
                f"provider returned status {response.status_code}",
                detail=response.text,
            )
        try:
            return response.json()
        except ValueError as exc:
            raise ProviderRejectedError("provider returned non-JSON body") from exc
