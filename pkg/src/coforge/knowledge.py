"""Knowledge bases with source-attributed retrieval.

Documents are chunked on paragraph boundaries, embedded, and searched with
exact (non-approximate) cosine ranking. Every chunk carries a locator that
slices the stored source text byte-for-byte, so answers can show exactly
where their material came from.
"""
from __future__ import annotations

import re
import threading
import uuid
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import (
    DocumentTooLargeError,
    EmptyDocumentError,
    InvalidSpecError,
    NoKnowledgeBaseError,
    NotFoundError,
)
from .providers import ChatProvider, ChatTurn, EmbeddingVector, GenParams, cosine

UPLOADED = "uploaded"
CURATED = "curated"
PROVENANCES = (UPLOADED, CURATED)

DEFAULT_MAX_CHARS = 800
DEFAULT_OVERLAP_CHARS = 100
DEFAULT_CONTEXT_BUDGET = 4000
DEFAULT_K = 4
DEFAULT_MAX_DOC_BYTES = 2_000_000
CONTEXT_INSTRUCTION = "Answer only from the following context.\n"

_PARAGRAPH_SEP_RE = re.compile(r"\n\s*\n")
_SENTENCE_MARKS = (". ", "? ", "! ")


@dataclass(frozen=True)
class SourceLocator:
    """Where a chunk came from inside its source document.

    ``start_char``/``end_char`` are a half-open slice of the stored text,
    ``start_line`` is 1-based, and ``page`` counts form-feed separators
    (absent when the document has none).
    """

    doc_id: str
    doc_title: str
    start_char: int
    end_char: int
    start_line: int
    page: Optional[int] = None

    def __post_init__(self):
        if self.start_char < 0 or self.end_char <= self.start_char:
            raise InvalidSpecError("locator span must be non-empty and non-negative")
        if self.start_line < 1:
            raise InvalidSpecError("locator start_line is 1-based")
        if self.page is not None and self.page < 1:
            raise InvalidSpecError("locator page is 1-based when present")


@dataclass
class KnowledgeChunk:
    id: str
    doc_id: str
    ordinal: int
    text: str
    locator: SourceLocator
    embedding: EmbeddingVector
    provenance: str = UPLOADED
    priority_boost: float = 0.0

    def validate(self) -> None:
        if not self.text:
            raise InvalidSpecError("chunk text must be non-empty")
        if self.provenance not in PROVENANCES:
            raise InvalidSpecError(f"invalid provenance: {self.provenance!r}")
        if self.priority_boost < 0.0:
            raise InvalidSpecError("priority_boost must be >= 0")
        if self.provenance == UPLOADED and self.priority_boost != 0.0:
            raise InvalidSpecError("uploaded chunks carry no priority boost")


@dataclass
class SourceDocument:
    doc_id: str
    title: str
    text: str


@dataclass
class KnowledgeBase:
    id: str
    name: str
    embedding_dimension: int
    docs: Dict[str, SourceDocument] = field(default_factory=dict)
    chunks: List[KnowledgeChunk] = field(default_factory=list)

    def document(self, doc_id: str) -> SourceDocument:
        doc = self.docs.get(doc_id)
        if doc is None:
            raise NotFoundError(f"no document with id {doc_id}")
        return doc


@dataclass(frozen=True)
class RetrievalResult:
    chunk: KnowledgeChunk
    raw_cosine: float
    effective_score: float


@dataclass(frozen=True)
class AttributedResponse:
    """Answer text plus the provenance trail behind it.

    ``attributions`` are exactly the chunks that made it into the prompt
    context, in rank order; ``retrieval_trace`` is the full ranked result
    list the attributions were drawn from.
    """

    text: str
    attributions: Tuple[SourceLocator, ...]
    retrieval_trace: Tuple[RetrievalResult, ...]


def _paragraph_spans(text: str) -> List[Tuple[int, int]]:
    """Half-open spans of non-empty paragraphs, trimmed of edge whitespace."""
    spans = []
    prev_end = 0
    boundaries = [(m.start(), m.end()) for m in _PARAGRAPH_SEP_RE.finditer(text)]
    boundaries.append((len(text), len(text)))
    for sep_start, sep_end in boundaries:
        start, end = prev_end, sep_start
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append((start, end))
        prev_end = sep_end
    return spans


def _split_long_paragraph(
    text: str, start: int, end: int, max_chars: int, overlap_chars: int
) -> List[Tuple[int, int]]:
    """Sub-chunk spans for one over-long paragraph.

    Each cut lands on the last sentence boundary at or before ``max_chars``
    from the sub-chunk start; a boundary inside the overlap region would
    stall the scan, so those fall back to a hard cut. Consecutive spans
    overlap by ``overlap_chars``.
    """
    spans = []
    pos = start
    while True:
        if end - pos <= max_chars:
            spans.append((pos, end))
            return spans
        window_end = pos + max_chars
        cut = -1
        for mark in _SENTENCE_MARKS:
            found = text.rfind(mark, pos, window_end)
            if found != -1:
                cut = max(cut, found + len(mark))
        newline = text.rfind("\n", pos, window_end)
        if newline != -1:
            cut = max(cut, newline + 1)
        if cut <= pos + overlap_chars:
            cut = window_end
        spans.append((pos, cut))
        pos = cut - overlap_chars


def chunk_document(
    text: str,
    max_chars: int = DEFAULT_MAX_CHARS,
    overlap_chars: int = DEFAULT_OVERLAP_CHARS,
    doc_id: str = "",
    doc_title: str = "",
) -> List[Tuple[str, SourceLocator]]:
    """Split a document into locator-tagged chunks.

    Blank lines bound paragraphs; a paragraph within ``max_chars`` becomes
    one chunk, longer ones are split with sentence-aware cuts and an
    ``overlap_chars`` overlap between consecutive sub-chunks. Concatenating
    the non-overlapped spans of a split paragraph reproduces it exactly.
    """
    if max_chars <= overlap_chars:
        raise InvalidSpecError("max_chars must exceed overlap_chars")
    if overlap_chars < 0:
        raise InvalidSpecError("overlap_chars must be >= 0")
    if not text.strip():
        raise EmptyDocumentError("document has no content")

    has_pages = "\f" in text
    out = []
    for para_start, para_end in _paragraph_spans(text):
        if para_end - para_start <= max_chars:
            spans = [(para_start, para_end)]
        else:
            spans = _split_long_paragraph(text, para_start, para_end, max_chars, overlap_chars)
        for span_start, span_end in spans:
            locator = SourceLocator(
                doc_id=doc_id,
                doc_title=doc_title,
                start_char=span_start,
                end_char=span_end,
                start_line=text.count("\n", 0, span_start) + 1,
                page=text.count("\f", 0, span_start) + 1 if has_pages else None,
            )
            out.append((text[span_start:span_end], locator))
    if not out:
        raise EmptyDocumentError("document has no content")
    return out


def ingest_document(
    kb: KnowledgeBase,
    provider: ChatProvider,
    title: str,
    text: str,
    max_chars: int = DEFAULT_MAX_CHARS,
    overlap_chars: int = DEFAULT_OVERLAP_CHARS,
    max_doc_bytes: int = DEFAULT_MAX_DOC_BYTES,
) -> Tuple[str, int]:
    """Chunk, embed, and store one plain-text document.

    All-or-none: chunks and embeddings are fully built before the knowledge
    base is touched, so a provider fault mid-way leaves it unchanged.
    Returns ``(doc_id, chunk_count)``.
    """
    if len(text.encode("utf-8")) > max_doc_bytes:
        raise DocumentTooLargeError(f"document exceeds {max_doc_bytes} bytes")
    doc_id = uuid.uuid4().hex
    pieces = chunk_document(text, max_chars, overlap_chars, doc_id=doc_id, doc_title=title)
    chunks = []
    for ordinal, (chunk_text, locator) in enumerate(pieces):
        embedding = provider.embed_text(chunk_text)
        if embedding.dimension != kb.embedding_dimension:
            raise InvalidSpecError(
                f"embedding dimension {embedding.dimension} does not match "
                f"knowledge base dimension {kb.embedding_dimension}"
            )
        chunk = KnowledgeChunk(
            id=f"{doc_id}#{ordinal}",
            doc_id=doc_id,
            ordinal=ordinal,
            text=chunk_text,
            locator=locator,
            embedding=embedding,
            provenance=UPLOADED,
            priority_boost=0.0,
        )
        chunk.validate()
        chunks.append(chunk)
    kb.docs[doc_id] = SourceDocument(doc_id=doc_id, title=title, text=text)
    kb.chunks.extend(chunks)
    return doc_id, len(chunks)


def search(
    kb: KnowledgeBase,
    provider: ChatProvider,
    query_text: str,
    k: int,
) -> List[RetrievalResult]:
    """Exact top-k retrieval by effective score (cosine plus boost).

    Ordering is deterministic: descending effective score, ties broken by
    (doc_id, ordinal) ascending. An empty base yields an empty list.
    """
    if k < 1:
        raise InvalidSpecError("k must be at least 1")
    snapshot = list(kb.chunks)
    if not snapshot:
        return []
    query = provider.embed_text(query_text)
    if query.dimension != kb.embedding_dimension:
        raise InvalidSpecError(
            f"query embedding dimension {query.dimension} does not match "
            f"knowledge base dimension {kb.embedding_dimension}"
        )
    scored = []
    for chunk in snapshot:
        raw = cosine(query, chunk.embedding)
        scored.append(RetrievalResult(chunk, raw, raw + chunk.priority_boost))
    scored.sort(key=lambda r: (-r.effective_score, r.chunk.doc_id, r.chunk.ordinal))
    return scored[:k]


def _source_prefix(locator: SourceLocator) -> str:
    if locator.page is not None:
        return f"[SOURCE {locator.doc_title} p.{locator.page} l.{locator.start_line}]"
    return f"[SOURCE {locator.doc_title} l.{locator.start_line}]"


def assemble_context_with_trace(
    results: Sequence[RetrievalResult],
    char_budget: int = DEFAULT_CONTEXT_BUDGET,
) -> Tuple[str, List[RetrievalResult]]:
    """Context block plus the results that actually made it in.

    Chunks are laid out in rank order with source prefixes, stopping before
    the first chunk that would push past the budget. The top result is
    always included, truncated to the budget if it alone exceeds it.
    """
    if char_budget < 1:
        raise InvalidSpecError("char_budget must be at least 1")
    blocks = []
    included = []
    for result in results:
        block = f"{_source_prefix(result.chunk.locator)}\n{result.chunk.text}"
        candidate = blocks + [block]
        if len("\n\n".join(candidate)) > char_budget:
            if not included:
                return block[:char_budget], [result]
            break
        blocks.append(block)
        included.append(result)
    return "\n\n".join(blocks), included


def assemble_context(
    results: Sequence[RetrievalResult],
    char_budget: int = DEFAULT_CONTEXT_BUDGET,
) -> str:
    text, _ = assemble_context_with_trace(results, char_budget)
    return text


def answer(
    agent,
    prior_turns: Sequence[ChatTurn],
    user_query: str,
    kb: KnowledgeBase,
    provider: ChatProvider,
    k: int = DEFAULT_K,
    char_budget: int = DEFAULT_CONTEXT_BUDGET,
    context_instruction: str = CONTEXT_INSTRUCTION,
    params: Optional[GenParams] = None,
    pre_prompt: Optional[Callable[[List[ChatTurn]], List[ChatTurn]]] = None,
    post_response: Optional[Callable[[str], str]] = None,
) -> AttributedResponse:
    """Grounded question answering with source attributions.

    The prompt is the agent's composed definition, the prior turns, one
    system turn carrying the retrieval context, then the user query. The
    optional hook callables let the rule layer rewrite the prompt and the
    raw response; attributions list exactly the chunks placed in context.
    """
    from .agents import SERVICE_AGENT, compose_definition

    if agent.kind != SERVICE_AGENT:
        raise InvalidSpecError("only service agents answer from knowledge")
    if agent.kb_id is None:
        raise NoKnowledgeBaseError(f"agent {agent.id} has no knowledge base attached")
    if not user_query:
        raise InvalidSpecError("user query must be non-empty")

    results = search(kb, provider, user_query, k)
    context, included = assemble_context_with_trace(results, char_budget)
    turns = compose_definition(agent)
    turns.extend(prior_turns)
    turns.append(ChatTurn("system", context_instruction + context))
    turns.append(ChatTurn("user", user_query))
    if pre_prompt is not None:
        turns = pre_prompt(turns)
    text = provider.chat_complete(turns, params)
    if post_response is not None:
        text = post_response(text)
    return AttributedResponse(
        text=text,
        attributions=tuple(r.chunk.locator for r in included),
        retrieval_trace=tuple(results),
    )


class KnowledgeStore:
    """Engine-level collection of knowledge bases."""

    def __init__(self):
        self._kbs: Dict[str, KnowledgeBase] = {}
        self._lock = threading.RLock()

    def create(self, name: str, embedding_dimension: int) -> KnowledgeBase:
        if not name:
            raise InvalidSpecError("knowledge base name must be non-empty")
        if embedding_dimension < 1:
            raise InvalidSpecError("embedding dimension must be at least 1")
        with self._lock:
            kb = KnowledgeBase(id=uuid.uuid4().hex, name=name, embedding_dimension=embedding_dimension)
            self._kbs[kb.id] = kb
        return kb

    def get(self, kb_id: Optional[str]) -> KnowledgeBase:
        if kb_id is None:
            raise NoKnowledgeBaseError("no knowledge base attached")
        with self._lock:
            kb = self._kbs.get(kb_id)
        if kb is None:
            raise NotFoundError(f"no knowledge base with id {kb_id}")
        return kb

    def add(self, kb: KnowledgeBase) -> None:
        with self._lock:
            self._kbs[kb.id] = kb

    def list(self) -> List[KnowledgeBase]:
        with self._lock:
            return list(self._kbs.values())

    def __contains__(self, kb_id: str) -> bool:
        with self._lock:
            return kb_id in self._kbs
