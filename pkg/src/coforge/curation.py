"""The edit-and-teach loop.

Creators correct an agent's answer in place, then push the corrected
question/answer pair back into the knowledge base as a curated chunk with
a score boost. Questions carry the retrieval signal, so the curated chunk
is embedded from the question text while storing the full Q/A pair.
"""
from __future__ import annotations

import time
import uuid
from dataclasses import dataclass
from typing import Optional

from .errors import (
    InvalidSpecError,
    NoPrecedingQuestionError,
    NotAnAssistantMessageError,
)
from .knowledge import CURATED, KnowledgeBase, KnowledgeChunk, SourceDocument, SourceLocator
from .providers import ChatProvider
from .sessions import CREATOR_AUTHOR, ChatMessage, GroupSession

DEFAULT_BOOST = 0.05
CURATED_DOC_PREFIX = "curated:"


@dataclass(frozen=True)
class CuratedExchange:
    """A corrected question/answer pair ready to teach back."""

    question: str
    corrected_answer: str
    source_session: str
    source_message: str
    editor_note: Optional[str] = None
    created_at: float = 0.0

    def __post_init__(self):
        if not self.question:
            raise InvalidSpecError("curated exchange needs a non-empty question")
        if not self.corrected_answer:
            raise InvalidSpecError("curated exchange needs a non-empty corrected answer")


def edit_response(
    session: GroupSession,
    message_id: str,
    corrected_text: str,
    note: Optional[str] = None,
) -> CuratedExchange:
    """Replace an agent answer in place and derive the curated exchange.

    The previous text lands in the message's edit history (repeat edits
    accumulate; the live content is always the newest). The paired question
    is the nearest preceding message by a different author. Transcript
    length and ordering never change.
    """
    if not corrected_text:
        raise InvalidSpecError("corrected text must be non-empty")
    index, message = session.find_message(message_id)
    if message.author_id == CREATOR_AUTHOR:
        raise NotAnAssistantMessageError("only agent messages can be edited into knowledge")
    question: Optional[ChatMessage] = None
    for earlier in reversed(session.transcript[:index]):
        if earlier.author_id != message.author_id:
            question = earlier
            break
    if question is None:
        raise NoPrecedingQuestionError(f"message {message_id} has no preceding question")
    message.edit_history.append(message.content)
    message.content = corrected_text
    message.edited = True
    return CuratedExchange(
        question=question.content,
        corrected_answer=corrected_text,
        source_session=session.id,
        source_message=message_id,
        editor_note=note,
        created_at=time.time(),
    )


def sync_to_knowledge(
    kb: KnowledgeBase,
    exchange: CuratedExchange,
    provider: ChatProvider,
    boost: float = DEFAULT_BOOST,
) -> KnowledgeChunk:
    """Store a curated exchange as a boosted knowledge chunk.

    The chunk text is the full ``Q:``/``A:`` pair backed by a synthetic
    one-chunk document, while the embedding is computed from the question
    alone so question-shaped queries match it at cosine 1.0. No
    deduplication: syncing twice stores two chunks.
    """
    if boost < 0.0:
        raise InvalidSpecError("boost must be >= 0")
    text = f"Q: {exchange.question}\nA: {exchange.corrected_answer}"
    embedding = provider.embed_text(exchange.question)
    if embedding.dimension != kb.embedding_dimension:
        raise InvalidSpecError(
            f"embedding dimension {embedding.dimension} does not match "
            f"knowledge base dimension {kb.embedding_dimension}"
        )
    doc_id = uuid.uuid4().hex
    title = f"{CURATED_DOC_PREFIX}{exchange.source_session}"
    kb.docs[doc_id] = SourceDocument(doc_id=doc_id, title=title, text=text)
    chunk = KnowledgeChunk(
        id=f"{doc_id}#0",
        doc_id=doc_id,
        ordinal=0,
        text=text,
        locator=SourceLocator(
            doc_id=doc_id,
            doc_title=title,
            start_char=0,
            end_char=len(text),
            start_line=1,
            page=None,
        ),
        embedding=embedding,
        provenance=CURATED,
        priority_boost=boost,
    )
    chunk.validate()
    kb.chunks.append(chunk)
    return chunk
