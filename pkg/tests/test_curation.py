"""Editing agent answers and teaching them back to the knowledge base."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coforge.curation import (
    CURATED_DOC_PREFIX,
    DEFAULT_BOOST,
    CuratedExchange,
    edit_response,
    sync_to_knowledge,
)
from coforge.errors import (
    InvalidSpecError,
    NoPrecedingQuestionError,
    NotAnAssistantMessageError,
    NotFoundError,
)
from coforge.knowledge import KnowledgeStore, ingest_document, search
from coforge.providers import MockProvider
from coforge.sessions import CREATOR_AUTHOR, ChatMessage, GroupSession


def session_with(turns):
    transcript = [
        ChatMessage(message_id=f"m{i}", author_id=author, content=content)
        for i, (author, content) in enumerate(turns)
    ]
    return GroupSession(
        id="s1", participants=["agent-1"], turn_policy="manual", transcript=transcript
    )


class TestEditResponse:
    def test_edit_replaces_content_and_keeps_history(self):
        session = session_with(
            [(CREATOR_AUTHOR, "how do I scan?"), ("agent-1", "wrong answer")]
        )
        exchange = edit_response(session, "m1", "Press the green button.")
        message = session.transcript[1]
        assert message.content == "Press the green button."
        assert message.edited is True
        assert message.edit_history == ["wrong answer"]
        assert exchange.question == "how do I scan?"
        assert exchange.corrected_answer == "Press the green button."
        assert exchange.source_session == "s1"
        assert exchange.source_message == "m1"

    def test_repeat_edits_accumulate_history(self):
        session = session_with([(CREATOR_AUTHOR, "q"), ("agent-1", "v1")])
        edit_response(session, "m1", "v2")
        edit_response(session, "m1", "v3")
        message = session.transcript[1]
        assert message.content == "v3"
        assert message.edit_history == ["v1", "v2"]

    def test_transcript_shape_is_preserved(self):
        session = session_with(
            [(CREATOR_AUTHOR, "q1"), ("agent-1", "a1"), (CREATOR_AUTHOR, "q2"), ("agent-1", "a2")]
        )
        edit_response(session, "m1", "fixed")
        assert [m.message_id for m in session.transcript] == ["m0", "m1", "m2", "m3"]
        assert len(session.transcript) == 4

    def test_question_is_nearest_preceding_other_author(self):
        session = session_with(
            [
                (CREATOR_AUTHOR, "old question"),
                ("agent-1", "old answer"),
                (CREATOR_AUTHOR, "new question"),
                ("agent-1", "follow-up part one"),
                ("agent-1", "follow-up part two"),
            ]
        )
        exchange = edit_response(session, "m4", "better")
        assert exchange.question == "new question"

    def test_creator_messages_cannot_be_edited(self):
        session = session_with([(CREATOR_AUTHOR, "q"), ("agent-1", "a")])
        with pytest.raises(NotAnAssistantMessageError):
            edit_response(session, "m0", "nope")

    def test_no_preceding_question_rejected(self):
        session = session_with([("agent-1", "unprompted")])
        with pytest.raises(NoPrecedingQuestionError):
            edit_response(session, "m0", "fixed")

    def test_unknown_message_rejected(self):
        session = session_with([(CREATOR_AUTHOR, "q"), ("agent-1", "a")])
        with pytest.raises(NotFoundError):
            edit_response(session, "missing", "text")

    def test_empty_correction_rejected(self):
        session = session_with([(CREATOR_AUTHOR, "q"), ("agent-1", "a")])
        with pytest.raises(InvalidSpecError):
            edit_response(session, "m1", "")


class TestCuratedExchange:
    def test_validation(self):
        with pytest.raises(InvalidSpecError):
            CuratedExchange(question="", corrected_answer="a", source_session="s", source_message="m")
        with pytest.raises(InvalidSpecError):
            CuratedExchange(question="q", corrected_answer="", source_session="s", source_message="m")


def make_exchange(question="how do I scan?", answer="Press the green button."):
    return CuratedExchange(
        question=question,
        corrected_answer=answer,
        source_session="sess-9",
        source_message="msg-3",
    )


class TestSyncToKnowledge:
    def test_chunk_shape(self):
        kb = KnowledgeStore().create("Base", 64)
        mock = MockProvider()
        chunk = sync_to_knowledge(kb, make_exchange(), mock)
        assert chunk.text == "Q: how do I scan?\nA: Press the green button."
        assert chunk.provenance == "curated"
        assert chunk.priority_boost == DEFAULT_BOOST
        assert chunk.ordinal == 0
        assert chunk.id == f"{chunk.doc_id}#0"
        assert chunk.locator.doc_title == f"{CURATED_DOC_PREFIX}sess-9"
        assert kb.docs[chunk.doc_id].text == chunk.text
        assert chunk.locator.start_char == 0
        assert chunk.locator.end_char == len(chunk.text)

    def test_embedding_comes_from_question_alone(self):
        kb = KnowledgeStore().create("Base", 64)
        mock = MockProvider()
        chunk = sync_to_knowledge(kb, make_exchange(), mock)
        assert chunk.embedding.components == mock.embed_text("how do I scan?").components

    def test_question_query_outranks_uploaded_chunks(self):
        kb, mock = KnowledgeStore().create("Base", 64), MockProvider()
        ingest_document(
            kb, mock, "Guide", "how do I scan a book\n\nthe scanner room opens at nine"
        )
        sync_to_knowledge(kb, make_exchange(question="how do I scan a book"), mock)
        results = search(kb, mock, "how do I scan a book", 3)
        assert results[0].chunk.provenance == "curated"
        assert results[0].raw_cosine == 1.0
        assert results[0].effective_score == pytest.approx(1.0 + DEFAULT_BOOST)

    def test_no_dedup_on_repeat_sync(self):
        kb, mock = KnowledgeStore().create("Base", 64), MockProvider()
        sync_to_knowledge(kb, make_exchange(), mock)
        sync_to_knowledge(kb, make_exchange(), mock)
        assert len(kb.chunks) == 2
        assert len({c.doc_id for c in kb.chunks}) == 2

    def test_zero_boost_allowed_negative_rejected(self):
        kb, mock = KnowledgeStore().create("Base", 64), MockProvider()
        chunk = sync_to_knowledge(kb, make_exchange(), mock, boost=0.0)
        assert chunk.priority_boost == 0.0
        with pytest.raises(InvalidSpecError):
            sync_to_knowledge(kb, make_exchange(), mock, boost=-0.1)

    @given(
        st.text(alphabet="abcdefghijklmnopqrstuvwxyz ", min_size=1, max_size=40).filter(
            str.strip
        ),
        st.text(min_size=1, max_size=40).filter(str.strip),
    )
    @settings(max_examples=50)
    def test_edit_then_sync_round_trip(self, question, answer):
        kb, mock = KnowledgeStore().create("Base", 64), MockProvider()
        session = session_with([(CREATOR_AUTHOR, question), ("agent-1", "draft")])
        exchange = edit_response(session, "m1", answer)
        chunk = sync_to_knowledge(kb, exchange, mock)
        assert chunk.text == f"Q: {question}\nA: {answer}"
        results = search(kb, mock, question, 1)
        assert results[0].chunk.id == chunk.id
