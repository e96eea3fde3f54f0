"""Multi-agent chat sessions.

The core trick is the history mapping: each responder sees the shared
transcript as a two-role conversation in which its own messages are
assistant turns and everyone else's are user turns prefixed with the
author's display name. Mapping keeps a single model attentive to its own
persona even in a many-party chat.
"""
from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .agents import AgentSpec, SERVICE_AGENT, compose_definition
from .errors import (
    InvalidSpecError,
    NotAParticipantError,
    NotFoundError,
    SessionNotOpenError,
    TooFewParticipantsError,
)
from .knowledge import (
    CONTEXT_INSTRUCTION,
    DEFAULT_CONTEXT_BUDGET,
    DEFAULT_K,
    KnowledgeStore,
    RetrievalResult,
    SourceLocator,
    assemble_context_with_trace,
    search,
)
from .providers import ChatProvider, ChatTurn, GenParams

ROUND_ROBIN = "round_robin"
MANUAL = "manual"
TURN_POLICIES = (ROUND_ROBIN, MANUAL)

OPEN = "open"
COMPLETED = "completed"
STOPPED = "stopped"
SESSION_STATUSES = (OPEN, COMPLETED, STOPPED)

CREATOR_AUTHOR = "creator"
CONTINUE_PROMPT = "(continue)"
STOP_SENTINEL = "[DONE]"

QUERY_LAST_OTHER = "last_other"
QUERY_FULL_TRANSCRIPT = "full_transcript"


@dataclass
class ChatMessage:
    message_id: str
    author_id: str
    content: str
    attributions: List[SourceLocator] = field(default_factory=list)
    edited: bool = False
    edit_history: List[str] = field(default_factory=list)
    created_at: float = field(default_factory=time.time)

    def validate(self) -> None:
        if not self.content:
            raise InvalidSpecError("message content must be non-empty")


@dataclass
class GroupSession:
    id: str
    participants: List[str]
    turn_policy: str = ROUND_ROBIN
    max_turns: int = 10
    status: str = OPEN
    transcript: List[ChatMessage] = field(default_factory=list)
    inactive_participants: List[str] = field(default_factory=list)

    def agent_message_count(self) -> int:
        return sum(1 for m in self.transcript if m.author_id != CREATOR_AUTHOR)

    def find_message(self, message_id: str) -> Tuple[int, ChatMessage]:
        for index, message in enumerate(self.transcript):
            if message.message_id == message_id:
                return index, message
        raise NotFoundError(f"no message with id {message_id}")


def create_session(
    participants: Sequence[str],
    agents_lookup: Callable[[str], AgentSpec],
    turn_policy: str = ROUND_ROBIN,
    max_turns: int = 10,
) -> GroupSession:
    """Open a session.

    Round-robin sessions need at least two agents. Manual sessions are
    creator-driven chat, where the creator is the implicit second party, so
    a single agent is enough.
    """
    if turn_policy not in TURN_POLICIES:
        raise InvalidSpecError(f"invalid turn policy: {turn_policy!r}")
    if max_turns < 1:
        raise InvalidSpecError("max_turns must be at least 1")
    minimum = 2 if turn_policy == ROUND_ROBIN else 1
    if len(participants) < minimum:
        raise TooFewParticipantsError(
            f"{turn_policy} sessions need at least {minimum} participant(s)"
        )
    for agent_id in participants:
        agents_lookup(agent_id)
    return GroupSession(
        id=uuid.uuid4().hex,
        participants=list(participants),
        turn_policy=turn_policy,
        max_turns=max_turns,
    )


def _merge_adjacent(turns: List[ChatTurn]) -> List[ChatTurn]:
    """Join consecutive same-role user/assistant turns with a newline.

    System turns are never merged; they bound the prompt sections.
    """
    merged: List[ChatTurn] = []
    for turn in turns:
        if (
            turn.role != "system"
            and merged
            and merged[-1].role == turn.role
        ):
            merged[-1] = ChatTurn(turn.role, merged[-1].content + "\n" + turn.content)
        else:
            merged.append(turn)
    return merged


def map_history(
    session: GroupSession,
    responder_id: str,
    agents_lookup: Callable[[str], AgentSpec],
    kbs: Optional[KnowledgeStore] = None,
    provider: Optional[ChatProvider] = None,
    k: int = DEFAULT_K,
    char_budget: int = DEFAULT_CONTEXT_BUDGET,
    context_instruction: str = CONTEXT_INSTRUCTION,
    query_mode: str = QUERY_LAST_OTHER,
    mapped: bool = True,
) -> List[ChatTurn]:
    """Build the prompt one responder sees for the shared transcript.

    ``mapped=False`` is the naive baseline kept for test comparisons only:
    every message, the responder's own included, is presented as a
    name-prefixed user turn.
    """
    turns, _ = map_history_with_trace(
        session,
        responder_id,
        agents_lookup,
        kbs=kbs,
        provider=provider,
        k=k,
        char_budget=char_budget,
        context_instruction=context_instruction,
        query_mode=query_mode,
        mapped=mapped,
    )
    return turns


def map_history_with_trace(
    session: GroupSession,
    responder_id: str,
    agents_lookup: Callable[[str], AgentSpec],
    kbs: Optional[KnowledgeStore] = None,
    provider: Optional[ChatProvider] = None,
    k: int = DEFAULT_K,
    char_budget: int = DEFAULT_CONTEXT_BUDGET,
    context_instruction: str = CONTEXT_INSTRUCTION,
    query_mode: str = QUERY_LAST_OTHER,
    mapped: bool = True,
) -> Tuple[List[ChatTurn], List[RetrievalResult]]:
    """:func:`map_history` plus the retrieval results used for context."""
    if responder_id not in session.participants:
        raise NotAParticipantError(f"{responder_id} is not in session {session.id}")
    responder = agents_lookup(responder_id)
    turns = compose_definition(responder)

    def display_name(author_id: str) -> str:
        if author_id == CREATOR_AUTHOR:
            return CREATOR_AUTHOR
        try:
            return agents_lookup(author_id).name
        except NotFoundError:
            return author_id

    included: List[RetrievalResult] = []
    if (
        responder.kind == SERVICE_AGENT
        and responder.kb_id is not None
        and kbs is not None
        and provider is not None
    ):
        if query_mode == QUERY_FULL_TRANSCRIPT:
            query = "\n".join(m.content for m in session.transcript) or None
        else:
            query = None
            for message in reversed(session.transcript):
                if message.author_id != responder_id:
                    query = message.content
                    break
        if query is not None:
            kb = kbs.get(responder.kb_id)
            results = search(kb, provider, query, k)
            context, included = assemble_context_with_trace(results, char_budget)
            turns.append(ChatTurn("system", context_instruction + context))

    for message in session.transcript:
        if mapped and message.author_id == responder_id:
            turns.append(ChatTurn("assistant", message.content))
        else:
            prefix = display_name(message.author_id)
            turns.append(ChatTurn("user", f"{prefix}: {message.content}"))

    turns = _merge_adjacent(turns)
    if turns and turns[-1].role == "assistant":
        turns.append(ChatTurn("user", CONTINUE_PROMPT))
    return turns, included


# a turn generator produces (content, attributions) for one responder turn
TurnGenerator = Callable[[GroupSession, AgentSpec], Tuple[str, List[SourceLocator]]]


class SessionRunner:
    """Drives sessions against a provider.

    Per-agent turn generators let persona strategies that need multiple
    model calls (the chained strategy) plug into the same session flow.
    """

    def __init__(
        self,
        provider: ChatProvider,
        agents_lookup: Callable[[str], AgentSpec],
        kbs: KnowledgeStore,
        turn_generators: Optional[Dict[str, TurnGenerator]] = None,
        params: Optional[GenParams] = None,
        k: int = DEFAULT_K,
        char_budget: int = DEFAULT_CONTEXT_BUDGET,
        context_instruction: str = CONTEXT_INSTRUCTION,
        query_mode: str = QUERY_LAST_OTHER,
    ):
        self.provider = provider
        self.agents_lookup = agents_lookup
        self.kbs = kbs
        self.turn_generators = turn_generators or {}
        self.params = params
        self.k = k
        self.char_budget = char_budget
        self.context_instruction = context_instruction
        self.query_mode = query_mode
        self._locks: Dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def _default_generator(
        self, session: GroupSession, responder: AgentSpec
    ) -> Tuple[str, List[SourceLocator]]:
        turns, included = map_history_with_trace(
            session,
            responder.id,
            self.agents_lookup,
            kbs=self.kbs,
            provider=self.provider,
            k=self.k,
            char_budget=self.char_budget,
            context_instruction=self.context_instruction,
            query_mode=self.query_mode,
        )
        content = self.provider.chat_complete(turns, self.params)
        attributions = [r.chunk.locator for r in included]
        return content, attributions

    def next_turn(self, session: GroupSession) -> ChatMessage:
        """Advance a round-robin session by one agent turn.

        The provider is called before the transcript is touched, so a
        provider fault leaves the session unchanged and still open.
        """
        with self._lock_for(session.id):
            if session.status != OPEN:
                raise SessionNotOpenError(f"session {session.id} is {session.status}")
            if session.turn_policy != ROUND_ROBIN:
                raise InvalidSpecError("next_turn requires a round_robin session")
            speaker_id = session.participants[
                session.agent_message_count() % len(session.participants)
            ]
            speaker = self.agents_lookup(speaker_id)
            generator = self.turn_generators.get(speaker_id)
            if generator is not None:
                content, attributions = generator(session, speaker)
            else:
                content, attributions = self._default_generator(session, speaker)
            if speaker.kind != SERVICE_AGENT:
                attributions = []
            message = ChatMessage(
                message_id=uuid.uuid4().hex,
                author_id=speaker_id,
                content=content,
                attributions=list(attributions),
            )
            message.validate()
            session.transcript.append(message)
            if session.agent_message_count() >= session.max_turns:
                session.status = COMPLETED
            return message

    def run_simulation(self, session: GroupSession) -> List[ChatMessage]:
        """Run until the turn budget completes the session or a speaker
        emits the stop sentinel, which stops it early."""
        while session.status == OPEN:
            message = self.next_turn(session)
            if message.content.strip() == STOP_SENTINEL:
                session.status = STOPPED
        return list(session.transcript)


def export_records(
    session: GroupSession,
    agents_lookup: Callable[[str], AgentSpec],
) -> List[dict]:
    """Transcript as plain records, one per message, for export and audit."""
    records = []
    for message in session.transcript:
        if message.author_id == CREATOR_AUTHOR:
            kind = CREATOR_AUTHOR
        else:
            try:
                kind = agents_lookup(message.author_id).kind
            except NotFoundError:
                kind = "agent"
        records.append(
            {
                "message_id": message.message_id,
                "session_id": session.id,
                "author_id": message.author_id,
                "author_kind": kind,
                "content": message.content,
                "attributions": [
                    {
                        "doc_id": loc.doc_id,
                        "doc_title": loc.doc_title,
                        "start_char": loc.start_char,
                        "end_char": loc.end_char,
                        "start_line": loc.start_line,
                        "page": loc.page,
                    }
                    for loc in message.attributions
                ],
                "edited": message.edited,
                "created_at": message.created_at,
            }
        )
    return records


def export_jsonl(session: GroupSession, agents_lookup: Callable[[str], AgentSpec]) -> str:
    lines = [json.dumps(record, ensure_ascii=False) for record in export_records(session, agents_lookup)]
    return "\n".join(lines) + ("\n" if lines else "")


class SessionStore:
    """Engine-level session collection."""

    def __init__(self):
        self._sessions: Dict[str, GroupSession] = {}
        self._lock = threading.RLock()

    def add(self, session: GroupSession) -> GroupSession:
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> GroupSession:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"no session with id {session_id}")
        return session

    def list(self) -> List[GroupSession]:
        with self._lock:
            return list(self._sessions.values())

    def find_by_message(self, message_id: str) -> Tuple[GroupSession, ChatMessage]:
        with self._lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            for message in session.transcript:
                if message.message_id == message_id:
                    return session, message
        raise NotFoundError(f"no message with id {message_id}")

    def mark_inactive(self, agent_id: str) -> None:
        """Detach a deleted agent: transcripts stay, membership goes inactive."""
        with self._lock:
            for session in self._sessions.values():
                if agent_id in session.participants and agent_id not in session.inactive_participants:
                    session.inactive_participants.append(agent_id)
