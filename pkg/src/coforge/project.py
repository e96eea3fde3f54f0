"""Single-file project persistence.

The whole project (agents, knowledge bases, sessions, rule state,
personas, audit configs) serializes to one JSON document. Saves are
atomic: write to a temp file in the same directory, fsync, rename. Loads
validate the version tag and referential integrity before returning, so a
process killed between two saves can never leave a readable-but-broken
project behind.
"""
from __future__ import annotations

import json
import os
import tempfile
from typing import Optional

from .agents import AgentSpec
from .audit import AuditCheckConfig
from .engine import Engine, EngineConfig
from .errors import IntegrityError, ProjectIOError, VersionMismatchError
from .knowledge import (
    KnowledgeBase,
    KnowledgeChunk,
    SourceDocument,
    SourceLocator,
)
from .personas import PersonaSpec
from .providers import ChatProvider, EmbeddingVector
from .sessions import CREATOR_AUTHOR, ChatMessage, GroupSession

PROJECT_VERSION = "coforge/1"


def _locator_to_dict(locator: SourceLocator) -> dict:
    return {
        "doc_id": locator.doc_id,
        "doc_title": locator.doc_title,
        "start_char": locator.start_char,
        "end_char": locator.end_char,
        "start_line": locator.start_line,
        "page": locator.page,
    }


def _locator_from_dict(data: dict) -> SourceLocator:
    return SourceLocator(
        doc_id=data["doc_id"],
        doc_title=data["doc_title"],
        start_char=data["start_char"],
        end_char=data["end_char"],
        start_line=data["start_line"],
        page=data.get("page"),
    )


def agent_to_dict(agent: AgentSpec) -> dict:
    return {
        "id": agent.id,
        "name": agent.name,
        "kind": agent.kind,
        "definition": agent.definition,
        "exemplars": [[u, a] for u, a in agent.exemplars],
        "cooklist": dict(agent.cooklist),
        "kb_id": agent.kb_id,
        "enabled_rules": list(agent.enabled_rules),
    }


def _agent_from_dict(data: dict) -> AgentSpec:
    agent = AgentSpec(
        name=data["name"],
        definition=data["definition"],
        kind=data["kind"],
        exemplars=[(u, a) for u, a in data["exemplars"]],
        cooklist=dict(data["cooklist"]),
        kb_id=data.get("kb_id"),
        enabled_rules=list(data["enabled_rules"]),
        id=data["id"],
    )
    agent.validate()
    return agent


def _kb_to_dict(kb: KnowledgeBase) -> dict:
    return {
        "id": kb.id,
        "name": kb.name,
        "embedding_dimension": kb.embedding_dimension,
        "docs": [
            {"doc_id": d.doc_id, "title": d.title, "text": d.text} for d in kb.docs.values()
        ],
        "chunks": [
            {
                "id": c.id,
                "doc_id": c.doc_id,
                "ordinal": c.ordinal,
                "text": c.text,
                "locator": _locator_to_dict(c.locator),
                "embedding": list(c.embedding.components),
                "provenance": c.provenance,
                "priority_boost": c.priority_boost,
            }
            for c in kb.chunks
        ],
    }


def _kb_from_dict(data: dict) -> KnowledgeBase:
    kb = KnowledgeBase(
        id=data["id"],
        name=data["name"],
        embedding_dimension=data["embedding_dimension"],
    )
    for doc in data["docs"]:
        kb.docs[doc["doc_id"]] = SourceDocument(doc["doc_id"], doc["title"], doc["text"])
    for raw in data["chunks"]:
        chunk = KnowledgeChunk(
            id=raw["id"],
            doc_id=raw["doc_id"],
            ordinal=raw["ordinal"],
            text=raw["text"],
            locator=_locator_from_dict(raw["locator"]),
            embedding=EmbeddingVector(tuple(float(x) for x in raw["embedding"])),
            provenance=raw["provenance"],
            priority_boost=raw["priority_boost"],
        )
        chunk.validate()
        kb.chunks.append(chunk)
    return kb


def message_to_dict(message: ChatMessage) -> dict:
    return {
        "message_id": message.message_id,
        "author_id": message.author_id,
        "content": message.content,
        "attributions": [_locator_to_dict(loc) for loc in message.attributions],
        "edited": message.edited,
        "edit_history": list(message.edit_history),
        "created_at": message.created_at,
    }


def _message_from_dict(data: dict) -> ChatMessage:
    message = ChatMessage(
        message_id=data["message_id"],
        author_id=data["author_id"],
        content=data["content"],
        attributions=[_locator_from_dict(loc) for loc in data["attributions"]],
        edited=data["edited"],
        edit_history=list(data["edit_history"]),
        created_at=data["created_at"],
    )
    message.validate()
    return message


def session_to_dict(session: GroupSession) -> dict:
    return {
        "id": session.id,
        "participants": list(session.participants),
        "inactive_participants": list(session.inactive_participants),
        "turn_policy": session.turn_policy,
        "max_turns": session.max_turns,
        "status": session.status,
        "transcript": [message_to_dict(m) for m in session.transcript],
    }


def _session_from_dict(data: dict) -> GroupSession:
    return GroupSession(
        id=data["id"],
        participants=list(data["participants"]),
        inactive_participants=list(data["inactive_participants"]),
        turn_policy=data["turn_policy"],
        max_turns=data["max_turns"],
        status=data["status"],
        transcript=[_message_from_dict(m) for m in data["transcript"]],
    )


def persona_to_dict(persona: PersonaSpec) -> dict:
    return {
        "name": persona.name,
        "profile": persona.profile,
        "tendency_clause": persona.tendency_clause,
        "strategy": persona.strategy,
    }


def audit_config_to_dict(config: AuditCheckConfig) -> dict:
    return {
        "check_id": config.check_id,
        "enabled": config.enabled,
        "parameters": config.parameters,
    }


def project_to_dict(engine: Engine) -> dict:
    return {
        "version": PROJECT_VERSION,
        "config": {
            "chunk_max_chars": engine.config.chunk_max_chars,
            "chunk_overlap_chars": engine.config.chunk_overlap_chars,
            "context_budget": engine.config.context_budget,
            "answer_k": engine.config.answer_k,
            "context_instruction": engine.config.context_instruction,
            "max_doc_bytes": engine.config.max_doc_bytes,
            "curation_boost": engine.config.curation_boost,
            "group_query_mode": engine.config.group_query_mode,
            "temperature": engine.config.temperature,
            "max_output_tokens": engine.config.max_output_tokens,
        },
        "agents": [agent_to_dict(a) for a in engine.agents.list()],
        "knowledge_bases": [_kb_to_dict(kb) for kb in engine.kbs.list()],
        "sessions": [session_to_dict(s) for s in engine.sessions.list()],
        "personas": [persona_to_dict(p) for p in engine.personas.values()],
        "persona_bindings": dict(engine.persona_bindings),
        "rule_states": [
            {"session_id": s, "rule_id": r, "payload": p}
            for s, r, p in engine.rule_states.items()
        ],
        "audit_configs": [audit_config_to_dict(c) for c in engine.audit_configs.values()],
    }


def validate_integrity(engine: Engine) -> None:
    """Every reference must point at something that exists.

    Deleted agents may linger in a session's participant list only while
    that session marks them inactive.
    """
    agent_ids = {a.id for a in engine.agents.list()}
    kb_ids = {kb.id for kb in engine.kbs.list()}
    session_ids = {s.id for s in engine.sessions.list()}
    for agent in engine.agents.list():
        if agent.kb_id is not None and agent.kb_id not in kb_ids:
            raise IntegrityError(
                f"agent {agent.id} references missing knowledge base {agent.kb_id}"
            )
        for rule_id in agent.enabled_rules:
            if rule_id not in engine.rules:
                raise IntegrityError(f"agent {agent.id} enables unknown rule {rule_id}")
    for session in engine.sessions.list():
        for participant in session.participants:
            if participant not in agent_ids and participant not in session.inactive_participants:
                raise IntegrityError(
                    f"session {session.id} references missing agent {participant}"
                )
        for message in session.transcript:
            if message.author_id != CREATOR_AUTHOR and message.author_id not in session.participants:
                raise IntegrityError(
                    f"message {message.message_id} authored by non-participant {message.author_id}"
                )
    for session_id, rule_id, _ in engine.rule_states.items():
        if session_id not in session_ids:
            raise IntegrityError(f"rule state references missing session {session_id}")
        if rule_id not in engine.rules:
            raise IntegrityError(f"rule state references unknown rule {rule_id}")
    for agent_id, persona_name in engine.persona_bindings.items():
        if agent_id not in agent_ids:
            raise IntegrityError(f"persona binding references missing agent {agent_id}")
        if persona_name not in engine.personas:
            raise IntegrityError(f"persona binding references unknown persona {persona_name!r}")


def save_project(engine: Engine, path: str) -> None:
    data = project_to_dict(engine)
    payload = json.dumps(data, ensure_ascii=False, indent=1)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, temp_path = tempfile.mkstemp(prefix=".coforge-", suffix=".tmp", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(temp_path, path)
        except BaseException:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
            raise
    except OSError as exc:
        raise ProjectIOError(f"could not write project file: {exc}") from exc


def load_project(
    path: str,
    provider: Optional[ChatProvider] = None,
    config_override: Optional[EngineConfig] = None,
) -> Engine:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ProjectIOError(f"could not read project file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProjectIOError(f"project file is not valid JSON: {exc}") from exc
    return engine_from_dict(data, provider=provider, config_override=config_override, path=path)


def engine_from_dict(
    data: dict,
    provider: Optional[ChatProvider] = None,
    config_override: Optional[EngineConfig] = None,
    path: Optional[str] = None,
) -> Engine:
    version = data.get("version")
    if version != PROJECT_VERSION:
        raise VersionMismatchError(
            f"project version {version!r} is not supported (expected {PROJECT_VERSION!r})"
        )
    try:
        config = config_override if config_override is not None else EngineConfig(**data["config"])
        engine = Engine(provider=provider, config=config, seed_personas=False)
        for raw in data["agents"]:
            engine.agents.restore(_agent_from_dict(raw))
        for raw in data["knowledge_bases"]:
            engine.kbs.add(_kb_from_dict(raw))
        for raw in data["sessions"]:
            engine.sessions.add(_session_from_dict(raw))
        for raw in data["personas"]:
            engine.personas[raw["name"]] = PersonaSpec(
                name=raw["name"],
                profile=raw["profile"],
                tendency_clause=raw["tendency_clause"],
                strategy=raw["strategy"],
            )
        engine.persona_bindings = dict(data.get("persona_bindings", {}))
        engine.rule_states.load(
            (entry["session_id"], entry["rule_id"], entry["payload"])
            for entry in data["rule_states"]
        )
        engine.audit_configs = {
            raw["check_id"]: AuditCheckConfig(
                check_id=raw["check_id"],
                enabled=raw["enabled"],
                parameters=raw["parameters"],
            )
            for raw in data["audit_configs"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ProjectIOError(f"project file is structurally invalid: {exc}") from exc
    validate_integrity(engine)
    engine.project_path = path
    return engine
