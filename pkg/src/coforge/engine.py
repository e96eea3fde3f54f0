"""The engine: one object owning all state and every operation.

The HTTP API and the CLI are both thin wrappers over the methods here, so
there is exactly one mutation path regardless of the front door used.
"""
from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import curation, knowledge, personas, rules, sessions
from .agents import AgentRegistry, AgentSpec, SERVICE_AGENT, compose_definition
from .audit import AuditCheckConfig, AuditFinding, audit_transcript, default_audit_configs
from .errors import (
    InvalidSpecError,
    NoPrecedingQuestionError,
    NotAnAssistantMessageError,
    NotFoundError,
    SessionNotOpenError,
)
from .knowledge import AttributedResponse, KnowledgeBase, KnowledgeStore, RetrievalResult
from .personas import PersonaSpec, StrategyReport
from .providers import ChatProvider, ChatTurn, GenParams, MockProvider
from .rules import RuleContext, RuleRegistry, RuleStateStore, default_rule_registry
from .sessions import (
    CREATOR_AUTHOR,
    MANUAL,
    OPEN,
    ROUND_ROBIN,
    STOPPED,
    ChatMessage,
    GroupSession,
    SessionRunner,
    SessionStore,
)


@dataclass
class EngineConfig:
    """Tunables that persist with the project."""

    chunk_max_chars: int = knowledge.DEFAULT_MAX_CHARS
    chunk_overlap_chars: int = knowledge.DEFAULT_OVERLAP_CHARS
    context_budget: int = knowledge.DEFAULT_CONTEXT_BUDGET
    answer_k: int = knowledge.DEFAULT_K
    context_instruction: str = knowledge.CONTEXT_INSTRUCTION
    max_doc_bytes: int = knowledge.DEFAULT_MAX_DOC_BYTES
    curation_boost: float = curation.DEFAULT_BOOST
    group_query_mode: str = sessions.QUERY_LAST_OTHER
    temperature: float = 0.7
    max_output_tokens: int = 512

    def gen_params(self) -> GenParams:
        return GenParams(
            temperature=self.temperature,
            max_output_tokens=self.max_output_tokens,
        )


class Engine:
    """All project state plus the operations exposed over HTTP and CLI."""

    def __init__(
        self,
        provider: Optional[ChatProvider] = None,
        config: Optional[EngineConfig] = None,
        rule_registry: Optional[RuleRegistry] = None,
        seed_personas: bool = True,
    ):
        self.provider: ChatProvider = provider if provider is not None else MockProvider()
        self.config = config if config is not None else EngineConfig()
        self.agents = AgentRegistry()
        self.kbs = KnowledgeStore()
        self.sessions = SessionStore()
        self.rules = rule_registry if rule_registry is not None else default_rule_registry()
        self.rule_states = RuleStateStore()
        self.personas: Dict[str, PersonaSpec] = {}
        self.persona_bindings: Dict[str, str] = {}  # persona agent id -> persona name
        self.audit_configs: Dict[str, AuditCheckConfig] = default_audit_configs()
        self.project_path: Optional[str] = None
        self._save_lock = threading.Lock()
        if seed_personas:
            for persona in personas.PERSONA_FIXTURES:
                self.personas[persona.name] = persona

    # ----- agents ---------------------------------------------------------

    def create_agent(self, **fields) -> AgentSpec:
        return self.agents.create(AgentSpec(**fields))

    def get_agent(self, agent_id: str) -> AgentSpec:
        return self.agents.get(agent_id)

    def list_agents(self) -> List[AgentSpec]:
        return self.agents.list()

    def update_agent(self, agent_id: str, **patch) -> AgentSpec:
        return self.agents.update(agent_id, **patch)

    def delete_agent(self, agent_id: str) -> None:
        """Remove the agent; sessions keep their transcripts and mark the
        participant inactive."""
        self.agents.delete(agent_id)
        self.sessions.mark_inactive(agent_id)
        self.persona_bindings.pop(agent_id, None)

    def enable_rule(self, agent_id: str, rule_id: str) -> AgentSpec:
        return rules.enable_rule(self.agents.get(agent_id), rule_id, self.rules)

    def disable_rule(self, agent_id: str, rule_id: str) -> AgentSpec:
        return rules.disable_rule(self.agents.get(agent_id), rule_id, self.rules)

    def list_rules(self):
        return self.rules.descriptors()

    # ----- knowledge ------------------------------------------------------

    def create_kb(self, name: str) -> KnowledgeBase:
        return self.kbs.create(name, self.provider.dimension)

    def get_kb(self, kb_id: str) -> KnowledgeBase:
        return self.kbs.get(kb_id)

    def ingest_document(self, kb_id: str, title: str, text: str) -> Tuple[str, int]:
        kb = self.kbs.get(kb_id)
        return knowledge.ingest_document(
            kb,
            self.provider,
            title,
            text,
            max_chars=self.config.chunk_max_chars,
            overlap_chars=self.config.chunk_overlap_chars,
            max_doc_bytes=self.config.max_doc_bytes,
        )

    def search_kb(self, kb_id: str, query: str, k: Optional[int] = None) -> List[RetrievalResult]:
        kb = self.kbs.get(kb_id)
        return knowledge.search(kb, self.provider, query, k if k is not None else self.config.answer_k)

    # ----- sessions -------------------------------------------------------

    def _runner(
        self,
        provider: Optional[ChatProvider] = None,
        extra_generators: Optional[Dict[str, sessions.TurnGenerator]] = None,
    ) -> SessionRunner:
        active = provider if provider is not None else self.provider
        generators: Dict[str, sessions.TurnGenerator] = {}
        for agent_id, persona_name in self.persona_bindings.items():
            persona = self.personas.get(persona_name)
            if persona is not None and persona.strategy == personas.CHAINED:
                generators[agent_id] = personas.make_chained_generator(
                    persona, active, self.agents.get
                )
        if extra_generators:
            generators.update(extra_generators)
        return SessionRunner(
            provider=active,
            agents_lookup=self.agents.get,
            kbs=self.kbs,
            turn_generators=generators,
            params=self.config.gen_params(),
            k=self.config.answer_k,
            char_budget=self.config.context_budget,
            context_instruction=self.config.context_instruction,
            query_mode=self.config.group_query_mode,
        )

    def create_session(
        self,
        participants: Sequence[str],
        turn_policy: str = ROUND_ROBIN,
        max_turns: int = 10,
    ) -> GroupSession:
        session = sessions.create_session(
            participants, self.agents.get, turn_policy=turn_policy, max_turns=max_turns
        )
        return self.sessions.add(session)

    def get_session(self, session_id: str) -> GroupSession:
        return self.sessions.get(session_id)

    def advance_session(self, session_id: str) -> ChatMessage:
        return self._runner().next_turn(self.sessions.get(session_id))

    def run_session(self, session_id: str) -> GroupSession:
        session = self.sessions.get(session_id)
        self._runner().run_simulation(session)
        return session

    def stop_session(self, session_id: str) -> GroupSession:
        session = self.sessions.get(session_id)
        if session.status == OPEN:
            session.status = STOPPED
        return session

    def post_creator_turn(
        self,
        session_id: str,
        content: str,
        responder_id: Optional[str] = None,
    ) -> Tuple[ChatMessage, ChatMessage]:
        """Creator sends a message in a manual session; the responding
        service agent answers from its knowledge with rules applied.

        Returns (creator message, agent reply). Nothing is appended if the
        provider faults, so a failed call leaves the transcript unchanged.
        """
        if not content:
            raise InvalidSpecError("message content must be non-empty")
        session = self.sessions.get(session_id)
        if session.status != OPEN:
            raise SessionNotOpenError(f"session {session_id} is {session.status}")
        if session.turn_policy != MANUAL:
            raise InvalidSpecError("creator turns require a manual session")
        responder_id = responder_id if responder_id is not None else self._default_responder(session)
        if responder_id not in session.participants:
            raise InvalidSpecError(f"{responder_id} is not a participant of session {session_id}")
        agent = self.agents.get(responder_id)
        ctx = RuleContext(session_id=session.id, agent=agent, states=self.rule_states)

        intercepted = self.rules.apply_turn_advance(agent, content, ctx)
        if intercepted is not None:
            reply = AttributedResponse(text=intercepted, attributions=(), retrieval_trace=())
        else:
            prior = self._map_prior_turns(session, responder_id)
            kb = self.kbs.get(agent.kb_id)
            reply = knowledge.answer(
                agent,
                prior,
                content,
                kb=kb,
                provider=self.provider,
                k=self.config.answer_k,
                char_budget=self.config.context_budget,
                context_instruction=self.config.context_instruction,
                params=self.config.gen_params(),
                pre_prompt=lambda turns: self.rules.apply_pre_prompt(agent, turns, ctx),
                post_response=lambda text: self.rules.apply_post_response(agent, text, ctx),
            )
        creator_message = ChatMessage(
            message_id=uuid.uuid4().hex, author_id=CREATOR_AUTHOR, content=content
        )
        agent_message = ChatMessage(
            message_id=uuid.uuid4().hex,
            author_id=responder_id,
            content=reply.text,
            attributions=list(reply.attributions),
        )
        creator_message.validate()
        agent_message.validate()
        session.transcript.append(creator_message)
        session.transcript.append(agent_message)
        return creator_message, agent_message

    def _default_responder(self, session: GroupSession) -> str:
        for agent_id in session.participants:
            try:
                if self.agents.get(agent_id).kind == SERVICE_AGENT:
                    return agent_id
            except NotFoundError:
                continue
        return session.participants[0]

    def _map_prior_turns(self, session: GroupSession, responder_id: str) -> List[ChatTurn]:
        """Prior transcript mapped to two roles for the answering agent.

        Same mapping rule as group sessions, except the creator speaks
        unprefixed: in a one-on-one chat the creator simply is the user.
        """
        turns: List[ChatTurn] = []
        for message in session.transcript:
            if message.author_id == responder_id:
                turns.append(ChatTurn("assistant", message.content))
            elif message.author_id == CREATOR_AUTHOR:
                turns.append(ChatTurn("user", message.content))
            else:
                try:
                    name = self.agents.get(message.author_id).name
                except NotFoundError:
                    name = message.author_id
                turns.append(ChatTurn("user", f"{name}: {message.content}"))
        return sessions._merge_adjacent(turns)

    def ask(
        self,
        agent_id: str,
        content: str,
        session_id: Optional[str] = None,
    ) -> Tuple[GroupSession, ChatMessage, ChatMessage]:
        """Convenience for creator chat: ensure a manual session, then post."""
        agent = self.agents.get(agent_id)
        if session_id is None:
            session = self.create_session([agent.id], turn_policy=MANUAL, max_turns=1000)
        else:
            session = self.sessions.get(session_id)
        creator_message, agent_message = self.post_creator_turn(
            session.id, content, responder_id=agent_id
        )
        return session, creator_message, agent_message

    # ----- curation -------------------------------------------------------

    def edit_message(
        self, message_id: str, corrected_text: str, note: Optional[str] = None
    ) -> Tuple[ChatMessage, curation.CuratedExchange]:
        session, message = self.sessions.find_by_message(message_id)
        exchange = curation.edit_response(session, message_id, corrected_text, note=note)
        return message, exchange

    def sync_message(
        self,
        kb_id: str,
        message_id: str,
        boost: Optional[float] = None,
    ) -> Tuple[knowledge.KnowledgeChunk, curation.CuratedExchange]:
        """Teach an (edited or not) agent answer back into a knowledge base."""
        session, message = self.sessions.find_by_message(message_id)
        if message.author_id == CREATOR_AUTHOR:
            raise NotAnAssistantMessageError("only agent messages can be synced into knowledge")
        index, _ = session.find_message(message_id)
        question = None
        for earlier in reversed(session.transcript[:index]):
            if earlier.author_id != message.author_id:
                question = earlier
                break
        if question is None:
            raise NoPrecedingQuestionError(f"message {message_id} has no preceding question")
        exchange = curation.CuratedExchange(
            question=question.content,
            corrected_answer=message.content,
            source_session=session.id,
            source_message=message_id,
            created_at=time.time(),
        )
        kb = self.kbs.get(kb_id)
        chunk = curation.sync_to_knowledge(
            kb,
            exchange,
            self.provider,
            boost=boost if boost is not None else self.config.curation_boost,
        )
        return chunk, exchange

    # ----- personas -------------------------------------------------------

    def create_persona(self, **fields) -> PersonaSpec:
        persona = PersonaSpec(**fields)
        self.personas[persona.name] = persona
        return persona

    def list_personas(self) -> List[PersonaSpec]:
        return list(self.personas.values())

    def get_persona(self, name: str) -> PersonaSpec:
        persona = self.personas.get(name)
        if persona is None:
            raise NotFoundError(f"no persona named {name!r}")
        return persona

    def instantiate_persona(self, name: str) -> AgentSpec:
        """Create a persona agent from a stored persona."""
        persona = self.get_persona(name)
        agent = self.agents.create(personas.build_persona_agent(persona))
        self.persona_bindings[agent.id] = persona.name
        return agent

    def compare_strategies(
        self,
        service_agent_id: str,
        arms: Sequence[Optional[PersonaSpec]],
        turns: int = 10,
        scripts: Optional[Sequence[Sequence[str]]] = None,
    ) -> StrategyReport:
        """Run one simulated dialogue per arm and report length metrics.

        Each arm is a persona (or None for the bare-patron baseline).
        Optional per-arm scripts run each arm against its own scripted mock
        provider, which makes comparisons reproducible offline.
        """
        service_agent = self.agents.get(service_agent_id)
        if service_agent.kind != SERVICE_AGENT:
            raise InvalidSpecError("comparison arms run against a service agent")
        if len(arms) < 2:
            raise InvalidSpecError("a comparison needs at least two arms")
        if scripts is not None and len(scripts) != len(arms):
            raise InvalidSpecError("scripts, when given, must match the number of arms")

        labels: List[str] = []
        names: List[Optional[str]] = []
        arm_sessions: List[GroupSession] = []
        for arm_index, persona in enumerate(arms):
            if persona is None:
                label = f"arm-{arm_index}:baseline"
                patron = self.agents.create(
                    AgentSpec(
                        name=f"Baseline patron (arm {arm_index})",
                        definition=personas.BASELINE_PATRON_DEFINITION,
                        kind="persona_agent",
                    )
                )
            else:
                label = f"arm-{arm_index}:{persona.strategy}"
                self.personas.setdefault(persona.name, persona)
                patron = self.agents.create(personas.build_persona_agent(persona))
                self.persona_bindings[patron.id] = persona.name
            session = self.create_session(
                [patron.id, service_agent_id], turn_policy=ROUND_ROBIN, max_turns=turns
            )
            provider = MockProvider(scripts[arm_index]) if scripts is not None else None
            self._runner(provider=provider).run_simulation(session)
            labels.append(label)
            names.append(persona.name if persona is not None else None)
            arm_sessions.append(session)
        return personas.build_strategy_report(labels, names, arm_sessions)

    # ----- audit ----------------------------------------------------------

    def _resolve_locator(self, locator: dict) -> Optional[str]:
        doc_id = locator.get("doc_id")
        for kb in self.kbs.list():
            doc = kb.docs.get(doc_id)
            if doc is not None:
                return doc.text[locator["start_char"] : locator["end_char"]]
        return None

    def audit_session(
        self,
        session_id: str,
        configs: Optional[Dict[str, AuditCheckConfig]] = None,
    ) -> List[AuditFinding]:
        session = self.sessions.get(session_id)
        records = sessions.export_records(session, self.agents.get)
        return audit_transcript(
            records,
            configs if configs is not None else self.audit_configs,
            resolve_source=self._resolve_locator,
        )

    def export_transcript(self, session_id: str) -> List[dict]:
        return sessions.export_records(self.sessions.get(session_id), self.agents.get)

    # ----- persistence ----------------------------------------------------

    def save(self, path: Optional[str] = None) -> str:
        from .project import save_project

        target = path if path is not None else self.project_path
        if target is None:
            raise InvalidSpecError("no project path configured")
        with self._save_lock:
            save_project(self, target)
        self.project_path = target
        return target

    @classmethod
    def load(
        cls,
        path: str,
        provider: Optional[ChatProvider] = None,
        config: Optional[EngineConfig] = None,
    ) -> "Engine":
        from .project import load_project

        return load_project(path, provider=provider, config_override=config)
