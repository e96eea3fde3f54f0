"""Agent boundary definitions.

An agent is a natural-language definition plus optional exemplar dialogues
and a fixed-key "cooklist" of design facets the creator fills in while
scoping the agent. The cooklist is descriptive metadata only; it is never
injected into prompts.
"""
from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

from .errors import InvalidSpecError, NotFoundError, UnknownFacetError
from .providers import ChatTurn

SERVICE_AGENT = "service_agent"
PERSONA_AGENT = "persona_agent"
AGENT_KINDS = (SERVICE_AGENT, PERSONA_AGENT)

# The ten design facets a creator works through when scoping an agent.
COOKLIST_FACETS = frozenset(
    {
        "size",
        "deployment",
        "role",
        "functionality",
        "dialogue",
        "engagement",
        "escalation",
        "humanness",
        "maintenance",
        "evaluation",
    }
)


def validate_cooklist(facets: Mapping[str, str]) -> Dict[str, str]:
    """Return a validated copy; keys outside the fixed facet set are rejected."""
    for key in facets:
        if key not in COOKLIST_FACETS:
            raise UnknownFacetError(key)
    return {key: str(value) for key, value in facets.items()}


@dataclass
class AgentSpec:
    """Everything that defines one agent's behavior boundary."""

    name: str
    definition: str
    kind: str = SERVICE_AGENT
    exemplars: List[Tuple[str, str]] = field(default_factory=list)
    cooklist: Dict[str, str] = field(default_factory=dict)
    kb_id: Optional[str] = None
    enabled_rules: List[str] = field(default_factory=list)
    id: str = ""

    def validate(self) -> None:
        if not self.name:
            raise InvalidSpecError("agent name must be non-empty")
        if self.kind not in AGENT_KINDS:
            raise InvalidSpecError(f"invalid agent kind: {self.kind!r}")
        if not self.definition:
            raise InvalidSpecError("agent definition must be non-empty")
        for pair in self.exemplars:
            if len(pair) != 2 or not pair[0].strip() or not pair[1].strip():
                raise InvalidSpecError("each exemplar needs a non-blank user and assistant side")
        validate_cooklist(self.cooklist)
        seen = set()
        for rule_id in self.enabled_rules:
            if rule_id in seen:
                raise InvalidSpecError(f"rule enabled twice: {rule_id}")
            seen.add(rule_id)


def compose_definition(agent: AgentSpec) -> List[ChatTurn]:
    """Build the role-structured prompt prefix for an agent.

    One system turn holding the definition, then a (user, assistant) pair
    per exemplar, in stored order. Pure and deterministic: 1 + 2k turns.
    """
    agent.validate()
    turns = [ChatTurn("system", agent.definition)]
    for user_text, assistant_text in agent.exemplars:
        turns.append(ChatTurn("user", user_text))
        turns.append(ChatTurn("assistant", assistant_text))
    return turns


class AgentRegistry:
    """Creation-ordered agent store with validating CRUD."""

    def __init__(self):
        self._agents: Dict[str, AgentSpec] = {}
        self._lock = threading.RLock()

    def create(self, spec: AgentSpec) -> AgentSpec:
        spec = replace(
            spec,
            exemplars=[(u, a) for u, a in spec.exemplars],
            cooklist=dict(spec.cooklist),
            enabled_rules=list(spec.enabled_rules),
        )
        spec.validate()
        with self._lock:
            spec.id = uuid.uuid4().hex
            self._agents[spec.id] = spec
        return spec

    def restore(self, spec: AgentSpec) -> AgentSpec:
        """Re-insert a persisted agent, keeping its id."""
        if not spec.id:
            raise InvalidSpecError("restored agents need an id")
        spec.validate()
        with self._lock:
            self._agents[spec.id] = spec
        return spec

    def get(self, agent_id: str) -> AgentSpec:
        with self._lock:
            agent = self._agents.get(agent_id)
        if agent is None:
            raise NotFoundError(f"no agent with id {agent_id}")
        return agent

    def update(self, agent_id: str, **patch) -> AgentSpec:
        """Whole-field patch; the last write wins."""
        with self._lock:
            current = self._agents.get(agent_id)
            if current is None:
                raise NotFoundError(f"no agent with id {agent_id}")
            unknown = set(patch) - {
                "name",
                "definition",
                "kind",
                "exemplars",
                "cooklist",
                "kb_id",
                "enabled_rules",
            }
            if unknown:
                raise InvalidSpecError(f"unknown agent fields: {sorted(unknown)}")
            if "exemplars" in patch:
                patch["exemplars"] = [(u, a) for u, a in patch["exemplars"]]
            updated = replace(current, **patch)
            updated.validate()
            self._agents[agent_id] = updated
        return updated

    def delete(self, agent_id: str) -> None:
        with self._lock:
            if agent_id not in self._agents:
                raise NotFoundError(f"no agent with id {agent_id}")
            del self._agents[agent_id]

    def list(self) -> List[AgentSpec]:
        with self._lock:
            return list(self._agents.values())

    def __contains__(self, agent_id: str) -> bool:
        with self._lock:
            return agent_id in self._agents
