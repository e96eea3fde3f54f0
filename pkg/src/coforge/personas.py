"""Persona-driven patron simulation.

Three prompting strategies turn a persona sketch into a simulated patron:

* ``descriptive`` folds the profile into the agent definition;
* ``explicit`` appends a hand-written question-tendency clause, which in
  practice steers question style the hardest;
* ``chained`` drives each turn with two model calls: infer the most
  probable next question, then rephrase it in the persona's tone.

A comparison harness runs two or more strategy arms against the same
service agent and reports dialogue-length metrics per arm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

from .agents import AgentSpec, PERSONA_AGENT
from .errors import InvalidSpecError
from .providers import ChatProvider, ChatTurn
from .sessions import GroupSession, SessionRunner, map_history

DESCRIPTIVE = "descriptive"
CHAINED = "chained"
EXPLICIT = "explicit"
STRATEGIES = (DESCRIPTIVE, CHAINED, EXPLICIT)

DESCRIPTIVE_TEMPLATE = "You are role-playing this library patron: "
EXPLICIT_TEMPLATE = "You are role-playing patron {name}. "
BASELINE_PATRON_DEFINITION = "You are a library patron."


@dataclass(frozen=True)
class PersonaSpec:
    name: str
    profile: str = ""
    tendency_clause: str = ""
    strategy: str = EXPLICIT

    def __post_init__(self):
        if not self.name:
            raise InvalidSpecError("persona name must be non-empty")
        if self.strategy not in STRATEGIES:
            raise InvalidSpecError(f"invalid persona strategy: {self.strategy!r}")
        if self.strategy == EXPLICIT and not self.tendency_clause:
            raise InvalidSpecError("explicit personas need a tendency clause")
        if self.strategy in (DESCRIPTIVE, CHAINED) and not self.profile:
            raise InvalidSpecError(f"{self.strategy} personas need a profile")


# Reference personas used throughout the simulation examples and tests.
PERSONA_FIXTURES: Tuple[PersonaSpec, ...] = (
    PersonaSpec(
        name="Inexperienced patron",
        profile="A patron with little experience using library technology.",
        tendency_clause=(
            "Due to A's lack of experience, A tends to be not confident and ask simple questions."
        ),
        strategy=EXPLICIT,
    ),
    PersonaSpec(
        name="Experienced patron",
        profile="A patron who has used the book scanner before.",
        tendency_clause=(
            "A has some experience using the scanner so A tends to ask questions about some details."
        ),
        strategy=EXPLICIT,
    ),
    PersonaSpec(
        name="Low literacy old man",
        profile="An old man unfamiliar with modern technology.",
        tendency_clause=(
            "A is an old man lacking modern technical knowledge so A tends to ask very "
            "simple questions and inquire about some technical terms."
        ),
        strategy=EXPLICIT,
    ),
    PersonaSpec(
        name="High literacy patron",
        profile="A patron with advanced technical knowledge.",
        tendency_clause=(
            "A has advanced knowledge in technical areas and tends to ask tricky questions."
        ),
        strategy=EXPLICIT,
    ),
    PersonaSpec(
        name="Curious child",
        profile="A curious child visiting the library.",
        tendency_clause=(
            "A is a curious child, so aside from questions about how to use the scanner, "
            "A also tends to ask questions about how things work."
        ),
        strategy=EXPLICIT,
    ),
)


def build_persona_agent(persona: PersonaSpec) -> AgentSpec:
    """Materialize a persona as a (not yet registered) persona agent."""
    if persona.strategy == EXPLICIT:
        definition = EXPLICIT_TEMPLATE.format(name=persona.name) + persona.tendency_clause
    else:
        definition = DESCRIPTIVE_TEMPLATE + persona.profile
    agent = AgentSpec(name=persona.name, definition=definition, kind=PERSONA_AGENT)
    agent.validate()
    return agent


def _render_context(turns: Sequence[ChatTurn]) -> str:
    lines = [f"{turn.role}: {turn.content}" for turn in turns if turn.role != "system"]
    if not lines:
        return "(the conversation has not started)"
    return "\n".join(lines)


def chain_infer_question(
    persona: PersonaSpec,
    context_turns: Sequence[ChatTurn],
    provider: ChatProvider,
) -> str:
    """First chain step: one model call inferring the next question."""
    prompt = [
        ChatTurn(
            "system",
            "You are simulating a library patron with this background, digital "
            f"literacy, and experience: {persona.profile}\n"
            "Read the conversation and infer the most probable next question this "
            "patron would ask. Output only that question.",
        ),
        ChatTurn("user", _render_context(context_turns)),
    ]
    return provider.chat_complete(prompt)


def chain_rephrase(
    question: str,
    persona: PersonaSpec,
    provider: ChatProvider,
) -> str:
    """Second chain step: rephrase in the persona's tone.

    An empty rephrasing falls back to the unrephrased question.
    """
    if not question:
        raise InvalidSpecError("cannot rephrase an empty question")
    prompt = [
        ChatTurn(
            "system",
            "Rephrase the question in the voice and tone of this library patron: "
            f"{persona.profile}\nOutput only the rephrased question.",
        ),
        ChatTurn("user", question),
    ]
    rephrased = provider.chat_complete(prompt).strip()
    return rephrased if rephrased else question


def make_chained_generator(
    persona: PersonaSpec,
    provider: ChatProvider,
    agents_lookup: Callable[[str], AgentSpec],
):
    """Per-turn content generator wiring the two-step chain into sessions."""

    def generate(session: GroupSession, responder: AgentSpec):
        context = map_history(session, responder.id, agents_lookup)
        question = chain_infer_question(persona, context, provider)
        utterance = chain_rephrase(question, persona, provider)
        return utterance, []

    return generate


@dataclass(frozen=True)
class ArmReport:
    label: str
    persona_name: Optional[str]
    session_id: str
    message_count: int
    total_chars: int
    mean_chars_per_message: float


@dataclass(frozen=True)
class StrategyReport:
    arms: Tuple[ArmReport, ...]
    longest_arm_index: int
    total_chars_delta: int


def transcript_metrics(messages: Sequence) -> Tuple[int, int, float]:
    """(message_count, total_chars, mean_chars) for a transcript.

    Shared by the harness and by report recomputation, so stored
    transcripts always reproduce the reported numbers exactly.
    """
    count = len(messages)
    total = sum(len(m.content) for m in messages)
    mean = total / count if count else 0.0
    return count, total, mean


def build_strategy_report(
    arm_labels: Sequence[str],
    arm_personas: Sequence[Optional[str]],
    arm_sessions: Sequence[GroupSession],
) -> StrategyReport:
    arms = []
    for label, persona_name, session in zip(arm_labels, arm_personas, arm_sessions):
        count, total, mean = transcript_metrics(session.transcript)
        arms.append(
            ArmReport(
                label=label,
                persona_name=persona_name,
                session_id=session.id,
                message_count=count,
                total_chars=total,
                mean_chars_per_message=mean,
            )
        )
    totals = [arm.total_chars for arm in arms]
    return StrategyReport(
        arms=tuple(arms),
        longest_arm_index=totals.index(max(totals)),
        total_chars_delta=max(totals) - min(totals),
    )
