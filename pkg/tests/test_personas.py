"""Persona prompting strategies and the arm-comparison metrics."""
import pytest

from coforge.agents import compose_definition
from coforge.errors import InvalidSpecError
from coforge.personas import (
    BASELINE_PATRON_DEFINITION,
    DESCRIPTIVE_TEMPLATE,
    EXPLICIT_TEMPLATE,
    PERSONA_FIXTURES,
    ArmReport,
    PersonaSpec,
    build_persona_agent,
    build_strategy_report,
    chain_infer_question,
    chain_rephrase,
    make_chained_generator,
    transcript_metrics,
)
from coforge.providers import MockProvider
from coforge.sessions import ChatMessage, GroupSession

FIXTURE_CLAUSES = {
    "Inexperienced patron": (
        "Due to A's lack of experience, A tends to be not confident and ask simple questions."
    ),
    "Experienced patron": (
        "A has some experience using the scanner so A tends to ask questions about some details."
    ),
    "Low literacy old man": (
        "A is an old man lacking modern technical knowledge so A tends to ask very "
        "simple questions and inquire about some technical terms."
    ),
    "High literacy patron": (
        "A has advanced knowledge in technical areas and tends to ask tricky questions."
    ),
    "Curious child": (
        "A is a curious child, so aside from questions about how to use the scanner, "
        "A also tends to ask questions about how things work."
    ),
}


class TestPersonaSpec:
    def test_explicit_requires_clause(self):
        with pytest.raises(InvalidSpecError):
            PersonaSpec(name="P", strategy="explicit")

    def test_descriptive_and_chained_require_profile(self):
        with pytest.raises(InvalidSpecError):
            PersonaSpec(name="P", strategy="descriptive")
        with pytest.raises(InvalidSpecError):
            PersonaSpec(name="P", strategy="chained")

    def test_unknown_strategy(self):
        with pytest.raises(InvalidSpecError):
            PersonaSpec(name="P", strategy="improv", profile="x")


class TestFixtures:
    def test_five_fixtures_with_exact_clauses(self):
        assert len(PERSONA_FIXTURES) == 5
        by_name = {p.name: p for p in PERSONA_FIXTURES}
        assert set(by_name) == set(FIXTURE_CLAUSES)
        for name, clause in FIXTURE_CLAUSES.items():
            assert by_name[name].tendency_clause == clause
            assert by_name[name].strategy == "explicit"

    def test_fixture_clause_lands_in_composed_prompt(self):
        for persona in PERSONA_FIXTURES:
            agent = build_persona_agent(persona)
            system = compose_definition(agent)[0].content
            assert FIXTURE_CLAUSES[persona.name] in system


class TestBuildPersonaAgent:
    def test_explicit_definition(self):
        persona = PersonaSpec(name="Shy patron", tendency_clause="A asks quietly.")
        agent = build_persona_agent(persona)
        assert agent.kind == "persona_agent"
        assert agent.definition == EXPLICIT_TEMPLATE.format(name="Shy patron") + "A asks quietly."

    def test_descriptive_definition(self):
        persona = PersonaSpec(name="P", profile="A retired teacher.", strategy="descriptive")
        agent = build_persona_agent(persona)
        assert agent.definition == DESCRIPTIVE_TEMPLATE + "A retired teacher."

    def test_chained_uses_profile_definition(self):
        persona = PersonaSpec(name="P", profile="A teen gamer.", strategy="chained")
        agent = build_persona_agent(persona)
        assert agent.definition == DESCRIPTIVE_TEMPLATE + "A teen gamer."


class TestChain:
    def persona(self):
        return PersonaSpec(name="P", profile="A curious child.", strategy="chained")

    def test_infer_question_is_one_call(self):
        mock = MockProvider(script=("What is a scanner?",))
        question = chain_infer_question(self.persona(), [], mock)
        assert question == "What is a scanner?"
        assert len(mock.chat_calls) == 1
        system = mock.chat_calls[0][0]
        assert "A curious child." in system.content
        assert mock.chat_calls[0][1].content == "(the conversation has not started)"

    def test_infer_renders_non_system_context(self):
        from coforge.providers import ChatTurn

        mock = MockProvider(script=("q",))
        context = [
            ChatTurn("system", "hidden"),
            ChatTurn("user", "Helper: hello"),
            ChatTurn("assistant", "hi"),
        ]
        chain_infer_question(self.persona(), context, mock)
        rendered = mock.chat_calls[0][1].content
        assert rendered == "user: Helper: hello\nassistant: hi"
        assert "hidden" not in rendered

    def test_rephrase_is_one_call_with_fallback(self):
        mock = MockProvider(script=("   ",))
        assert chain_rephrase("What is it?", self.persona(), mock) == "What is it?"
        mock = MockProvider(script=("Whats that thing?",))
        assert chain_rephrase("What is it?", self.persona(), mock) == "Whats that thing?"
        with pytest.raises(InvalidSpecError):
            chain_rephrase("", self.persona(), mock)

    def test_generator_makes_two_calls_per_turn(self):
        from coforge.agents import AgentSpec

        mock = MockProvider(script=("inferred?", "rephrased?"))
        patron_agent = AgentSpec(
            name="P", definition="You are P.", kind="persona_agent", id="p1"
        )
        lookup = {"p1": patron_agent}.__getitem__
        generator = make_chained_generator(self.persona(), mock, lookup)
        session = GroupSession(id="s", participants=["p1"], turn_policy="round_robin")
        content, attributions = generator(session, patron_agent)
        assert content == "rephrased?"
        assert attributions == []
        assert len(mock.chat_calls) == 2


def messages(*contents):
    return [
        ChatMessage(message_id=f"m{i}", author_id="a", content=c)
        for i, c in enumerate(contents)
    ]


class TestMetrics:
    def test_transcript_metrics(self):
        count, total, mean = transcript_metrics(messages("ab", "cdef"))
        assert (count, total, mean) == (2, 6, 3.0)
        assert transcript_metrics([]) == (0, 0, 0.0)

    def test_report_delta_and_longest(self):
        s1 = GroupSession(id="s1", participants=["a", "b"], transcript=messages("aaaa"))
        s2 = GroupSession(id="s2", participants=["a", "b"], transcript=messages("bb", "cc"))
        report = build_strategy_report(
            ["arm-0:baseline", "arm-1:explicit"], [None, "P"], [s1, s2]
        )
        assert report.arms[0] == ArmReport(
            label="arm-0:baseline",
            persona_name=None,
            session_id="s1",
            message_count=1,
            total_chars=4,
            mean_chars_per_message=4.0,
        )
        assert report.arms[1].total_chars == 4
        assert report.total_chars_delta == 0
        assert report.longest_arm_index == 0

    def test_baseline_definition_constant(self):
        assert BASELINE_PATRON_DEFINITION == "You are a library patron."
