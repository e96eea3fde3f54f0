"""The six lexical transcript checks and the audit driver."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from coforge.audit import (
    CHECK_IDS,
    AuditCheckConfig,
    audit_transcript,
    default_audit_configs,
    ngram_overlap,
    render_summary,
    word_ngrams,
)
from coforge.errors import InvalidSpecError, MissingAttributionsError


def record(content, message_id="m1", kind="service_agent", attributions=None):
    return {
        "message_id": message_id,
        "session_id": "s1",
        "author_id": "agent-1",
        "author_kind": kind,
        "content": content,
        "attributions": attributions or [],
        "edited": False,
        "created_at": 0.0,
    }


def run_checks(records, resolve_source=None, **overrides):
    configs = default_audit_configs()
    if resolve_source is None:
        configs["H17_paraphrase"].enabled = False
    for check_id, enabled in overrides.items():
        configs[check_id].enabled = enabled
    return audit_transcript(records, configs, resolve_source=resolve_source)


class TestLength:
    def test_over_limit_flagged(self):
        findings = run_checks([record("x" * 801)])
        assert [f.check_id for f in findings] == ["H09_length"]
        assert findings[0].severity == "info"
        assert (findings[0].evidence_start, findings[0].evidence_end) == (800, 801)

    def test_at_limit_clean(self):
        assert run_checks([record("x" * 800)]) == []

    def test_configurable_limit(self):
        configs = default_audit_configs()
        configs["H09_length"].parameters["max_chars"] = 10
        configs["H17_paraphrase"].enabled = False
        findings = audit_transcript([record("x" * 11)], configs)
        assert [f.check_id for f in findings] == ["H09_length"]


class TestSteps:
    PROCEDURE = "Place the book on the glass. Press the green button. Remove the book after the beep."

    def test_unformatted_procedure_flagged(self):
        findings = run_checks([record(self.PROCEDURE)])
        assert [f.check_id for f in findings] == ["H12_steps"]

    def test_step_formatted_procedure_clean(self):
        formatted = "STEP 1: Place the book.\nSTEP 2: Press the button.\nSTEP 3: Remove it."
        assert run_checks([record(formatted)]) == []

    def test_two_imperatives_not_enough(self):
        assert run_checks([record("Press the button. Remove the book.")]) == []

    def test_non_imperative_prose_clean(self):
        prose = "The scanner is in the corner. It was installed last year. Many patrons like it."
        assert run_checks([record(prose)]) == []


REFUSAL = "I cannot answer that in the given context."


class TestConstructiveAndEscalation:
    def test_bare_refusal_flags_both(self):
        findings = run_checks([record(REFUSAL)])
        assert [f.check_id for f in findings] == ["H13_constructive", "H15_escalation"]
        assert all(f.severity == "warn" for f in findings)

    def test_alternative_clears_constructive_only(self):
        text = REFUSAL + " Here is what I found about scanners instead."
        findings = run_checks([record(text)])
        assert [f.check_id for f in findings] == ["H15_escalation"]

    def test_referral_clears_escalation_only(self):
        text = REFUSAL + " Please ask the library staff at the desk."
        findings = run_checks([record(text)])
        assert [f.check_id for f in findings] == ["H13_constructive"]

    def test_helpful_refusal_clean(self):
        text = REFUSAL + " Here is what I found instead; the librarian can tell you more."
        assert run_checks([record(text)]) == []

    def test_evidence_span_covers_refusal_pattern(self):
        findings = run_checks([record(REFUSAL)])
        span = REFUSAL[findings[0].evidence_start : findings[0].evidence_end]
        assert span.lower() in ("i cannot answer", "in the given context")


class TestDisclaimer:
    def test_medical_topic_without_disclaimer(self):
        findings = run_checks([record("Aspirin has known side effects.")])
        assert [f.check_id for f in findings] == ["H16_disclaimer"]

    def test_disclaimer_clears_it(self):
        text = (
            "Aspirin has known side effects. "
            "Please confirm with library staff before relying on this."
        )
        assert run_checks([record(text)]) == []

    def test_one_finding_even_for_multiple_topics(self):
        text = "Our policy on legal and medical questions is strict."
        findings = run_checks([record(text)])
        assert len(findings) == 1
        assert findings[0].check_id == "H16_disclaimer"

    def test_neutral_topic_clean(self):
        assert run_checks([record("The scanner takes about five seconds per page.")]) == []


class TestParaphrase:
    SOURCE = (
        "Our lending policy allows patrons to borrow up to ten books "
        "for three weeks at a time with one renewal."
    )

    def resolver(self, locator):
        return self.SOURCE

    def loc(self):
        return {
            "doc_id": "d1",
            "doc_title": "Policy",
            "start_char": 0,
            "end_char": len(self.SOURCE),
            "start_line": 1,
            "page": None,
        }

    def test_faithful_quote_clean(self):
        text = "Per policy: " + self.SOURCE
        findings = run_checks([record(text, attributions=[self.loc()])], resolve_source=self.resolver)
        assert [f.check_id for f in findings if f.check_id == "H17_paraphrase"] == []

    def test_divergent_policy_answer_flagged(self):
        text = (
            "The policy here says you may keep any number of books forever and "
            "never bring anything back to us at all."
        )
        findings = run_checks([record(text, attributions=[self.loc()])], resolve_source=self.resolver)
        assert "H17_paraphrase" in [f.check_id for f in findings]

    def test_no_attributions_skipped(self):
        text = "The policy says something entirely made up and unverifiable here today."
        findings = run_checks([record(text)], resolve_source=self.resolver)
        assert [f.check_id for f in findings if f.check_id == "H17_paraphrase"] == []

    def test_non_policy_message_skipped(self):
        text = "You may keep any number of books forever and never return them to anyone."
        findings = run_checks([record(text, attributions=[self.loc()])], resolve_source=self.resolver)
        assert [f.check_id for f in findings if f.check_id == "H17_paraphrase"] == []

    def test_enabled_without_resolver_raises(self):
        with pytest.raises(MissingAttributionsError):
            audit_transcript([record("policy text")], default_audit_configs())

    def test_short_policy_message_skipped(self):
        findings = run_checks(
            [record("Policy?", attributions=[self.loc()])], resolve_source=self.resolver
        )
        assert "H17_paraphrase" not in [f.check_id for f in findings]


class TestNgrams:
    def test_word_ngrams_basic(self):
        grams = word_ngrams("the cat sat on the mat", 5)
        assert grams == {("the", "cat", "sat", "on", "the"), ("cat", "sat", "on", "the", "mat")}

    def test_too_short_returns_none(self):
        assert ngram_overlap("one two three four", "anything", 5) is None

    @given(
        st.text(alphabet="abc def", min_size=0, max_size=60),
        st.text(alphabet="abc def", min_size=0, max_size=60),
    )
    @settings(max_examples=100)
    def test_overlap_matches_oracle(self, message, source):
        assert ngram_overlap(message, source, 5) == oracles.overlap_ratio(message, source, 5)

    @given(st.text(alphabet="abcde fg", min_size=10, max_size=80))
    def test_self_overlap_is_one(self, text):
        overlap = ngram_overlap(text, text, 5)
        if overlap is not None:
            assert overlap == 1.0


class TestDriver:
    def test_creator_and_persona_messages_skipped(self):
        records = [
            record(REFUSAL, message_id="m0", kind="creator"),
            record(REFUSAL, message_id="m1", kind="persona_agent"),
            record(REFUSAL, message_id="m2", kind="service_agent"),
        ]
        findings = run_checks(records)
        assert {f.message_id for f in findings} == {"m2"}

    def test_findings_ordered_by_message_then_check(self):
        records = [
            record("x" * 900, message_id="m0"),
            record(REFUSAL, message_id="m1"),
        ]
        findings = run_checks(records)
        assert [(f.message_id, f.check_id) for f in findings] == [
            ("m0", "H09_length"),
            ("m1", "H13_constructive"),
            ("m1", "H15_escalation"),
        ]

    def test_disabled_check_skipped(self):
        findings = run_checks([record(REFUSAL)], H13_constructive=False)
        assert [f.check_id for f in findings] == ["H15_escalation"]

    def test_unknown_config_key_rejected(self):
        with pytest.raises(InvalidSpecError):
            AuditCheckConfig("H99_bogus")
        with pytest.raises(InvalidSpecError):
            audit_transcript([], {"H99_bogus": default_audit_configs()["H09_length"]})

    def test_clean_transcript_no_findings(self):
        records = [
            record("The scanner sits by the window.", message_id="m0"),
            record("It takes about five seconds per page.", message_id="m1"),
        ]
        assert run_checks(records) == []

    def test_render_summary(self):
        assert render_summary([]) == "No findings."
        findings = run_checks([record(REFUSAL)])
        text = render_summary(findings)
        assert "H13_constructive" in text and "H15_escalation" in text

    def test_check_id_catalog(self):
        assert CHECK_IDS == (
            "H09_length",
            "H12_steps",
            "H13_constructive",
            "H15_escalation",
            "H16_disclaimer",
            "H17_paraphrase",
        )
