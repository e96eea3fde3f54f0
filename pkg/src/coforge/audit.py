"""Heuristic transcript audits.

Six lexical checks screen service-agent messages for common conversation
design problems: over-long answers, procedures not broken into steps, bare
refusals, refusals that fail to refer the user anywhere, missing topic
disclaimers, and policy answers that drift too far from their sources.
Findings are screening aids for a human reviewer, not verdicts.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import InvalidSpecError, MissingAttributionsError
from .rules import STEP_LINE_RE

H09_LENGTH = "H09_length"
H12_STEPS = "H12_steps"
H13_CONSTRUCTIVE = "H13_constructive"
H15_ESCALATION = "H15_escalation"
H16_DISCLAIMER = "H16_disclaimer"
H17_PARAPHRASE = "H17_paraphrase"
CHECK_IDS = (
    H09_LENGTH,
    H12_STEPS,
    H13_CONSTRUCTIVE,
    H15_ESCALATION,
    H16_DISCLAIMER,
    H17_PARAPHRASE,
)

SEVERITY_INFO = "info"
SEVERITY_WARN = "warn"

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_WORD_RE = re.compile(r"[a-z0-9]+")

# which authors get audited: the service side of the conversation
_AUDITED_KINDS = {"service_agent", "agent"}

DEFAULT_REFUSAL_PATTERNS = (
    "in the given context",
    "i do not have access",
    "i don't have access",
    "i cannot answer",
    "i can't answer",
    "no information about",
    "i do not know",
    "i don't know",
    "unable to find",
)
DEFAULT_ALTERNATIVE_PATTERNS = (
    "here is what i found",
    "here's what i found",
    "might be helpful",
    "you could try",
    "you can try",
    "alternatively",
    "relevant to your question",
)
DEFAULT_REFERRAL_PATTERNS = (
    "library staff",
    "librarian",
    "front desk",
    "contact",
    "reach out",
)
DEFAULT_IMPERATIVE_VERBS = (
    "insert",
    "press",
    "click",
    "open",
    "close",
    "remove",
    "place",
    "put",
    "enter",
    "select",
    "scan",
    "tap",
    "swipe",
    "turn",
    "push",
    "pull",
    "visit",
    "bring",
    "sign",
    "fill",
    "choose",
    "lift",
    "align",
)
DEFAULT_TOPIC_KEYWORDS = {
    "legal": ("legal", "lawsuit", "attorney", "copyright law"),
    "medical": ("medical", "medication", "aspirin", "dosage", "side effects", "symptoms"),
    "policy": ("policy", "policies"),
}
DEFAULT_DISCLAIMER = "please confirm with library staff before relying on this"
DEFAULT_POLICY_KEYWORDS = ("policy", "policies")


@dataclass
class AuditCheckConfig:
    check_id: str
    enabled: bool = True
    parameters: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.check_id not in CHECK_IDS:
            raise InvalidSpecError(f"unknown audit check: {self.check_id!r}")

    def param(self, key: str, default):
        return self.parameters.get(key, default)


@dataclass(frozen=True)
class AuditFinding:
    check_id: str
    message_id: str
    severity: str
    explanation: str
    evidence_start: int
    evidence_end: int


def default_audit_configs() -> Dict[str, AuditCheckConfig]:
    """Editable defaults for all six checks, in check-id order."""
    return {
        H09_LENGTH: AuditCheckConfig(H09_LENGTH, parameters={"max_chars": 800}),
        H12_STEPS: AuditCheckConfig(
            H12_STEPS,
            parameters={
                "imperative_verbs": list(DEFAULT_IMPERATIVE_VERBS),
                "min_imperative_sentences": 3,
            },
        ),
        H13_CONSTRUCTIVE: AuditCheckConfig(
            H13_CONSTRUCTIVE,
            parameters={
                "refusal_patterns": list(DEFAULT_REFUSAL_PATTERNS),
                "alternative_patterns": list(DEFAULT_ALTERNATIVE_PATTERNS),
            },
        ),
        H15_ESCALATION: AuditCheckConfig(
            H15_ESCALATION,
            parameters={
                "refusal_patterns": list(DEFAULT_REFUSAL_PATTERNS),
                "referral_patterns": list(DEFAULT_REFERRAL_PATTERNS),
            },
        ),
        H16_DISCLAIMER: AuditCheckConfig(
            H16_DISCLAIMER,
            parameters={
                "topic_keywords": {k: list(v) for k, v in DEFAULT_TOPIC_KEYWORDS.items()},
                "disclaimer": DEFAULT_DISCLAIMER,
            },
        ),
        H17_PARAPHRASE: AuditCheckConfig(
            H17_PARAPHRASE,
            parameters={
                "ngram_size": 5,
                "min_overlap": 0.3,
                "policy_keywords": list(DEFAULT_POLICY_KEYWORDS),
            },
        ),
    }


def _find_pattern(content_lower: str, patterns: Sequence[str]) -> Optional[Tuple[str, int]]:
    """First pattern that occurs, with its offset; None when none match."""
    best: Optional[Tuple[str, int]] = None
    for pattern in patterns:
        index = content_lower.find(pattern.lower())
        if index != -1 and (best is None or index < best[1]):
            best = (pattern, index)
    return best


def word_ngrams(text: str, n: int) -> set:
    words = _WORD_RE.findall(text.lower())
    return {tuple(words[i : i + n]) for i in range(len(words) - n + 1)}


def ngram_overlap(message_text: str, source_text: str, n: int) -> Optional[float]:
    """Fraction of the message's word n-grams present in the source.

    None when the message is too short to form any n-gram.
    """
    message_grams = word_ngrams(message_text, n)
    if not message_grams:
        return None
    source_grams = word_ngrams(source_text, n)
    return len(message_grams & source_grams) / len(message_grams)


def _check_h09(record: dict, config: AuditCheckConfig) -> List[AuditFinding]:
    max_chars = int(config.param("max_chars", 800))
    content = record["content"]
    if len(content) <= max_chars:
        return []
    return [
        AuditFinding(
            check_id=H09_LENGTH,
            message_id=record["message_id"],
            severity=SEVERITY_INFO,
            explanation=f"answer is {len(content)} chars, over the {max_chars}-char limit",
            evidence_start=max_chars,
            evidence_end=len(content),
        )
    ]


def _check_h12(record: dict, config: AuditCheckConfig) -> List[AuditFinding]:
    content = record["content"]
    if STEP_LINE_RE.search(content):
        return []
    verbs = {v.lower() for v in config.param("imperative_verbs", DEFAULT_IMPERATIVE_VERBS)}
    minimum = int(config.param("min_imperative_sentences", 3))
    imperative = 0
    for sentence in _SENTENCE_SPLIT_RE.split(content):
        words = _WORD_RE.findall(sentence.lower())
        if words and words[0] in verbs:
            imperative += 1
    if imperative < minimum:
        return []
    return [
        AuditFinding(
            check_id=H12_STEPS,
            message_id=record["message_id"],
            severity=SEVERITY_INFO,
            explanation=(
                f"{imperative} imperative sentences read like a procedure but lack STEP formatting"
            ),
            evidence_start=0,
            evidence_end=len(content),
        )
    ]


def _check_h13(record: dict, config: AuditCheckConfig) -> List[AuditFinding]:
    content_lower = record["content"].lower()
    refusal = _find_pattern(content_lower, config.param("refusal_patterns", DEFAULT_REFUSAL_PATTERNS))
    if refusal is None:
        return []
    alternative = _find_pattern(
        content_lower, config.param("alternative_patterns", DEFAULT_ALTERNATIVE_PATTERNS)
    )
    if alternative is not None:
        return []
    pattern, index = refusal
    return [
        AuditFinding(
            check_id=H13_CONSTRUCTIVE,
            message_id=record["message_id"],
            severity=SEVERITY_WARN,
            explanation=f"refusal ({pattern!r}) offers nothing constructive in its place",
            evidence_start=index,
            evidence_end=index + len(pattern),
        )
    ]


def _check_h15(record: dict, config: AuditCheckConfig) -> List[AuditFinding]:
    content_lower = record["content"].lower()
    refusal = _find_pattern(content_lower, config.param("refusal_patterns", DEFAULT_REFUSAL_PATTERNS))
    if refusal is None:
        return []
    referral = _find_pattern(
        content_lower, config.param("referral_patterns", DEFAULT_REFERRAL_PATTERNS)
    )
    if referral is not None:
        return []
    pattern, index = refusal
    return [
        AuditFinding(
            check_id=H15_ESCALATION,
            message_id=record["message_id"],
            severity=SEVERITY_WARN,
            explanation=f"refusal ({pattern!r}) does not refer the user to a person who can help",
            evidence_start=index,
            evidence_end=index + len(pattern),
        )
    ]


def _check_h16(record: dict, config: AuditCheckConfig) -> List[AuditFinding]:
    content_lower = record["content"].lower()
    disclaimer = str(config.param("disclaimer", DEFAULT_DISCLAIMER)).lower()
    topic_keywords = config.param("topic_keywords", DEFAULT_TOPIC_KEYWORDS)
    findings = []
    for topic, keywords in topic_keywords.items():
        hit = _find_pattern(content_lower, list(keywords))
        if hit is None:
            continue
        if disclaimer and disclaimer in content_lower:
            continue
        keyword, index = hit
        findings.append(
            AuditFinding(
                check_id=H16_DISCLAIMER,
                message_id=record["message_id"],
                severity=SEVERITY_WARN,
                explanation=f"{topic} topic ({keyword!r}) discussed without the configured disclaimer",
                evidence_start=index,
                evidence_end=index + len(keyword),
            )
        )
        break  # one finding per message, whichever topic list hits first
    return findings


def _check_h17(
    record: dict,
    config: AuditCheckConfig,
    resolve_source: Callable[[dict], Optional[str]],
) -> List[AuditFinding]:
    content = record["content"]
    content_lower = content.lower()
    policy = _find_pattern(
        content_lower, config.param("policy_keywords", DEFAULT_POLICY_KEYWORDS)
    )
    if policy is None:
        return []
    attributions = record.get("attributions") or []
    if not attributions:
        return []
    n = int(config.param("ngram_size", 5))
    threshold = float(config.param("min_overlap", 0.3))
    source_parts = []
    for locator in attributions:
        source_text = resolve_source(locator)
        if source_text:
            source_parts.append(source_text)
    if not source_parts:
        return []
    overlap = ngram_overlap(content, "\n".join(source_parts), n)
    if overlap is None or overlap >= threshold:
        return []
    return [
        AuditFinding(
            check_id=H17_PARAPHRASE,
            message_id=record["message_id"],
            severity=SEVERITY_WARN,
            explanation=(
                f"policy answer shares only {overlap:.2f} of its word {n}-grams with its "
                f"sources (threshold {threshold})"
            ),
            evidence_start=0,
            evidence_end=len(content),
        )
    ]


def audit_transcript(
    records: Sequence[dict],
    configs: Optional[Dict[str, AuditCheckConfig]] = None,
    resolve_source: Optional[Callable[[dict], Optional[str]]] = None,
) -> List[AuditFinding]:
    """Run every enabled check over the service-agent messages.

    ``records`` is the exported transcript (one dict per message);
    ``resolve_source`` maps an attribution locator to its source text and
    is required whenever the paraphrase check is enabled. Deterministic:
    findings are ordered by (message index, check id).
    """
    configs = configs if configs is not None else default_audit_configs()
    for check_id in configs:
        if check_id not in CHECK_IDS:
            raise InvalidSpecError(f"unknown audit check: {check_id!r}")
    h17 = configs.get(H17_PARAPHRASE)
    if h17 is not None and h17.enabled and resolve_source is None:
        raise MissingAttributionsError(
            "paraphrase check needs attribution data (no source resolver given)"
        )

    findings: List[AuditFinding] = []
    for record in records:
        if record.get("author_kind", "agent") not in _AUDITED_KINDS:
            continue
        per_message: List[AuditFinding] = []
        for check_id in CHECK_IDS:
            config = configs.get(check_id)
            if config is None or not config.enabled:
                continue
            if check_id == H09_LENGTH:
                per_message.extend(_check_h09(record, config))
            elif check_id == H12_STEPS:
                per_message.extend(_check_h12(record, config))
            elif check_id == H13_CONSTRUCTIVE:
                per_message.extend(_check_h13(record, config))
            elif check_id == H15_ESCALATION:
                per_message.extend(_check_h15(record, config))
            elif check_id == H16_DISCLAIMER:
                per_message.extend(_check_h16(record, config))
            elif check_id == H17_PARAPHRASE:
                per_message.extend(_check_h17(record, config, resolve_source))
        per_message.sort(key=lambda f: f.check_id)
        findings.extend(per_message)
    return findings


def render_summary(findings: Sequence[AuditFinding]) -> str:
    if not findings:
        return "No findings."
    lines = [
        f"{f.check_id} [{f.severity}] message {f.message_id}: {f.explanation}"
        for f in findings
    ]
    return "\n".join(lines)
