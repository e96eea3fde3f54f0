"""Toggleable response rules.

A rule is regex-and-state post-processing registered in code and switched
on per agent by the creator. Rules hook the answer pipeline at three
points: before the prompt is sent, after the raw response arrives, and
when the user's next message should advance rule-held state instead of
reaching the model.

The built-in step-by-step rule turns a procedure-shaped answer into a
one-step-at-a-time walkthrough: it captures ``STEP n: ...`` lines, serves
the first step, and serves the next one each time the user replies
"done".
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .agents import AgentSpec
from .errors import InvalidSpecError, UnknownRuleError
from .providers import ChatTurn

HOOK_PRE_PROMPT = "pre_prompt"
HOOK_POST_RESPONSE = "post_response"
HOOK_TURN_ADVANCE = "turn_advance"
HOOKS = (HOOK_PRE_PROMPT, HOOK_POST_RESPONSE, HOOK_TURN_ADVANCE)

STEP_RULE_ID = "step_by_step"
STEP_LINE_RE = re.compile(r"^STEP\s+(\d+)\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)
STEP_PROMPT_INSTRUCTION = (
    "When the answer is a procedure, format it as lines 'STEP n: instruction', "
    "one per line, nothing else between steps."
)
STEP_REPLY_SUFFIX = "\n(Reply 'done' for the next step.)"
STEP_DONE_SENTINEL = "done"
STEPS_COMPLETED_REPLY = "All steps completed."


@dataclass(frozen=True)
class RuleDescriptor:
    """What a rule is called and where it hooks in."""

    rule_id: str
    display_name: str
    description: str
    hooks: Tuple[str, ...]

    def __post_init__(self):
        if not self.rule_id:
            raise InvalidSpecError("rule_id must be non-empty")
        if not self.hooks:
            raise InvalidSpecError("a rule must declare at least one hook")
        for hook in self.hooks:
            if hook not in HOOKS:
                raise InvalidSpecError(f"unknown hook: {hook!r}")


class RuleStateStore:
    """Per-(session, rule) state payloads; survives project save/load."""

    def __init__(self):
        self._states: Dict[Tuple[str, str], dict] = {}
        self._lock = threading.RLock()

    def get(self, session_id: str, rule_id: str) -> Optional[dict]:
        with self._lock:
            return self._states.get((session_id, rule_id))

    def set(self, session_id: str, rule_id: str, payload: dict) -> None:
        with self._lock:
            self._states[(session_id, rule_id)] = payload

    def delete(self, session_id: str, rule_id: str) -> None:
        with self._lock:
            self._states.pop((session_id, rule_id), None)

    def items(self) -> List[Tuple[str, str, dict]]:
        with self._lock:
            return [(s, r, dict(p)) for (s, r), p in self._states.items()]

    def load(self, entries: Iterable[Tuple[str, str, dict]]) -> None:
        with self._lock:
            self._states = {(s, r): dict(p) for s, r, p in entries}


@dataclass
class RuleContext:
    """What a hook gets to see: the session, the agent, and rule state."""

    session_id: str
    agent: AgentSpec
    states: RuleStateStore


def parse_steps(text: str) -> List[str]:
    """Extract step instructions from ``STEP n: ...`` lines.

    Steps come back ordered by their captured number; duplicate numbers
    keep line order. Text without step lines parses to an empty list.
    """
    matches = [(int(m.group(1)), m.group(2)) for m in STEP_LINE_RE.finditer(text)]
    matches.sort(key=lambda pair: pair[0])
    return [instruction for _, instruction in matches]


def advance_step(payload: dict) -> Tuple[Optional[str], Optional[dict]]:
    """Serve the current step and move the cursor.

    Returns ``(step_text, next_payload)``; at the end of the procedure it
    returns ``(None, None)``, signalling completion and state deletion.
    """
    steps = payload["steps"]
    cursor = payload["cursor"]
    if cursor >= len(steps):
        return None, None
    return steps[cursor], {"steps": steps, "cursor": cursor + 1}


class StepByStepRule:
    """Reference rule: serve procedure steps one at a time."""

    def pre_prompt(self, turns: List[ChatTurn], ctx: RuleContext) -> List[ChatTurn]:
        if ctx.states.get(ctx.session_id, STEP_RULE_ID) is not None:
            return turns
        return list(turns) + [ChatTurn("system", STEP_PROMPT_INSTRUCTION)]

    def post_response(self, text: str, ctx: RuleContext) -> str:
        # an already-active procedure means this response answered a side
        # question; leave it alone and keep the cursor where it was
        if ctx.states.get(ctx.session_id, STEP_RULE_ID) is not None:
            return text
        steps = parse_steps(text)
        if not steps:
            return text
        first, payload = advance_step({"steps": steps, "cursor": 0})
        ctx.states.set(ctx.session_id, STEP_RULE_ID, payload)
        return first + STEP_REPLY_SUFFIX

    def turn_advance(self, user_text: str, ctx: RuleContext) -> Optional[str]:
        payload = ctx.states.get(ctx.session_id, STEP_RULE_ID)
        if payload is None:
            return None
        if user_text.strip().lower() != STEP_DONE_SENTINEL:
            return None
        step, next_payload = advance_step(payload)
        if step is None:
            ctx.states.delete(ctx.session_id, STEP_RULE_ID)
            return STEPS_COMPLETED_REPLY
        ctx.states.set(ctx.session_id, STEP_RULE_ID, next_payload)
        return step + STEP_REPLY_SUFFIX


class RuleRegistry:
    """Registration-ordered rule catalog plus the hook pipelines.

    Hooks run for the rules an agent has enabled, in registration order.
    With nothing enabled each pipeline is the identity.
    """

    def __init__(self):
        self._rules: Dict[str, Tuple[RuleDescriptor, object]] = {}
        self._lock = threading.RLock()

    def register(self, descriptor: RuleDescriptor, impl: object) -> None:
        with self._lock:
            if descriptor.rule_id in self._rules:
                raise InvalidSpecError(f"rule already registered: {descriptor.rule_id}")
            for hook in descriptor.hooks:
                if not callable(getattr(impl, hook, None)):
                    raise InvalidSpecError(
                        f"rule {descriptor.rule_id} declares hook {hook} but does not implement it"
                    )
            self._rules[descriptor.rule_id] = (descriptor, impl)

    def descriptors(self) -> List[RuleDescriptor]:
        with self._lock:
            return [descriptor for descriptor, _ in self._rules.values()]

    def get(self, rule_id: str) -> RuleDescriptor:
        with self._lock:
            entry = self._rules.get(rule_id)
        if entry is None:
            raise UnknownRuleError(f"no rule with id {rule_id}")
        return entry[0]

    def __contains__(self, rule_id: str) -> bool:
        with self._lock:
            return rule_id in self._rules

    def _enabled(self, agent: AgentSpec) -> List[Tuple[RuleDescriptor, object]]:
        enabled = set(agent.enabled_rules)
        with self._lock:
            return [(d, impl) for d, impl in self._rules.values() if d.rule_id in enabled]

    def apply_pre_prompt(
        self, agent: AgentSpec, turns: List[ChatTurn], ctx: RuleContext
    ) -> List[ChatTurn]:
        for descriptor, impl in self._enabled(agent):
            if HOOK_PRE_PROMPT in descriptor.hooks:
                turns = impl.pre_prompt(turns, ctx)
        return turns

    def apply_post_response(self, agent: AgentSpec, text: str, ctx: RuleContext) -> str:
        for descriptor, impl in self._enabled(agent):
            if HOOK_POST_RESPONSE in descriptor.hooks:
                text = impl.post_response(text, ctx)
        return text

    def apply_turn_advance(
        self, agent: AgentSpec, user_text: str, ctx: RuleContext
    ) -> Optional[str]:
        for descriptor, impl in self._enabled(agent):
            if HOOK_TURN_ADVANCE in descriptor.hooks:
                reply = impl.turn_advance(user_text, ctx)
                if reply is not None:
                    return reply
        return None


def enable_rule(agent: AgentSpec, rule_id: str, registry: RuleRegistry) -> AgentSpec:
    if rule_id not in registry:
        raise UnknownRuleError(f"no rule with id {rule_id}")
    if rule_id not in agent.enabled_rules:
        agent.enabled_rules.append(rule_id)
    return agent


def disable_rule(agent: AgentSpec, rule_id: str, registry: RuleRegistry) -> AgentSpec:
    if rule_id not in registry:
        raise UnknownRuleError(f"no rule with id {rule_id}")
    if rule_id in agent.enabled_rules:
        agent.enabled_rules.remove(rule_id)
    return agent


def default_rule_registry() -> RuleRegistry:
    registry = RuleRegistry()
    registry.register(
        RuleDescriptor(
            rule_id=STEP_RULE_ID,
            display_name="Step-by-step guidance",
            description=(
                "Ask the agent to format procedures as numbered STEP lines, then "
                "walk the user through them one step at a time; replying 'done' "
                "serves the next step."
            ),
            hooks=(HOOK_PRE_PROMPT, HOOK_POST_RESPONSE, HOOK_TURN_ADVANCE),
        ),
        StepByStepRule(),
    )
    return registry
