import { describe, expect, test } from "vitest";

import {
  beginEdit,
  cancelEdit,
  editSaved,
  enabledRulesFor,
  initialState,
  removeAgent,
  selectAgent,
  setActiveSession,
  setAgents,
  setEditDraft,
  upsertAgent,
} from "../src/state.js";
import type { Agent, ChatMessage } from "../src/types.js";

function makeAgent(id: string, rules: string[] = []): Agent {
  return {
    id,
    name: `agent ${id}`,
    kind: "service_agent",
    definition: "You help.",
    exemplars: [],
    cooklist: {},
    kb_id: null,
    enabled_rules: rules,
  };
}

function makeMessage(id: string): ChatMessage {
  return {
    message_id: id,
    author_id: "a1",
    content: "hello",
    attributions: [],
    edited: true,
    edit_history: ["hi"],
    created_at: 0,
  };
}

describe("agent list", () => {
  test("upsert adds a new agent without losing the rest", () => {
    let state = initialState();
    state = upsertAgent(state, makeAgent("a1"));
    state = upsertAgent(state, makeAgent("a2"));
    expect(state.agents.map((a) => a.id)).toEqual(["a1", "a2"]);
  });

  test("upsert replaces an agent in place", () => {
    let state = upsertAgent(initialState(), makeAgent("a1"));
    const renamed = { ...makeAgent("a1"), name: "renamed" };
    state = upsertAgent(state, renamed);
    expect(state.agents).toHaveLength(1);
    expect(state.agents[0].name).toBe("renamed");
  });

  test("removeAgent clears selection and the toggle entry", () => {
    let state = upsertAgent(initialState(), makeAgent("a1", ["step_by_step"]));
    state = selectAgent(state, "a1");
    state = removeAgent(state, "a1");
    expect(state.agents).toEqual([]);
    expect(state.selectedAgentId).toBeNull();
    expect(state.ruleToggles["a1"]).toBeUndefined();
  });

  test("selecting a different agent resets session and edit buffer", () => {
    let state = upsertAgent(initialState(), makeAgent("a1"));
    state = upsertAgent(state, makeAgent("a2"));
    state = selectAgent(state, "a1");
    state = setActiveSession(state, "s1");
    state = beginEdit(state, "m1", "text");
    state = selectAgent(state, "a2");
    expect(state.activeSessionId).toBeNull();
    expect(state.pendingEdit).toBeNull();
  });

  test("selecting the already-selected agent is a no-op", () => {
    let state = upsertAgent(initialState(), makeAgent("a1"));
    state = selectAgent(state, "a1");
    const again = selectAgent(state, "a1");
    expect(again).toBe(state);
  });
});

describe("rule toggle map", () => {
  test("mirrors the server payload on every upsert", () => {
    let state = upsertAgent(initialState(), makeAgent("a1", ["step_by_step"]));
    expect(enabledRulesFor(state, "a1")).toEqual(["step_by_step"]);

    // server says the rule is now off; local map follows, never flips itself
    state = upsertAgent(state, makeAgent("a1", []));
    expect(enabledRulesFor(state, "a1")).toEqual([]);
  });

  test("setAgents rebuilds the whole map from scratch", () => {
    let state = upsertAgent(initialState(), makeAgent("gone", ["step_by_step"]));
    state = setAgents(state, [makeAgent("a1", ["step_by_step"]), makeAgent("a2")]);
    expect(enabledRulesFor(state, "a1")).toEqual(["step_by_step"]);
    expect(enabledRulesFor(state, "a2")).toEqual([]);
    expect(state.ruleToggles["gone"]).toBeUndefined();
  });

  test("unknown agent reads as no rules", () => {
    expect(enabledRulesFor(initialState(), "nobody")).toEqual([]);
  });
});

describe("pending edit buffer", () => {
  test("begin, retype, then a successful save clears the buffer", () => {
    let state = beginEdit(initialState(), "m1", "original");
    expect(state.pendingEdit).toEqual({ messageId: "m1", draft: "original" });

    state = setEditDraft(state, "fixed wording");
    expect(state.pendingEdit?.draft).toBe("fixed wording");

    state = editSaved(state, makeMessage("m1"));
    expect(state.pendingEdit).toBeNull();
  });

  test("cancel clears the buffer without saving", () => {
    let state = beginEdit(initialState(), "m1", "original");
    state = cancelEdit(state);
    expect(state.pendingEdit).toBeNull();
  });

  test("typing with no edit in progress changes nothing", () => {
    const state = initialState();
    expect(setEditDraft(state, "stray")).toBe(state);
  });
});
