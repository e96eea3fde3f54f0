// Client view state and the transitions the panels share. Two invariants
// hold everywhere: the pending edit buffer is cleared the moment a save
// succeeds, and the rule toggle map is overwritten from the agent payload
// after every mutation rather than flipped locally.

import type { Agent, ChatMessage } from "./types.js";

export interface PendingEdit {
  messageId: string;
  draft: string;
}

export interface CompareSetup {
  serviceAgentId: string | null;
  armPersonas: (string | null)[];
  turns: number;
}

export interface ViewState {
  agents: Agent[];
  selectedAgentId: string | null;
  activeSessionId: string | null;
  pendingEdit: PendingEdit | null;
  ruleToggles: Record<string, string[]>;
  compareSetup: CompareSetup;
}

export function initialState(): ViewState {
  return {
    agents: [],
    selectedAgentId: null,
    activeSessionId: null,
    pendingEdit: null,
    ruleToggles: {},
    compareSetup: { serviceAgentId: null, armPersonas: [null], turns: 4 },
  };
}

function mirrorRules(toggles: Record<string, string[]>, agent: Agent): Record<string, string[]> {
  return { ...toggles, [agent.id]: [...agent.enabled_rules] };
}

/** Add or replace an agent from a server payload; the toggle map follows it. */
export function upsertAgent(state: ViewState, agent: Agent): ViewState {
  const existing = state.agents.findIndex((a) => a.id === agent.id);
  const agents =
    existing === -1
      ? [...state.agents, agent]
      : state.agents.map((a) => (a.id === agent.id ? agent : a));
  return { ...state, agents, ruleToggles: mirrorRules(state.ruleToggles, agent) };
}

export function setAgents(state: ViewState, agents: Agent[]): ViewState {
  let toggles: Record<string, string[]> = {};
  for (const agent of agents) {
    toggles = mirrorRules(toggles, agent);
  }
  return { ...state, agents: [...agents], ruleToggles: toggles };
}

export function removeAgent(state: ViewState, agentId: string): ViewState {
  const toggles = { ...state.ruleToggles };
  delete toggles[agentId];
  return {
    ...state,
    agents: state.agents.filter((a) => a.id !== agentId),
    selectedAgentId: state.selectedAgentId === agentId ? null : state.selectedAgentId,
    activeSessionId: state.selectedAgentId === agentId ? null : state.activeSessionId,
    ruleToggles: toggles,
  };
}

export function selectAgent(state: ViewState, agentId: string | null): ViewState {
  if (agentId === state.selectedAgentId) {
    return state;
  }
  return { ...state, selectedAgentId: agentId, activeSessionId: null, pendingEdit: null };
}

export function setActiveSession(state: ViewState, sessionId: string | null): ViewState {
  return { ...state, activeSessionId: sessionId };
}

export function beginEdit(state: ViewState, messageId: string, currentContent: string): ViewState {
  return { ...state, pendingEdit: { messageId, draft: currentContent } };
}

export function setEditDraft(state: ViewState, draft: string): ViewState {
  if (state.pendingEdit === null) {
    return state;
  }
  return { ...state, pendingEdit: { ...state.pendingEdit, draft } };
}

export function cancelEdit(state: ViewState): ViewState {
  return { ...state, pendingEdit: null };
}

/** A PATCH succeeded: drop the buffer so a stale draft can never resurface. */
export function editSaved(state: ViewState, _saved: ChatMessage): ViewState {
  return { ...state, pendingEdit: null };
}

export function enabledRulesFor(state: ViewState, agentId: string): string[] {
  return state.ruleToggles[agentId] ?? [];
}

export function setCompareAgent(state: ViewState, agentId: string | null): ViewState {
  return { ...state, compareSetup: { ...state.compareSetup, serviceAgentId: agentId } };
}

export function setCompareArms(state: ViewState, armPersonas: (string | null)[]): ViewState {
  return { ...state, compareSetup: { ...state.compareSetup, armPersonas: [...armPersonas] } };
}

export function setCompareTurns(state: ViewState, turns: number): ViewState {
  return { ...state, compareSetup: { ...state.compareSetup, turns } };
}
