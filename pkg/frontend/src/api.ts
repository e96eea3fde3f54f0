// Typed fetch client for the coforge HTTP+JSON service. Every method maps
// one-to-one onto a server route; the client never post-processes payloads
// beyond JSON decoding, so callers see exactly what the server said.

import type {
  Agent,
  AuditConfig,
  AuditFinding,
  Chunk,
  CompareReport,
  CreatorTurn,
  EditResult,
  ErrorBody,
  KnowledgeBaseSummary,
  Persona,
  RuleInfo,
  SearchResult,
  Session,
  SessionSummary,
  SyncedChunk,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export interface AgentCreateBody {
  name: string;
  definition: string;
  kind?: string;
  exemplars?: [string, string][];
  cooklist?: Record<string, string>;
  kb_id?: string | null;
  enabled_rules?: string[];
}

export interface AgentPatchBody {
  name?: string;
  definition?: string;
  kind?: string;
  exemplars?: [string, string][];
  cooklist?: Record<string, string>;
  kb_id?: string;
  enabled_rules?: string[];
  detach_kb?: boolean;
}

export interface SessionCreateBody {
  participants: string[];
  turn_policy?: string;
  max_turns?: number;
}

export interface PersonaCreateBody {
  name: string;
  profile?: string;
  tendency_clause?: string;
  strategy?: string;
}

export interface CompareBody {
  service_agent_id: string;
  arms: { persona_name: string | null }[];
  turns?: number;
  scripts?: string[][];
}

export interface BackgroundRun {
  started: boolean;
  session_id: string;
  status: string;
}

export class CoforgeClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    if (res.status === 204) {
      return undefined as T;
    }
    const payload = await res.json();
    if (!res.ok) {
      const err = payload as Partial<ErrorBody>;
      throw new ApiError(res.status, {
        code: err.code ?? "unknown",
        message: err.message ?? `request failed with status ${res.status}`,
        detail: err.detail ?? null,
      });
    }
    return payload as T;
  }

  // agents

  listAgents(): Promise<Agent[]> {
    return this.request("GET", "/agents");
  }

  createAgent(body: AgentCreateBody): Promise<Agent> {
    return this.request("POST", "/agents", body);
  }

  getAgent(agentId: string): Promise<Agent> {
    return this.request("GET", `/agents/${agentId}`);
  }

  updateAgent(agentId: string, patch: AgentPatchBody): Promise<Agent> {
    return this.request("PATCH", `/agents/${agentId}`, patch);
  }

  deleteAgent(agentId: string): Promise<void> {
    return this.request("DELETE", `/agents/${agentId}`);
  }

  listRules(): Promise<RuleInfo[]> {
    return this.request("GET", "/rules");
  }

  enableRule(agentId: string, ruleId: string): Promise<Agent> {
    return this.request("POST", `/agents/${agentId}/rules/${ruleId}/enable`);
  }

  disableRule(agentId: string, ruleId: string): Promise<Agent> {
    return this.request("POST", `/agents/${agentId}/rules/${ruleId}/disable`);
  }

  // knowledge

  createKb(name: string): Promise<KnowledgeBaseSummary> {
    return this.request("POST", "/kb", { name });
  }

  listKbs(): Promise<KnowledgeBaseSummary[]> {
    return this.request("GET", "/kb");
  }

  ingestDoc(kbId: string, title: string, text: string): Promise<{ doc_id: string; chunks_added: number }> {
    return this.request("POST", `/kb/${kbId}/docs`, { title, text });
  }

  listChunks(kbId: string): Promise<Chunk[]> {
    return this.request("GET", `/kb/${kbId}/chunks`);
  }

  search(kbId: string, query: string, k?: number): Promise<SearchResult[]> {
    return this.request("POST", `/kb/${kbId}/search`, { query, k: k ?? null });
  }

  syncMessage(kbId: string, messageId: string, boost?: number): Promise<SyncedChunk & { exchange: EditResult["exchange"] }> {
    return this.request("POST", `/kb/${kbId}/sync`, { message_id: messageId, boost: boost ?? null });
  }

  // sessions

  createSession(body: SessionCreateBody): Promise<Session> {
    return this.request("POST", "/sessions", body);
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("GET", "/sessions");
  }

  getSession(sessionId: string): Promise<Session> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  postTurn(sessionId: string, content: string, responderId?: string): Promise<CreatorTurn> {
    return this.request("POST", `/sessions/${sessionId}/turns`, {
      content,
      responder_id: responderId ?? null,
    });
  }

  advanceSession(sessionId: string): Promise<{ message: CreatorTurn["message"] }> {
    return this.request("POST", `/sessions/${sessionId}/turns`, {});
  }

  runSession(sessionId: string): Promise<Session> {
    return this.request("POST", `/sessions/${sessionId}/run`);
  }

  runSessionBackground(sessionId: string): Promise<BackgroundRun> {
    return this.request("POST", `/sessions/${sessionId}/run?background=true`);
  }

  stopSession(sessionId: string): Promise<Session> {
    return this.request("POST", `/sessions/${sessionId}/stop`);
  }

  exportSession(sessionId: string): Promise<string> {
    return this.request("GET", `/sessions/${sessionId}/export`);
  }

  editMessage(messageId: string, content: string, note?: string): Promise<EditResult> {
    return this.request("PATCH", `/messages/${messageId}`, { content, note: note ?? null });
  }

  // personas

  listPersonas(): Promise<Persona[]> {
    return this.request("GET", "/personas");
  }

  createPersona(body: PersonaCreateBody): Promise<Persona> {
    return this.request("POST", "/personas", body);
  }

  instantiatePersona(name: string): Promise<Agent> {
    return this.request("POST", `/personas/${encodeURIComponent(name)}/instantiate`);
  }

  compare(body: CompareBody): Promise<CompareReport> {
    return this.request("POST", "/compare", body);
  }

  // audit

  audit(sessionId: string, configs?: AuditConfig[]): Promise<{ findings: AuditFinding[] }> {
    return this.request("POST", "/audit", { session_id: sessionId, configs: configs ?? null });
  }

  auditConfigs(): Promise<AuditConfig[]> {
    return this.request("GET", "/audit/configs");
  }
}
