// Payload shapes as the service returns them. The UI renders these verbatim;
// nothing here is recomputed client-side.

export interface Locator {
  doc_id: string;
  doc_title: string;
  start_char: number;
  end_char: number;
  start_line: number;
  page: number | null;
}

export interface Agent {
  id: string;
  name: string;
  kind: string;
  definition: string;
  exemplars: [string, string][];
  cooklist: Record<string, string>;
  kb_id: string | null;
  enabled_rules: string[];
}

export interface KnowledgeBaseSummary {
  id: string;
  name: string;
  embedding_dimension: number;
  doc_count: number;
  chunk_count: number;
}

export interface Chunk {
  id: string;
  doc_id: string;
  ordinal: number;
  text: string;
  locator: Locator;
  provenance: string;
  priority_boost: number;
}

export interface SearchResult extends Omit<Chunk, "id"> {
  chunk_id: string;
  raw_cosine: number;
  effective_score: number;
}

export interface ChatMessage {
  message_id: string;
  author_id: string;
  content: string;
  attributions: Locator[];
  edited: boolean;
  edit_history: string[];
  created_at: number;
}

export interface Session {
  id: string;
  participants: string[];
  inactive_participants: string[];
  turn_policy: string;
  max_turns: number;
  status: "open" | "completed" | "stopped";
  transcript: ChatMessage[];
}

export interface SessionSummary {
  id: string;
  participants: string[];
  turn_policy: string;
  max_turns: number;
  status: string;
  message_count: number;
}

export interface CreatorTurn {
  creator_message: ChatMessage;
  message: ChatMessage;
}

export interface EditResult {
  message: ChatMessage;
  exchange: {
    question: string;
    corrected_answer: string;
    source_session: string;
    source_message: string;
    editor_note: string | null;
    created_at: number;
  };
}

export interface SyncedChunk {
  chunk_id: string;
  doc_id: string;
  text: string;
  provenance: string;
  priority_boost: number;
}

export interface Persona {
  name: string;
  profile: string;
  tendency_clause: string;
  strategy: "descriptive" | "chained" | "explicit";
}

export interface RuleInfo {
  rule_id: string;
  display_name: string;
  description: string;
  hooks: string[];
}

export interface ArmReport {
  label: string;
  persona_name: string | null;
  session_id: string;
  message_count: number;
  total_chars: number;
  mean_chars_per_message: number;
}

export interface CompareReport {
  arms: ArmReport[];
  longest_arm_index: number;
  total_chars_delta: number;
}

export interface AuditFinding {
  check_id: string;
  message_id: string;
  severity: string;
  explanation: string;
  evidence_start: number;
  evidence_end: number;
}

export interface AuditConfig {
  check_id: string;
  enabled: boolean;
  parameters: Record<string, unknown>;
}

export interface ErrorBody {
  code: string;
  message: string;
  detail: unknown;
}
