// Turns a comparison report into drawable bar rows. All figures come from
// the report verbatim; the only thing computed here is bar geometry, and
// the "longest" flag echoes the index the server chose.

import type { CompareReport } from "./types.js";

export interface BarRow {
  label: string;
  personaName: string | null;
  sessionId: string;
  messageCount: number;
  totalChars: number;
  meanChars: number;
  widthPct: number;
  longest: boolean;
}

export function armBars(report: CompareReport): BarRow[] {
  const maxChars = report.arms.reduce((acc, arm) => Math.max(acc, arm.total_chars), 0);
  return report.arms.map((arm, i) => ({
    label: arm.label,
    personaName: arm.persona_name,
    sessionId: arm.session_id,
    messageCount: arm.message_count,
    totalChars: arm.total_chars,
    meanChars: arm.mean_chars_per_message,
    widthPct: maxChars === 0 ? 0 : (arm.total_chars / maxChars) * 100,
    longest: i === report.longest_arm_index,
  }));
}
