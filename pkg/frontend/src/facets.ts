// The agent builder renders one fixed input per design facet, so the form
// can never send a key the server would reject.

export const FACET_KEYS = [
  "size",
  "deployment",
  "role",
  "functionality",
  "dialogue",
  "engagement",
  "escalation",
  "humanness",
  "maintenance",
  "evaluation",
] as const;

export type FacetKey = (typeof FACET_KEYS)[number];

export const FACET_LABELS: Record<FacetKey, string> = {
  size: "Size",
  deployment: "Deployment",
  role: "Role",
  functionality: "Functionality",
  dialogue: "Dialogue style",
  engagement: "Engagement",
  escalation: "Escalation",
  humanness: "Humanness",
  maintenance: "Maintenance",
  evaluation: "Evaluation",
};

export const FACET_HINTS: Record<FacetKey, string> = {
  size: "How many people and questions should it handle?",
  deployment: "Where will it run (kiosk, website, phone line)?",
  role: "What job does it hold at the service point?",
  functionality: "What should it do, and what is out of bounds?",
  dialogue: "Tone and length of its replies.",
  engagement: "Does it wait to be asked or offer help first?",
  escalation: "When does it hand off to a person?",
  humanness: "Should it present as a person or a machine?",
  maintenance: "Who keeps its knowledge current?",
  evaluation: "How will you know it is doing a good job?",
};

export function isFacetKey(key: string): key is FacetKey {
  return (FACET_KEYS as readonly string[]).includes(key);
}

/** Collect non-blank facet inputs into the payload map, dropping unknown keys. */
export function buildCooklist(entries: Record<string, string>): Record<string, string> {
  const out: Record<string, string> = {};
  for (const key of FACET_KEYS) {
    const value = entries[key];
    if (value !== undefined && value.trim() !== "") {
      out[key] = value.trim();
    }
  }
  return out;
}

export interface AgentForm {
  name: string;
  definition: string;
  exemplars: [string, string][];
}

/** Problems that keep the form from being submitted; empty means submittable. */
export function formProblems(form: AgentForm): string[] {
  const problems: string[] = [];
  if (form.name.trim() === "") {
    problems.push("name is required");
  }
  if (form.definition.trim() === "") {
    problems.push("definition is required");
  }
  form.exemplars.forEach(([question, answer], i) => {
    if (question.trim() === "" || answer.trim() === "") {
      problems.push(`exemplar ${i + 1} needs both a question and an answer`);
    }
  });
  return problems;
}

export function canSubmit(form: AgentForm): boolean {
  return formProblems(form).length === 0;
}
