// Resolves a message's attribution locators against the knowledge base's
// chunk listing. The span shown in a source row is the chunk text exactly
// as the server returned it; the UI never re-slices documents itself.

import type { ChatMessage, Chunk, Locator } from "./types.js";

export interface SourceRow {
  locator: Locator;
  title: string;
  page: number | null;
  line: number;
  span: string | null;
  curated: boolean;
  resolved: boolean;
}

export function locatorKey(locator: Locator): string {
  return `${locator.doc_id}:${locator.start_char}-${locator.end_char}`;
}

export function chunkIndex(chunks: Chunk[]): Map<string, Chunk> {
  const index = new Map<string, Chunk>();
  for (const chunk of chunks) {
    index.set(locatorKey(chunk.locator), chunk);
  }
  return index;
}

export function sourceRows(message: ChatMessage, chunks: Chunk[]): SourceRow[] {
  const index = chunkIndex(chunks);
  return message.attributions.map((locator) => {
    const chunk = index.get(locatorKey(locator));
    return {
      locator,
      title: locator.doc_title,
      page: locator.page,
      line: locator.start_line,
      span: chunk ? chunk.text : null,
      curated: chunk ? chunk.provenance === "curated" : false,
      resolved: chunk !== undefined,
    };
  });
}

/** Human-readable pointer, e.g. "Library hours (p.2, line 14)". */
export function locatorLabel(locator: Locator): string {
  const where =
    locator.page === null
      ? `line ${locator.start_line}`
      : `p.${locator.page}, line ${locator.start_line}`;
  return `${locator.doc_title} (${where})`;
}
