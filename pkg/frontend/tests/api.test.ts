import { describe, expect, test } from "vitest";

import { ApiError, CoforgeClient } from "../src/api.js";

interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
  contentType: string | null;
}

function stubClient(responses: { status: number; body?: unknown }[]) {
  const calls: RecordedCall[] = [];
  const queue = [...responses];
  const client = new CoforgeClient("", async (url, init) => {
    const headers = (init?.headers ?? {}) as Record<string, string>;
    calls.push({
      url,
      method: init?.method ?? "GET",
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
      contentType: headers["content-type"] ?? null,
    });
    const next = queue.shift() ?? { status: 200, body: {} };
    if (next.status === 204) {
      return new Response(null, { status: 204 });
    }
    return new Response(JSON.stringify(next.body), {
      status: next.status,
      headers: { "content-type": "application/json" },
    });
  });
  return { client, calls };
}

describe("request shaping", () => {
  test("createAgent posts JSON to /agents", async () => {
    const agent = { id: "a1", name: "x", kind: "service_agent", definition: "d", exemplars: [], cooklist: {}, kb_id: null, enabled_rules: [] };
    const { client, calls } = stubClient([{ status: 201, body: agent }]);

    const created = await client.createAgent({ name: "x", definition: "d" });

    expect(created).toEqual(agent);
    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("/agents");
    expect(calls[0].method).toBe("POST");
    expect(calls[0].contentType).toBe("application/json");
    expect(calls[0].body).toEqual({ name: "x", definition: "d" });
  });

  test("a base URL prefixes every path, with trailing slash tolerated", async () => {
    const urls: string[] = [];
    const prefixed = new CoforgeClient("http://127.0.0.1:9/", async (url) => {
      urls.push(url);
      return new Response("[]", { status: 200, headers: { "content-type": "application/json" } });
    });
    await prefixed.listAgents();
    expect(urls).toEqual(["http://127.0.0.1:9/agents"]);
  });

  test("GET requests carry no body", async () => {
    const { client, calls } = stubClient([{ status: 200, body: [] }]);
    await client.listRules();
    expect(calls[0].method).toBe("GET");
    expect(calls[0].body).toBeUndefined();
    expect(calls[0].contentType).toBeNull();
  });

  test("background run uses the query flag", async () => {
    const { client, calls } = stubClient([{ status: 200, body: { started: true, session_id: "s1", status: "open" } }]);
    const run = await client.runSessionBackground("s1");
    expect(run.started).toBe(true);
    expect(calls[0].url).toBe("/sessions/s1/run?background=true");
  });

  test("persona names are URL-encoded when instantiated", async () => {
    const { client, calls } = stubClient([{ status: 201, body: {} }]);
    await client.instantiatePersona("Curious child");
    expect(calls[0].url).toBe("/personas/Curious%20child/instantiate");
  });

  test("search defaults k to null rather than omitting it", async () => {
    const { client, calls } = stubClient([{ status: 200, body: [] }]);
    await client.search("kb1", "hours");
    expect(calls[0].body).toEqual({ query: "hours", k: null });
  });
});

describe("response handling", () => {
  test("204 resolves to undefined", async () => {
    const { client } = stubClient([{ status: 204 }]);
    await expect(client.deleteAgent("a1")).resolves.toBeUndefined();
  });

  test("error bodies become ApiError with code, status and detail", async () => {
    const { client } = stubClient([
      { status: 404, body: { code: "not-found", message: "no agent with id ghost", detail: { id: "ghost" } } },
    ]);
    const err = await client.getAgent("ghost").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(404);
    expect(apiErr.code).toBe("not-found");
    expect(apiErr.message).toBe("no agent with id ghost");
    expect(apiErr.detail).toEqual({ id: "ghost" });
  });

  test("a malformed error body still raises a usable ApiError", async () => {
    const { client } = stubClient([{ status: 500, body: { oops: true } }]);
    const err = (await client.listAgents().catch((e: unknown) => e)) as ApiError;
    expect(err.code).toBe("unknown");
    expect(err.status).toBe(500);
  });
});
