import { describe, expect, it } from "vitest";

import { HumanPlayTransport, TransportError } from "../src/transport.js";

type Reply = { status?: number; body: string };

/** Stub fetch that replays canned replies and records every request. */
function stubFetch(replies: Record<string, Reply[]>) {
  const calls: { url: string; body?: string }[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, body: init?.body === undefined ? undefined : String(init.body) });
    const path = new URL(url).pathname + new URL(url).search;
    const queue = replies[path];
    if (!queue || queue.length === 0) throw new Error(`no canned reply for ${path}`);
    const reply = queue.shift() as Reply;
    return new Response(reply.body, { status: reply.status ?? 200 });
  }) as typeof fetch;
  return { fetchFn, calls };
}

describe("HumanPlayTransport", () => {
  it("creates a session and posts scripts with JSON bodies", async () => {
    const { fetchFn, calls } = stubFetch({
      "/api/session": [{ body: '{"session_id": "h-0001"}' }],
      "/api/session/h-0001/action": [{ body: '{"ok": true}' }],
    });
    const transport = new HumanPlayTransport("http://example.test/", { fetchFn });
    const sessionId = await transport.createSession(["tutorial"]);
    expect(sessionId).toBe("h-0001");
    await transport.sendScript(sessionId, "Go(3);");
    expect(JSON.parse(calls[0].body ?? "")).toEqual({ tasks: ["tutorial"] });
    expect(JSON.parse(calls[1].body ?? "")).toEqual({ raw_script_text: "Go(3);" });
  });

  it("walks the poll cursor and stops on the closed drain", async () => {
    const abort = '{"reason": "session complete", "seq": 2, "session_id": "h-0001", "type": "abort"}';
    const hello =
      '{"policy": {}, "seq": 0, "session_id": "h-0001", "suite_id": "human-play", "type": "hello", "wire_version": "wire-v1"}';
    const { fetchFn } = stubFetch({
      "/api/session/h-0001/messages?after=0&wait=1": [
        { body: `{"messages": [${hello}], "next": 1, "closed": false}` },
      ],
      "/api/session/h-0001/messages?after=1&wait=1": [
        { body: `{"messages": [${abort}], "next": 2, "closed": true}` },
      ],
      "/api/session/h-0001/messages?after=2&wait=1": [
        { body: '{"messages": [], "next": 2, "closed": true}' },
      ],
    });
    const transport = new HumanPlayTransport("http://example.test", {
      fetchFn,
      pollSeconds: 1,
    });
    const seen: string[] = [];
    for await (const message of transport.messages("h-0001")) {
      seen.push(message.type);
    }
    expect(seen).toEqual(["hello", "abort"]);
  });

  it("raises TransportError on HTTP errors and bad bodies", async () => {
    const { fetchFn } = stubFetch({
      "/api/session": [
        { status: 500, body: "boom" },
        { body: "not json" },
        { body: '{"nope": 1}' },
      ],
    });
    const transport = new HumanPlayTransport("http://example.test", { fetchFn });
    await expect(transport.createSession()).rejects.toThrow(TransportError);
    await expect(transport.createSession()).rejects.toThrow(/non-JSON/);
    await expect(transport.createSession()).rejects.toThrow(/session_id/);
  });
});
