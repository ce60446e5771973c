/**
 * HTTP long-poll transport to the harness human-play bridge.
 *
 * Endpoints (served by `scriptarena serve --human`):
 *   POST /api/session                          {"tasks": [...]} -> {"session_id"}
 *   GET  /api/session/<id>/messages?after=N&wait=S -> {"messages", "next", "closed"}
 *   POST /api/session/<id>/action              {"raw_script_text"} -> {"ok": true}
 */

import { WireMessage, parseMessage } from "./wire.js";

export class TransportError extends Error {}

export interface TransportOptions {
  /** Long-poll wait per request, seconds (server caps at 25). */
  pollSeconds?: number;
  /** Injectable for tests. */
  fetchFn?: typeof fetch;
}

export class HumanPlayTransport {
  private readonly base: string;
  private readonly pollSeconds: number;
  private readonly fetchFn: typeof fetch;

  constructor(baseUrl: string, options: TransportOptions = {}) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.pollSeconds = options.pollSeconds ?? 25;
    this.fetchFn = options.fetchFn ?? fetch;
  }

  private async json(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new TransportError(`request failed: ${String(err)}`);
    }
    const body = await response.text();
    if (!response.ok) {
      throw new TransportError(`${path} -> HTTP ${response.status}: ${body}`);
    }
    try {
      return JSON.parse(body);
    } catch {
      throw new TransportError(`${path} returned non-JSON body`);
    }
  }

  async createSession(tasks?: string[]): Promise<string> {
    const payload = tasks === undefined ? {} : { tasks };
    const data = (await this.json("/api/session", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    })) as { session_id?: unknown };
    if (typeof data.session_id !== "string") {
      throw new TransportError("no session_id in response");
    }
    return data.session_id;
  }

  async sendScript(sessionId: string, rawScriptText: string): Promise<void> {
    await this.json(`/api/session/${sessionId}/action`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ raw_script_text: rawScriptText }),
    });
  }

  /** Yield wire messages in order until the server closes the session. */
  async *messages(sessionId: string): AsyncGenerator<WireMessage> {
    let after = 0;
    for (;;) {
      const data = (await this.json(
        `/api/session/${sessionId}/messages?after=${after}&wait=${this.pollSeconds}`,
      )) as { messages?: unknown; next?: unknown; closed?: unknown };
      if (!Array.isArray(data.messages) || typeof data.next !== "number") {
        throw new TransportError("malformed poll response");
      }
      for (const raw of data.messages) {
        yield parseMessage(raw);
      }
      after = data.next;
      if (data.closed === true && data.messages.length === 0) return;
    }
  }
}
