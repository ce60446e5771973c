/**
 * Wire message types and runtime guards.
 *
 * Mirrors the harness wire schema (docs/wire-schema.json in the harness
 * repository): six message kinds, all fields required, no extras, one JSON
 * object per message. The guards are strict so a drifting server fails
 * loudly instead of rendering garbage.
 */

export const WIRE_VERSION = "wire-v1";

export interface SessionHello {
  type: "hello";
  session_id: string;
  seq: number;
  suite_id: string;
  wire_version: string;
  policy: Record<string, unknown>;
}

export interface Observation {
  type: "observation";
  session_id: string;
  seq: number;
  task_id: string;
  step: number;
  health: number;
  cumulative_reward: number;
  scripts_remaining: number;
  image_b64: string;
  text_prompt: string;
  extra_images_b64: string[];
}

export interface ActionOut {
  type: "action";
  session_id: string;
  seq: number;
  raw_script_text: string;
}

export interface ParseFeedback {
  type: "parse_feedback";
  session_id: string;
  seq: number;
  error_kind: string;
  error_message: string;
  retry_index: number;
}

export interface EpisodeEnd {
  type: "episode_end";
  session_id: string;
  seq: number;
  task_id: string;
  passed: boolean;
  final_reward: number;
  reason: string;
}

export interface AbortMsg {
  type: "abort";
  session_id: string;
  seq: number;
  reason: string;
}

export type WireMessage =
  | SessionHello
  | Observation
  | ActionOut
  | ParseFeedback
  | EpisodeEnd
  | AbortMsg;

export class WireError extends Error {}

type FieldKind = "string" | "number" | "integer" | "boolean" | "object" | "string[]";

const SHAPES: Record<WireMessage["type"], Record<string, FieldKind>> = {
  hello: {
    session_id: "string",
    seq: "integer",
    suite_id: "string",
    wire_version: "string",
    policy: "object",
  },
  observation: {
    session_id: "string",
    seq: "integer",
    task_id: "string",
    step: "integer",
    health: "number",
    cumulative_reward: "number",
    scripts_remaining: "integer",
    image_b64: "string",
    text_prompt: "string",
    extra_images_b64: "string[]",
  },
  action: { session_id: "string", seq: "integer", raw_script_text: "string" },
  parse_feedback: {
    session_id: "string",
    seq: "integer",
    error_kind: "string",
    error_message: "string",
    retry_index: "integer",
  },
  episode_end: {
    session_id: "string",
    seq: "integer",
    task_id: "string",
    passed: "boolean",
    final_reward: "number",
    reason: "string",
  },
  abort: { session_id: "string", seq: "integer", reason: "string" },
};

function checkField(value: unknown, kind: FieldKind): boolean {
  switch (kind) {
    case "string":
      return typeof value === "string";
    case "number":
      return typeof value === "number" && Number.isFinite(value);
    case "integer":
      return typeof value === "number" && Number.isInteger(value);
    case "boolean":
      return typeof value === "boolean";
    case "object":
      return typeof value === "object" && value !== null && !Array.isArray(value);
    case "string[]":
      return Array.isArray(value) && value.every((v) => typeof v === "string");
  }
}

/** Validate one decoded JSON value as a wire message, or throw WireError. */
export function parseMessage(value: unknown): WireMessage {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new WireError("message is not a JSON object");
  }
  const record = value as Record<string, unknown>;
  const type = record["type"];
  if (typeof type !== "string" || !(type in SHAPES)) {
    throw new WireError(`unknown message type: ${JSON.stringify(type)}`);
  }
  const shape = SHAPES[type as WireMessage["type"]];
  for (const [field, kind] of Object.entries(shape)) {
    if (!(field in record)) throw new WireError(`${type}: missing field ${field}`);
    if (!checkField(record[field], kind)) {
      throw new WireError(`${type}: field ${field} is not a ${kind}`);
    }
  }
  for (const field of Object.keys(record)) {
    if (field !== "type" && !(field in shape)) {
      throw new WireError(`${type}: unexpected field ${field}`);
    }
  }
  // transcripts mark timeouts as abort with seq -1; everything else counts up
  const seq = record["seq"] as number;
  if (seq < (type === "abort" ? -1 : 0)) {
    throw new WireError(`${type}: seq ${seq} out of range`);
  }
  return record as unknown as WireMessage;
}

/** Parse one ndjson line (used for transcript fixtures in tests). */
export function parseLine(line: string): WireMessage {
  let decoded: unknown;
  try {
    decoded = JSON.parse(line);
  } catch {
    throw new WireError("line is not valid JSON");
  }
  return parseMessage(decoded);
}
