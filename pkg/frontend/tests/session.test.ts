import { describe, expect, it } from "vitest";

import { PlaySession, ProtocolError } from "../src/session.js";
import type { Observation, WireMessage } from "../src/wire.js";

function hello(): WireMessage {
  return {
    type: "hello",
    session_id: "h-0001",
    seq: 0,
    suite_id: "human-play",
    wire_version: "wire-v1",
    policy: { max_scripts_per_episode: 30 },
  };
}

function observation(seq: number, remaining = 30): Observation {
  return {
    type: "observation",
    session_id: "h-0001",
    seq,
    task_id: "tutorial",
    step: 0,
    health: 100.0,
    cumulative_reward: 0.0,
    scripts_remaining: remaining,
    image_b64: "iVBORw0",
    text_prompt: "",
    extra_images_b64: [],
  };
}

describe("PlaySession", () => {
  it("walks connecting -> waiting -> deciding -> waiting", () => {
    const s = new PlaySession();
    expect(s.phase).toBe("connecting");
    s.handle(hello());
    expect(s.phase).toBe("waiting");
    s.handle(observation(1));
    expect(s.phase).toBe("deciding");
    expect(s.canSubmit).toBe(true);
    const answered = s.noteSubmitted();
    expect(answered.seq).toBe(1);
    expect(s.phase).toBe("waiting");
    expect(s.canSubmit).toBe(false);
  });

  it("rejects a second outstanding observation", () => {
    const s = new PlaySession();
    s.handle(hello());
    s.handle(observation(1));
    expect(() => s.handle(observation(2))).toThrow(ProtocolError);
  });

  it("rejects submitting with nothing outstanding", () => {
    const s = new PlaySession();
    s.handle(hello());
    expect(() => s.noteSubmitted()).toThrow(ProtocolError);
  });

  it("locks input once the script budget is spent", () => {
    const s = new PlaySession();
    s.handle(hello());
    s.handle(observation(1, 0));
    expect(s.canSubmit).toBe(false);
    expect(s.budgetExhausted).toBe(true);
    expect(() => s.noteSubmitted()).toThrow(ProtocolError);
  });

  it("keeps parse feedback until the next submission", () => {
    const s = new PlaySession();
    s.handle(hello());
    s.handle(observation(1));
    s.noteSubmitted();
    s.handle({
      type: "parse_feedback",
      session_id: "h-0001",
      seq: 2,
      error_kind: "MissingSemicolon",
      error_message: "Go command must end with ';'",
      retry_index: 1,
    });
    s.handle(observation(3, 29));
    expect(s.feedback?.error_kind).toBe("MissingSemicolon");
    s.noteSubmitted();
    expect(s.feedback).toBeNull();
  });

  it("records episode ends and reopens for the next task", () => {
    const s = new PlaySession();
    s.handle(hello());
    s.handle(observation(1));
    s.noteSubmitted();
    s.handle({
      type: "episode_end",
      session_id: "h-0001",
      seq: 2,
      task_id: "tutorial",
      passed: true,
      final_reward: 1.4665,
      reason: "GoalReached",
    });
    expect(s.results).toEqual([
      { taskId: "tutorial", passed: true, finalReward: 1.4665, reason: "GoalReached" },
    ]);
    expect(s.observation).toBeNull();
    expect(s.phase).toBe("waiting");
    s.handle(observation(3));
    expect(s.phase).toBe("deciding");
  });

  it("treats an abort as the end of the session", () => {
    const s = new PlaySession();
    s.handle(hello());
    s.handle({ type: "abort", session_id: "h-0001", seq: 1, reason: "session complete" });
    expect(s.phase).toBe("done");
    expect(s.abortReason).toBe("session complete");
    expect(s.canSubmit).toBe(false);
  });

  it("flags a server-echoed action as a protocol error", () => {
    const s = new PlaySession();
    expect(() =>
      s.handle({ type: "action", session_id: "h-0001", seq: 1, raw_script_text: "Go(3);" }),
    ).toThrow(ProtocolError);
  });

  it("markClosed keeps the first reason", () => {
    const s = new PlaySession();
    s.markClosed("connection closed");
    s.markClosed("later");
    expect(s.abortReason).toBe("connection closed");
    expect(s.phase).toBe("done");
  });
});
