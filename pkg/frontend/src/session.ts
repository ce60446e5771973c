/**
 * Client-side play session state machine.
 *
 * Pure state: messages go in through handle(), the HUD reads the fields.
 * The invariant is one outstanding observation at a time; submitting the
 * response clears it and the next server message (feedback + fresh
 * observation, or an episode end) re-opens play.
 */

import {
  EpisodeEnd,
  Observation,
  ParseFeedback,
  SessionHello,
  WireMessage,
} from "./wire.js";

export class ProtocolError extends Error {}

export interface TrialResult {
  taskId: string;
  passed: boolean;
  finalReward: number;
  reason: string;
}

export type Phase = "connecting" | "deciding" | "waiting" | "done";

export class PlaySession {
  hello: SessionHello | null = null;
  observation: Observation | null = null;
  feedback: ParseFeedback | null = null;
  lastEnd: EpisodeEnd | null = null;
  abortReason: string | null = null;
  readonly results: TrialResult[] = [];
  private closed = false;

  get phase(): Phase {
    if (this.closed) return "done";
    if (this.observation !== null) return "deciding";
    return this.hello === null ? "connecting" : "waiting";
  }

  /** Input is open only while an observation awaits a response with budget left. */
  get canSubmit(): boolean {
    return (
      !this.closed && this.observation !== null && this.observation.scripts_remaining > 0
    );
  }

  get budgetExhausted(): boolean {
    return this.observation !== null && this.observation.scripts_remaining <= 0;
  }

  handle(message: WireMessage): void {
    switch (message.type) {
      case "hello":
        this.hello = message;
        return;
      case "observation":
        if (this.observation !== null) {
          throw new ProtocolError("second observation while one is outstanding");
        }
        this.observation = message;
        return;
      case "parse_feedback":
        this.feedback = message;
        return;
      case "episode_end":
        this.observation = null;
        this.feedback = null;
        this.lastEnd = message;
        this.results.push({
          taskId: message.task_id,
          passed: message.passed,
          finalReward: message.final_reward,
          reason: message.reason,
        });
        return;
      case "abort":
        this.abortReason = message.reason;
        this.closed = true;
        return;
      case "action":
        throw new ProtocolError("server echoed an action message");
    }
  }

  /** Close the outstanding observation; returns it for the transport to answer. */
  noteSubmitted(): Observation {
    if (!this.canSubmit || this.observation === null) {
      throw new ProtocolError("no observation awaiting a response");
    }
    const answered = this.observation;
    this.observation = null;
    this.feedback = null;
    return answered;
  }

  /** Stream ended without an abort message (connection loss). */
  markClosed(reason: string): void {
    if (!this.closed) {
      this.closed = true;
      this.abortReason = reason;
    }
  }
}
