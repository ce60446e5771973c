/**
 * HUD rendering: one render() pass paints the whole screen from session state.
 *
 * The frame is shown at native resolution (the harness renders 512x512).
 * Blackout frames arrive as ordinary all-black images, so the counters keep
 * updating around them. Corrupt image payloads raise a banner instead of
 * crashing the loop.
 */

import { ScriptComposer } from "./controls.js";
import { PlaySession } from "./session.js";

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

export function healthPercent(health: number): number {
  return Math.min(100, Math.max(0, health));
}

export function imageDataUri(b64: string): string {
  return `data:image/png;base64,${b64}`;
}

/** Cheap pre-decode check: valid base64 starting with the PNG signature. */
export function pngBytesLookValid(b64: string): boolean {
  let bytes: string;
  try {
    bytes = atob(b64);
  } catch {
    return false;
  }
  if (bytes.length < PNG_SIGNATURE.length) return false;
  return PNG_SIGNATURE.every((value, i) => bytes.charCodeAt(i) === value);
}

export function formatReward(reward: number): string {
  return (reward >= 0 ? "+" : "") + reward.toFixed(4);
}

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (el === null) throw new Error(`missing #${id} in the page`);
  return el as T;
}

export class Hud {
  private readonly frame: HTMLImageElement;
  private readonly banner: HTMLElement;
  private readonly healthFill: HTMLElement;
  private readonly healthLabel: HTMLElement;
  private readonly statTask: HTMLElement;
  private readonly statStep: HTMLElement;
  private readonly statReward: HTMLElement;
  private readonly statScripts: HTMLElement;
  private readonly feedback: HTMLElement;
  private readonly status: HTMLElement;
  private readonly input: HTMLTextAreaElement;
  private readonly send: HTMLButtonElement;
  private readonly pending: HTMLElement;
  private readonly endScreen: HTMLElement;
  private readonly endTitle: HTMLElement;
  private readonly resultList: HTMLElement;

  constructor(private readonly doc: Document) {
    this.frame = byId(doc, "frame");
    this.banner = byId(doc, "banner");
    this.healthFill = byId(doc, "health-fill");
    this.healthLabel = byId(doc, "health-label");
    this.statTask = byId(doc, "stat-task");
    this.statStep = byId(doc, "stat-step");
    this.statReward = byId(doc, "stat-reward");
    this.statScripts = byId(doc, "stat-scripts");
    this.feedback = byId(doc, "feedback");
    this.status = byId(doc, "status");
    this.input = byId(doc, "script-input");
    this.send = byId(doc, "send");
    this.pending = byId(doc, "pending");
    this.endScreen = byId(doc, "end-screen");
    this.endTitle = byId(doc, "end-title");
    this.resultList = byId(doc, "results");
  }

  render(session: PlaySession, composer: ScriptComposer): void {
    const obs = session.observation;

    if (obs !== null) {
      if (pngBytesLookValid(obs.image_b64)) {
        this.frame.src = imageDataUri(obs.image_b64);
        this.banner.hidden = true;
      } else {
        this.banner.textContent = "image payload did not decode; frame skipped";
        this.banner.hidden = false;
      }
      const pct = healthPercent(obs.health);
      this.healthFill.style.width = `${pct}%`;
      this.healthLabel.textContent = obs.health.toFixed(1);
      this.statTask.textContent = obs.task_id;
      this.statStep.textContent = String(obs.step);
      this.statReward.textContent = formatReward(obs.cumulative_reward);
      this.statScripts.textContent = String(obs.scripts_remaining);
    }

    this.feedback.hidden = session.feedback === null;
    if (session.feedback !== null) {
      const fb = session.feedback;
      this.feedback.textContent =
        `script rejected (${fb.error_kind}): ${fb.error_message} - try again`;
    }

    const open = session.canSubmit;
    this.input.disabled = !open;
    this.send.disabled = !open;
    this.pending.textContent = composer.empty ? "" : composer.text();

    switch (session.phase) {
      case "connecting":
        this.status.textContent = "connecting...";
        break;
      case "waiting":
        this.status.textContent = "waiting for the arena...";
        break;
      case "deciding":
        this.status.textContent = session.budgetExhausted
          ? "script budget exhausted"
          : "your move";
        break;
      case "done":
        this.status.textContent = `session over: ${session.abortReason ?? "closed"}`;
        break;
    }

    const showEnd =
      session.phase === "done" ||
      session.budgetExhausted ||
      (session.lastEnd !== null && obs === null);
    this.endScreen.hidden = !showEnd;
    if (showEnd) {
      if (session.lastEnd !== null) {
        const end = session.lastEnd;
        this.endTitle.textContent = end.passed
          ? `Passed ${end.task_id} (${formatReward(end.final_reward)})`
          : `Failed ${end.task_id} (${end.reason})`;
      } else {
        this.endTitle.textContent = "script budget exhausted";
      }
      this.resultList.textContent = "";
      for (const result of session.results) {
        const item = this.doc.createElement("li");
        item.textContent =
          `${result.taskId}: ${result.passed ? "passed" : "failed"}` +
          ` (${formatReward(result.finalReward)}, ${result.reason})`;
        this.resultList.appendChild(item);
      }
    }
  }
}
