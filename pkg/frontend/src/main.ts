/**
 * App wiring: one transport, one session, one HUD, DOM events.
 *
 * Kept separate from boot.js so tests can drive a full app instance against
 * a real harness without loading the page scaffolding.
 */

import { InputMode, ScriptComposer } from "./controls.js";
import { Hud } from "./hud.js";
import { PlaySession } from "./session.js";
import { HumanPlayTransport, TransportOptions } from "./transport.js";

export interface AppOptions {
  tasks?: string[];
  transport?: TransportOptions;
}

export class App {
  readonly session = new PlaySession();
  readonly composer = new ScriptComposer();
  mode: InputMode = "script";
  sessionId = "";

  private readonly hud: Hud;
  private readonly transport: HumanPlayTransport;
  private readonly input: HTMLTextAreaElement;
  private done: Promise<void> = Promise.resolve();

  constructor(
    private readonly doc: Document,
    baseUrl: string,
    private readonly options: AppOptions = {},
  ) {
    this.transport = new HumanPlayTransport(baseUrl, options.transport);
    this.hud = new Hud(doc);
    this.input = doc.getElementById("script-input") as HTMLTextAreaElement;
  }

  async start(): Promise<void> {
    this.sessionId = await this.transport.createSession(this.options.tasks);
    this.bindEvents();
    this.render();
    this.done = this.pump();
  }

  /** Resolves when the server closes the session (or the connection drops). */
  whenDone(): Promise<void> {
    return this.done;
  }

  render(): void {
    this.hud.render(this.session, this.composer);
  }

  async submit(): Promise<void> {
    if (!this.session.canSubmit) return;
    const text = this.mode === "keys" ? this.composer.text() : this.input.value;
    if (text.trim() === "") return;
    this.session.noteSubmitted();
    this.input.value = "";
    this.composer.clear();
    this.render();
    try {
      await this.transport.sendScript(this.sessionId, text);
    } catch (err) {
      this.session.markClosed(`send failed: ${String(err)}`);
      this.render();
    }
  }

  handleKey(code: string): void {
    if (this.mode !== "keys" || !this.session.canSubmit) return;
    if (code === "Enter") {
      void this.submit();
    } else if (code === "Backspace") {
      this.composer.undo();
    } else {
      this.composer.press(code);
    }
    this.render();
  }

  private bindEvents(): void {
    const send = this.doc.getElementById("send");
    send?.addEventListener("click", () => void this.submit());

    this.input.addEventListener("keydown", (event) => {
      const key = event as KeyboardEvent;
      if (key.code === "Enter" && (key.ctrlKey || key.metaKey)) {
        key.preventDefault();
        void this.submit();
      }
    });

    for (const value of ["script", "keys"] as const) {
      const radio = this.doc.getElementById(`mode-${value}`);
      radio?.addEventListener("change", () => {
        this.mode = value;
        this.composer.clear();
        this.render();
      });
    }

    this.doc.addEventListener("keydown", (event) => {
      const key = event as KeyboardEvent;
      if (this.mode === "keys" && this.doc.activeElement !== this.input) {
        this.handleKey(key.code);
      }
    });
  }

  private async pump(): Promise<void> {
    try {
      for await (const message of this.transport.messages(this.sessionId)) {
        this.session.handle(message);
        this.render();
      }
      this.session.markClosed("connection closed");
    } catch (err) {
      this.session.markClosed(String(err));
    }
    this.render();
  }
}
