/**
 * Input handling: the script box and the quick-keys mode.
 *
 * Quick-keys compose a pending script from fixed, always-valid commands;
 * the script box lets the player type anything (the harness parses it and
 * answers bad scripts with parse feedback, so no client-side grammar).
 */

export type InputMode = "script" | "keys";

export const QUICK_KEYS: Record<string, string> = {
  ArrowUp: "Go(3);",
  KeyW: "Go(3);",
  ArrowDown: "Go(-3);",
  KeyS: "Go(-3);",
  ArrowLeft: "Turn(-30);",
  KeyA: "Turn(-30);",
  ArrowRight: "Turn(30);",
  KeyD: "Turn(30);",
};

/** Command text for a KeyboardEvent.code, or null when the key is unmapped. */
export function commandForKey(code: string): string | null {
  return QUICK_KEYS[code] ?? null;
}

/** Accumulates quick-key commands into one pending script. */
export class ScriptComposer {
  private parts: string[] = [];

  press(code: string): boolean {
    const command = commandForKey(code);
    if (command === null) return false;
    this.parts.push(command);
    return true;
  }

  undo(): void {
    this.parts.pop();
  }

  clear(): void {
    this.parts = [];
  }

  get empty(): boolean {
    return this.parts.length === 0;
  }

  /** The pending script, e.g. three forward presses -> "Go(3);Go(3);Go(3);". */
  text(): string {
    return this.parts.join("");
  }
}
