// Submission lifecycle: a single in-flight request at a time.

export type UiState = "idle" | "busy" | "error" | "done";

const TRANSITIONS: Record<UiState, UiState[]> = {
  idle: ["busy", "error"],       // error: schema load can fail before any submit
  busy: ["done", "error"],
  done: ["busy"],
  error: ["busy"],
};

export class SubmissionState {
  state: UiState = "idle";

  canSubmit(): boolean {
    return this.state !== "busy";
  }

  to(next: UiState): void {
    if (!TRANSITIONS[this.state].includes(next)) {
      throw new Error(`invalid state transition ${this.state} -> ${next}`);
    }
    this.state = next;
  }
}
