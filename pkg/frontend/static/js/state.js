// Submission lifecycle: a single in-flight request at a time.
const TRANSITIONS = {
    idle: ["busy", "error"], // error: schema load can fail before any submit
    busy: ["done", "error"],
    done: ["busy"],
    error: ["busy"],
};
export class SubmissionState {
    constructor() {
        this.state = "idle";
    }
    canSubmit() {
        return this.state !== "busy";
    }
    to(next) {
        if (!TRANSITIONS[this.state].includes(next)) {
            throw new Error(`invalid state transition ${this.state} -> ${next}`);
        }
        this.state = next;
    }
}
