// Application shell: fetch the schema, render the form, run submissions
// through the {idle, busy, error, done} state machine.

import { buildForm, FormController, UnknownControlTypeError } from "./form.js";
import { renderOutputs } from "./outputs.js";
import { SubmissionState } from "./state.js";
import type { DisplayItemWire, ErrorEnvelopeWire, SchemaWire } from "./types.js";

export interface AppHandles {
  state: SubmissionState;
  form: FormController | null;
  root: HTMLElement;
}

export async function bootApp(root: HTMLElement): Promise<AppHandles> {
  root.replaceChildren();
  const heading = document.createElement("h1");
  const description = document.createElement("p");
  description.className = "description";
  const errorPanel = document.createElement("div");
  errorPanel.className = "error-panel";
  errorPanel.hidden = true;
  const formMount = document.createElement("div");
  formMount.className = "form-mount";
  const outputsMount = document.createElement("div");
  outputsMount.className = "outputs";
  root.append(heading, description, errorPanel, formMount, outputsMount);

  const state = new SubmissionState();
  const handles: AppHandles = { state, form: null, root };

  const showError = (message: string) => {
    errorPanel.replaceChildren(document.createTextNode(message));
    errorPanel.hidden = false;
  };

  let schema: SchemaWire;
  try {
    const response = await fetch("/ui/schema");
    if (!response.ok) throw new Error(`schema endpoint answered ${response.status}`);
    schema = (await response.json()) as SchemaWire;
  } catch (err) {
    state.to("error");
    showError(`Could not load the app schema: ${err}`);
    const retry = document.createElement("button");
    retry.textContent = "Retry";
    retry.className = "retry";
    retry.addEventListener("click", () => void bootApp(root));
    errorPanel.appendChild(retry);
    return handles;
  }

  heading.textContent = schema.app_name;
  description.textContent = schema.description;
  document.title = schema.app_name;

  let form: FormController;
  try {
    form = buildForm(schema.inputs, formMount);
  } catch (err) {
    if (err instanceof UnknownControlTypeError) {
      state.to("error");
      showError(`This app's schema is not renderable: ${err.message}`);
      return handles;
    }
    throw err;
  }
  handles.form = form;

  form.element.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });

  async function submit(): Promise<void> {
    if (!state.canSubmit()) return;
    form.clearIssues();
    errorPanel.hidden = true;

    const { values, missing } = await form.readValues();
    if (missing.length) {
      form.markMissing(missing);
      return; // no network call for an incomplete form
    }

    state.to("busy");
    form.setBusy(true);
    try {
      const response = await fetch("/ui/submit", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(values),
      });
      if (response.ok) {
        const body = (await response.json()) as { outputs: DisplayItemWire[] };
        renderOutputs(body.outputs, outputsMount);
        state.to("done");
        return;
      }
      const envelope = (await response.json()) as ErrorEnvelopeWire;
      state.to("error");
      if (response.status === 422 && envelope.error.detail?.issues) {
        const leftovers = form.showIssues(envelope.error.detail.issues);
        if (leftovers.length) {
          showError(leftovers.map((issue) => issue.message).join("; "));
        }
      } else {
        showError(`${envelope.error.code}: ${envelope.error.message}`);
      }
    } catch (err) {
      state.to("error");
      showError(`Request failed: ${err}`);
    } finally {
      form.setBusy(false);
    }
  }

  return handles;
}
