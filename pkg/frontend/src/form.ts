// Schema-driven form renderer: one control per input field, in schema order.
// The frontend knows nothing about any particular app; everything it renders
// comes from the wire schema.

import { fileToBase64 } from "./base64.js";
import type { FieldWire, FileValue, IssueWire } from "./types.js";

export class UnknownControlTypeError extends Error {
  constructor(public readonly tag: string, public readonly field: string) {
    super(`field '${field}' has unknown control type '${tag}'`);
  }
}

export interface ReadResult {
  values: Record<string, unknown>;
  missing: string[];
}

export interface FormController {
  element: HTMLElement;
  submitButton: HTMLButtonElement;
  busyIndicator: HTMLElement;
  readValues(): Promise<ReadResult>;
  setFile(name: string, filename: string, contentBase64: string): void;
  markMissing(names: string[]): void;
  showIssues(issues: IssueWire[]): IssueWire[];
  clearIssues(): void;
  setBusy(busy: boolean): void;
}

const FILE_TYPES = new Set(["File", "ImageFile", "CSVFile", "TimeSeriesCSVFile"]);

function acceptFor(field: FieldWire): string {
  if (field.type === "ImageFile") return "image/png,.pgm";
  if (field.type === "CSVFile" || field.type === "TimeSeriesCSVFile") return ".csv";
  if (field.extensions && field.extensions.length) return field.extensions.join(",");
  return "";
}

export function buildForm(inputs: FieldWire[], mount: HTMLElement): FormController {
  for (const field of inputs) {
    if (field.type === "Plot" || !isKnownControl(field.type)) {
      throw new UnknownControlTypeError(field.type, field.name);
    }
  }

  const element = document.createElement("form");
  element.className = "schema-form";
  element.noValidate = true;

  const fileState = new Map<string, FileValue>();
  const pendingReads = new Map<string, Promise<void>>();

  for (const field of inputs) {
    element.appendChild(buildField(field, fileState, pendingReads));
  }

  const footer = document.createElement("div");
  footer.className = "form-footer";
  const submitButton = document.createElement("button");
  submitButton.type = "submit";
  submitButton.textContent = "Run";
  const busyIndicator = document.createElement("span");
  busyIndicator.className = "busy-indicator";
  busyIndicator.textContent = "working…";
  busyIndicator.hidden = true;
  footer.append(submitButton, busyIndicator);
  element.appendChild(footer);
  mount.appendChild(element);

  const fieldBox = (name: string) =>
    element.querySelector<HTMLElement>(`.field[data-field="${name}"]`);

  const setFieldError = (name: string, message: string) => {
    const box = fieldBox(name);
    if (!box) return false;
    box.classList.add("invalid");
    const slot = box.querySelector<HTMLElement>(".field-error")!;
    slot.textContent = message;
    slot.hidden = false;
    return true;
  };

  return {
    element,
    submitButton,
    busyIndicator,

    async readValues(): Promise<ReadResult> {
      await Promise.all(pendingReads.values());
      const values: Record<string, unknown> = {};
      const missing: string[] = [];
      for (const field of inputs) {
        const value = readField(field, element, fileState);
        if (value === undefined) {
          missing.push(field.name);
        } else {
          values[field.name] = value;
        }
      }
      return { values, missing };
    },

    setFile(name, filename, contentBase64) {
      fileState.set(name, { filename, content_base64: contentBase64 });
      const box = fieldBox(name);
      const note = box?.querySelector<HTMLElement>(".file-name");
      if (note) note.textContent = filename;
    },

    markMissing(names) {
      for (const name of names) setFieldError(name, "required");
    },

    showIssues(issues) {
      const leftovers: IssueWire[] = [];
      for (const issue of issues) {
        if (!issue.field || !setFieldError(issue.field, issue.message)) {
          leftovers.push(issue);
        }
      }
      return leftovers;
    },

    clearIssues() {
      for (const box of element.querySelectorAll<HTMLElement>(".field.invalid")) {
        box.classList.remove("invalid");
        const slot = box.querySelector<HTMLElement>(".field-error")!;
        slot.textContent = "";
        slot.hidden = true;
      }
    },

    setBusy(busy) {
      submitButton.disabled = busy;
      busyIndicator.hidden = !busy;
      for (const control of element.querySelectorAll<HTMLInputElement>("input, textarea")) {
        control.disabled = busy;
      }
    },
  };
}

function isKnownControl(tag: string): boolean {
  return FILE_TYPES.has(tag) ||
    ["Text", "TextLong", "Number", "Range", "SingleChoice", "MultipleChoice"].includes(tag);
}

function buildField(
  field: FieldWire,
  fileState: Map<string, FileValue>,
  pendingReads: Map<string, Promise<void>>,
): HTMLElement {
  const box = document.createElement("div");
  box.className = "field";
  box.dataset.field = field.name;
  box.dataset.type = field.type;

  const label = document.createElement("label");
  label.textContent = field.label || field.name;
  box.appendChild(label);

  switch (field.type) {
    case "Text": {
      const input = document.createElement("input");
      input.type = "text";
      input.name = field.name;
      box.appendChild(input);
      break;
    }
    case "TextLong": {
      const area = document.createElement("textarea");
      area.name = field.name;
      area.rows = 5;
      box.appendChild(area);
      break;
    }
    case "Number": {
      const input = document.createElement("input");
      input.type = "number";
      input.name = field.name;
      if (field.min !== null && field.min !== undefined) input.min = String(field.min);
      if (field.max !== null && field.max !== undefined) input.max = String(field.max);
      input.step = field.integer_only ? "1" : "any";
      box.appendChild(input);
      break;
    }
    case "Range": {
      const input = document.createElement("input");
      input.type = "range";
      input.name = field.name;
      input.min = String(field.min);
      input.max = String(field.max);
      input.step = String(field.step);
      const readout = document.createElement("output");
      readout.textContent = input.value;
      input.addEventListener("input", () => (readout.textContent = input.value));
      box.append(input, readout);
      break;
    }
    case "SingleChoice": {
      box.appendChild(buildChoiceGroup(field, "radio"));
      break;
    }
    case "MultipleChoice": {
      box.appendChild(buildChoiceGroup(field, "checkbox"));
      break;
    }
    default: {
      // file family
      const input = document.createElement("input");
      input.type = "file";
      input.name = field.name;
      const accept = acceptFor(field);
      if (accept) input.accept = accept;
      const note = document.createElement("span");
      note.className = "file-name";
      input.addEventListener("change", () => {
        const file = input.files && input.files[0];
        if (!file) return;
        const read = fileToBase64(file).then((content) => {
          fileState.set(field.name, { filename: file.name, content_base64: content });
          note.textContent = file.name;
        });
        pendingReads.set(field.name, read);
      });
      box.append(input, note);
    }
  }

  const error = document.createElement("span");
  error.className = "field-error";
  error.hidden = true;
  box.appendChild(error);
  return box;
}

function buildChoiceGroup(field: FieldWire, kind: "radio" | "checkbox"): HTMLElement {
  const group = document.createElement("div");
  group.className = "choice-group";
  group.setAttribute("role", kind === "radio" ? "radiogroup" : "group");
  for (const option of field.options ?? []) {
    const wrapper = document.createElement("label");
    wrapper.className = "choice";
    const input = document.createElement("input");
    input.type = kind;
    input.name = field.name;
    input.value = option;
    wrapper.append(input, document.createTextNode(option));
    group.appendChild(wrapper);
  }
  return group;
}

function readField(
  field: FieldWire,
  root: HTMLElement,
  fileState: Map<string, FileValue>,
): unknown {
  const box = root.querySelector<HTMLElement>(`.field[data-field="${field.name}"]`)!;
  switch (field.type) {
    case "Text": {
      const value = box.querySelector<HTMLInputElement>("input")!.value;
      return value === "" ? undefined : value;
    }
    case "TextLong": {
      const value = box.querySelector<HTMLTextAreaElement>("textarea")!.value;
      return value === "" ? undefined : value;
    }
    case "Number": {
      const raw = box.querySelector<HTMLInputElement>("input")!.value;
      if (raw.trim() === "") return undefined;
      const value = Number(raw);
      return Number.isFinite(value) ? value : undefined;
    }
    case "Range": {
      return Number(box.querySelector<HTMLInputElement>("input")!.value);
    }
    case "SingleChoice": {
      const checked = box.querySelector<HTMLInputElement>("input:checked");
      return checked ? checked.value : undefined;
    }
    case "MultipleChoice": {
      const checked = [...box.querySelectorAll<HTMLInputElement>("input:checked")];
      return checked.length ? checked.map((c) => c.value) : undefined;
    }
    default:
      return fileState.get(field.name);
  }
}
