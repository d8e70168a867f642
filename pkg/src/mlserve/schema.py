"""UI control catalog, input/output schemas, their wire format and input validation.

The catalog has exactly eleven control types. Input schemas declare what a
user supplies, output schemas declare what is displayed back; both are ordered
and serialize to JSON for the frontend. validate_input never raises: every
problem with a submission is reported in a ValidationReport.
"""

from __future__ import annotations

import base64
import binascii
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

__all__ = [
    "Text", "TextLong", "Number", "Range", "SingleChoice", "MultipleChoice",
    "File", "ImageFile", "CSVFile", "TimeSeriesCSVFile", "Plot",
    "UIType", "InputSchema", "OutputSchema", "SchemaDescriptor",
    "Issue", "ValidationReport", "SchemaParseError",
    "validate_input", "schema_to_wire", "schema_from_wire",
]

# validation issue codes
MISSING = "MISSING"
TYPE_MISMATCH = "TYPE_MISMATCH"
OUT_OF_RANGE = "OUT_OF_RANGE"
UNKNOWN_OPTION = "UNKNOWN_OPTION"
BAD_FILE = "BAD_FILE"
UNKNOWN_FIELD = "UNKNOWN_FIELD"


def _check_options(options) -> tuple[str, ...]:
    opts = tuple(options)
    if not opts:
        raise ValueError("options must be non-empty")
    for o in opts:
        if not isinstance(o, str) or o == "":
            raise ValueError(f"options must be non-empty strings, got {o!r}")
    if len(set(opts)) != len(opts):
        raise ValueError(f"options must be unique, got {list(opts)}")
    return opts


@dataclass(frozen=True)
class Text:
    label: str = ""


@dataclass(frozen=True)
class TextLong:
    label: str = ""


@dataclass(frozen=True)
class Number:
    label: str = ""
    min: float | None = None
    max: float | None = None
    integer_only: bool = False


@dataclass(frozen=True)
class Range:
    min: float
    max: float
    step: float
    label: str = ""

    def __post_init__(self):
        if not self.min < self.max:
            raise ValueError(f"Range needs min < max, got [{self.min}, {self.max}]")
        if not self.step > 0:
            raise ValueError(f"Range step must be positive, got {self.step}")
        if self.step > self.max - self.min:
            raise ValueError(f"Range step {self.step} exceeds span {self.max - self.min}")


@dataclass(frozen=True)
class SingleChoice:
    options: tuple[str, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "options", _check_options(self.options))


@dataclass(frozen=True)
class MultipleChoice:
    options: tuple[str, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "options", _check_options(self.options))


@dataclass(frozen=True)
class File:
    label: str = ""
    extensions: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.extensions is not None:
            object.__setattr__(self, "extensions", tuple(self.extensions))


@dataclass(frozen=True)
class ImageFile:
    label: str = ""


@dataclass(frozen=True)
class CSVFile:
    label: str = ""


@dataclass(frozen=True)
class TimeSeriesCSVFile:
    time_column: str
    value_column: str
    label: str = ""


@dataclass(frozen=True)
class Plot:
    kind: str = "line"
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("line", "image"):
            raise ValueError(f"Plot kind must be 'line' or 'image', got {self.kind!r}")


UIType = Union[
    Text, TextLong, Number, Range, SingleChoice, MultipleChoice,
    File, ImageFile, CSVFile, TimeSeriesCSVFile, Plot,
]

#: Tag -> variant class; tags on the wire are exactly these names.
CATALOG = {
    cls.__name__: cls
    for cls in (Text, TextLong, Number, Range, SingleChoice, MultipleChoice,
                File, ImageFile, CSVFile, TimeSeriesCSVFile, Plot)
}

_FILE_VARIANTS = (File, ImageFile, CSVFile, TimeSeriesCSVFile)
_OUTPUT_VARIANTS = (Plot, Number, File, Text)


def _check_fields(fields, *, allowed, context) -> tuple[tuple[str, UIType], ...]:
    if isinstance(fields, Mapping):
        fields = fields.items()
    out = []
    seen = set()
    for name, ui in fields:
        if not isinstance(name, str) or name == "":
            raise ValueError(f"{context} names must be non-empty strings, got {name!r}")
        if name in seen:
            raise ValueError(f"duplicate {context} name {name!r}")
        if type(ui).__name__ not in CATALOG:
            raise ValueError(f"{context} {name!r} is not a UIType: {ui!r}")
        if allowed is not None and not isinstance(ui, allowed[0]):
            raise ValueError(f"{context} {name!r} must be one of {allowed[1]}, got {type(ui).__name__}")
        if allowed is None and isinstance(ui, Plot):
            raise ValueError(f"{context} {name!r}: Plot is output-only")
        seen.add(name)
        out.append((name, ui))
    return tuple(out)


@dataclass(frozen=True)
class InputSchema:
    """Ordered (field_name, ui_type) declarations of user-supplied data."""

    fields: tuple[tuple[str, UIType], ...]

    def __init__(self, fields: Iterable | Mapping):
        object.__setattr__(self, "fields", _check_fields(fields, allowed=None, context="input field"))

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)


@dataclass(frozen=True)
class OutputSchema:
    """Ordered (slot_name, ui_type) declarations of displayed results.

    Output slots are Plot, Number, File or Text; interactive controls make no
    sense on the output side.
    """

    fields: tuple[tuple[str, UIType], ...]

    def __init__(self, fields: Iterable | Mapping):
        object.__setattr__(
            self,
            "fields",
            _check_fields(fields, allowed=(_OUTPUT_VARIANTS, "Plot/Number/File/Text"), context="output slot"),
        )

    def __iter__(self):
        return iter(self.fields)

    def __len__(self):
        return len(self.fields)


@dataclass(frozen=True)
class SchemaDescriptor:
    """Everything the frontend needs to render one app."""

    app_name: str
    input_schema: InputSchema
    output_schema: OutputSchema
    service_description: str = ""


@dataclass(frozen=True)
class Issue:
    field: str
    code: str
    message: str

    def to_wire(self) -> dict:
        return {"field": self.field, "code": self.code, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_wire(self) -> dict:
        return {"ok": self.ok, "issues": [i.to_wire() for i in self.issues]}


class SchemaParseError(ValueError):
    """Wire schema could not be parsed; `path` names the offending element."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _validate_value(name: str, ui: UIType, value) -> Issue | None:
    if isinstance(ui, (Text, TextLong)):
        if not isinstance(value, str):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be a string")
        return None

    if isinstance(ui, Number):
        if not _is_number(value):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be a JSON number")
        if ui.integer_only and float(value) != int(value):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be an integer")
        if ui.min is not None and value < ui.min:
            return Issue(name, OUT_OF_RANGE, f"{name!r} below minimum {ui.min}")
        if ui.max is not None and value > ui.max:
            return Issue(name, OUT_OF_RANGE, f"{name!r} above maximum {ui.max}")
        return None

    if isinstance(ui, Range):
        if not _is_number(value):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be a JSON number")
        if value < ui.min or value > ui.max:
            return Issue(name, OUT_OF_RANGE, f"{name!r} outside [{ui.min}, {ui.max}]")
        return None

    if isinstance(ui, SingleChoice):
        if not isinstance(value, str):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be a string option")
        if value not in ui.options:
            return Issue(name, UNKNOWN_OPTION, f"{name!r}: {value!r} not in {list(ui.options)}")
        return None

    if isinstance(ui, MultipleChoice):
        if not isinstance(value, list):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be an array of option strings")
        for v in value:
            if not isinstance(v, str):
                return Issue(name, TYPE_MISMATCH, f"{name!r} entries must be strings, got {v!r}")
            if v not in ui.options:
                return Issue(name, UNKNOWN_OPTION, f"{name!r}: {v!r} not in {list(ui.options)}")
        return None

    if isinstance(ui, _FILE_VARIANTS):
        if not isinstance(value, dict):
            return Issue(name, TYPE_MISMATCH, f"{name!r} must be an object {{filename, content_base64}}")
        filename = value.get("filename")
        content = value.get("content_base64")
        if set(value) != {"filename", "content_base64"}:
            return Issue(name, BAD_FILE, f"{name!r} must have exactly filename and content_base64")
        if not isinstance(filename, str) or not isinstance(content, str):
            return Issue(name, BAD_FILE, f"{name!r} filename and content_base64 must be strings")
        try:
            base64.b64decode(content, validate=True)
        except (binascii.Error, ValueError):
            return Issue(name, BAD_FILE, f"{name!r} content_base64 is not valid Base64")
        if isinstance(ui, File) and ui.extensions:
            if not any(filename.lower().endswith(ext.lower()) for ext in ui.extensions):
                return Issue(name, BAD_FILE, f"{name!r}: {filename!r} does not match extensions {list(ui.extensions)}")
        return None

    # Plot cannot appear in an input schema; unreachable for valid schemas
    return Issue(name, TYPE_MISMATCH, f"{name!r} has non-input control type {type(ui).__name__}")


def validate_input(schema: InputSchema, raw: dict) -> ValidationReport:
    """Check a parsed JSON object against an input schema.

    Total: never raises for any JSON object. Extra keys are errors by design;
    silently dropping keys would hide client/server schema drift.
    """
    issues: list[Issue] = []
    for name, ui in schema:
        if name not in raw:
            issues.append(Issue(name, MISSING, f"required field {name!r} is missing"))
            continue
        issue = _validate_value(name, ui, raw[name])
        if issue is not None:
            issues.append(issue)
    declared = {name for name, _ in schema}
    for key in raw:
        if key not in declared:
            issues.append(Issue(str(key), UNKNOWN_FIELD, f"unknown field {key!r}"))
    return ValidationReport(tuple(issues))


def _ui_to_wire(name: str, ui: UIType) -> dict:
    entry: dict = {"name": name, "type": type(ui).__name__, "label": ui.label}
    if isinstance(ui, Number):
        entry.update(min=ui.min, max=ui.max, integer_only=ui.integer_only)
    elif isinstance(ui, Range):
        entry.update(min=ui.min, max=ui.max, step=ui.step)
    elif isinstance(ui, (SingleChoice, MultipleChoice)):
        entry["options"] = list(ui.options)
    elif isinstance(ui, File):
        entry["extensions"] = list(ui.extensions) if ui.extensions is not None else None
    elif isinstance(ui, TimeSeriesCSVFile):
        entry.update(time_column=ui.time_column, value_column=ui.value_column)
    elif isinstance(ui, Plot):
        entry["kind"] = ui.kind
    return entry


def schema_to_wire(d: SchemaDescriptor) -> dict:
    """Serialize a descriptor for transport to the frontend."""
    return {
        "app_name": d.app_name,
        "description": d.service_description,
        "inputs": [_ui_to_wire(name, ui) for name, ui in d.input_schema],
        "outputs": [_ui_to_wire(name, ui) for name, ui in d.output_schema],
    }


def _require(entry: dict, key: str, path: str):
    if key not in entry:
        raise SchemaParseError(f"{path}.{key}", f"missing parameter {key!r}")
    return entry[key]


def _ui_from_wire(entry, path: str) -> tuple[str, UIType]:
    if not isinstance(entry, dict):
        raise SchemaParseError(path, "schema entry must be an object")
    tag = _require(entry, "type", path)
    if tag not in CATALOG:
        raise SchemaParseError(f"{path}.type", f"unknown UI type {tag!r}")
    name = _require(entry, "name", path)
    if not isinstance(name, str) or not name:
        raise SchemaParseError(f"{path}.name", "name must be a non-empty string")
    label = entry.get("label", "")
    if not isinstance(label, str):
        raise SchemaParseError(f"{path}.label", "label must be a string")
    try:
        if tag == "Number":
            ui: UIType = Number(label=label, min=entry.get("min"), max=entry.get("max"),
                                integer_only=bool(entry.get("integer_only", False)))
        elif tag == "Range":
            ui = Range(min=_require(entry, "min", path), max=_require(entry, "max", path),
                       step=_require(entry, "step", path), label=label)
        elif tag in ("SingleChoice", "MultipleChoice"):
            options = _require(entry, "options", path)
            if not isinstance(options, list):
                raise SchemaParseError(f"{path}.options", "options must be an array")
            ui = CATALOG[tag](options=tuple(options), label=label)
        elif tag == "File":
            ext = entry.get("extensions")
            if ext is not None and not isinstance(ext, list):
                raise SchemaParseError(f"{path}.extensions", "extensions must be an array or null")
            ui = File(label=label, extensions=tuple(ext) if ext is not None else None)
        elif tag == "TimeSeriesCSVFile":
            ui = TimeSeriesCSVFile(time_column=_require(entry, "time_column", path),
                                   value_column=_require(entry, "value_column", path), label=label)
        elif tag == "Plot":
            ui = Plot(kind=_require(entry, "kind", path), label=label)
        else:
            ui = CATALOG[tag](label=label)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, SchemaParseError):
            raise
        raise SchemaParseError(path, str(exc)) from exc
    return name, ui


def schema_from_wire(w: dict) -> SchemaDescriptor:
    """Inverse of schema_to_wire on its image; rejects anything else."""
    if not isinstance(w, dict):
        raise SchemaParseError("$", "wire schema must be an object")
    app_name = w.get("app_name")
    if not isinstance(app_name, str):
        raise SchemaParseError("$.app_name", "app_name must be a string")
    description = w.get("description", "")
    if not isinstance(description, str):
        raise SchemaParseError("$.description", "description must be a string")
    inputs = w.get("inputs")
    outputs = w.get("outputs")
    if not isinstance(inputs, list):
        raise SchemaParseError("$.inputs", "inputs must be an array")
    if not isinstance(outputs, list):
        raise SchemaParseError("$.outputs", "outputs must be an array")
    in_fields = [_ui_from_wire(e, f"inputs[{i}]") for i, e in enumerate(inputs)]
    out_fields = [_ui_from_wire(e, f"outputs[{i}]") for i, e in enumerate(outputs)]
    try:
        input_schema = InputSchema(in_fields)
    except ValueError as exc:
        raise SchemaParseError("$.inputs", str(exc)) from exc
    try:
        output_schema = OutputSchema(out_fields)
    except ValueError as exc:
        raise SchemaParseError("$.outputs", str(exc)) from exc
    return SchemaDescriptor(app_name=app_name, input_schema=input_schema,
                            output_schema=output_schema, service_description=description)
