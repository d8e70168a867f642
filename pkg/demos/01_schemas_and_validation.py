"""Declare an input/output schema, ship it over the wire, validate submissions.

The schema is the single source of truth: the frontend renders controls from
it and the gateway validates every submission against it before any hook runs.
"""

import json

from mlserve import (InputSchema, MultipleChoice, Number, OutputSchema, Plot,
                     Range, SchemaDescriptor, Text, schema_from_wire,
                     schema_to_wire, validate_input)

# an input schema is an ordered list of named controls
inputs = InputSchema([
    ("title", Text(label="Experiment title")),
    ("samples", Number(label="Sample count", min=1, max=1000, integer_only=True)),
    ("threshold", Range(min=0.0, max=1.0, step=0.05, label="Detection threshold")),
    ("channels", MultipleChoice(options=("red", "green", "blue"), label="Channels")),
])

outputs = OutputSchema([
    ("histogram", Plot(kind="line", label="Histogram")),
    ("summary", Text(label="Summary")),
])

descriptor = SchemaDescriptor(
    app_name="Demo Analyzer",
    input_schema=inputs,
    output_schema=outputs,
    service_description="Toy app showing schema declaration and validation.",
)

# the wire form is plain JSON; this is exactly what GET /ui/schema returns
wire = schema_to_wire(descriptor)
print("wire schema:")
print(json.dumps(wire, indent=2))

# and it round-trips losslessly
assert schema_from_wire(wire) == descriptor

# validation reports every problem instead of failing fast
submission = {
    "title": "run 42",
    "samples": 2.5,            # not an integer
    "threshold": 1.7,          # outside the range
    "channels": ["red", "uv"], # unknown option
    "notes": "oops",           # not in the schema at all
}
report = validate_input(inputs, submission)
print("\nvalidation of a bad submission:")
for issue in report.issues:
    print(f"  {issue.field:10s} {issue.code:15s} {issue.message}")

good = {"title": "run 42", "samples": 25, "threshold": 0.5, "channels": ["red"]}
print("\nvalid submission ->", validate_input(inputs, good).ok)
