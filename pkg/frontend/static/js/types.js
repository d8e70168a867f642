// Wire types shared with the gateway: GET /ui/schema and POST /ui/submit.
// every control type that may appear in an input schema (Plot is output-only)
export const INPUT_CONTROL_TYPES = [
    "Text", "TextLong", "Number", "Range", "SingleChoice", "MultipleChoice",
    "File", "ImageFile", "CSVFile", "TimeSeriesCSVFile",
];
export const OUTPUT_SLOT_TYPES = ["Plot", "Number", "File", "Text"];
