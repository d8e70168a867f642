// Wire types shared with the gateway: GET /ui/schema and POST /ui/submit.

export interface FieldWire {
  name: string;
  type: string;
  label: string;
  min?: number | null;
  max?: number | null;
  integer_only?: boolean;
  step?: number;
  options?: string[];
  extensions?: string[] | null;
  time_column?: string;
  value_column?: string;
  kind?: string;
}

export interface SchemaWire {
  app_name: string;
  description: string;
  inputs: FieldWire[];
  outputs: FieldWire[];
}

export interface TensorPayloadWire {
  data: string;
  dtype: string;
  shape: number[];
}

export interface LineSeriesWire {
  label: string;
  x: (string | number)[];
  y: number[];
}

export interface PlotLineWire {
  type: "PlotLine";
  title: string;
  series: LineSeriesWire[];
}

export interface PlotImageWire {
  type: "PlotImage";
  title: string;
  image: TensorPayloadWire;
}

export interface NumberDisplayWire {
  type: "NumberDisplay";
  label: string;
  value: number;
}

export interface FileDownloadWire {
  type: "FileDownload";
  filename: string;
  content_base64: string;
  mime: string;
}

export interface TextDisplayWire {
  type: "TextDisplay";
  label: string;
  text: string;
}

export type DisplayItemWire =
  | PlotLineWire
  | PlotImageWire
  | NumberDisplayWire
  | FileDownloadWire
  | TextDisplayWire;

export interface IssueWire {
  field: string;
  code: string;
  message: string;
}

export interface ErrorEnvelopeWire {
  error: {
    code: string;
    message: string;
    detail?: { issues?: IssueWire[]; [key: string]: unknown };
  };
}

export interface FileValue {
  filename: string;
  content_base64: string;
}

// every control type that may appear in an input schema (Plot is output-only)
export const INPUT_CONTROL_TYPES = [
  "Text", "TextLong", "Number", "Range", "SingleChoice", "MultipleChoice",
  "File", "ImageFile", "CSVFile", "TimeSeriesCSVFile",
] as const;

export const OUTPUT_SLOT_TYPES = ["Plot", "Number", "File", "Text"] as const;
