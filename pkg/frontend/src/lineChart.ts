// Declarative SVG line chart: the gateway sends series, the frontend scales
// axes and draws. Nothing here computes data; hover values come straight
// from the wire.

import type { LineSeriesWire, PlotLineWire } from "./types.js";

const COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

const WIDTH = 640;
const HEIGHT = 300;
const MARGIN = { top: 16, right: 16, bottom: 36, left: 64 };
const SVG_NS = "http://www.w3.org/2000/svg";

interface ScaledSeries {
  wire: LineSeriesWire;
  xs: number[];
  color: string;
}

function toNumericX(x: string | number, fallback: number): number {
  if (typeof x === "number") return x;
  const parsed = Date.parse(x);
  return Number.isNaN(parsed) ? fallback : parsed;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K, attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

export function renderLineChart(item: PlotLineWire): HTMLElement {
  const container = document.createElement("figure");
  container.className = "plot-line";
  const title = document.createElement("figcaption");
  title.textContent = item.title;
  container.appendChild(title);

  const scaled: ScaledSeries[] = item.series.map((wire, i) => ({
    wire,
    xs: wire.x.map((x, j) => toNumericX(x, j)),
    color: COLORS[i % COLORS.length],
  }));

  const allX = scaled.flatMap((s) => s.xs);
  const allY = scaled.flatMap((s) => s.wire.y);
  if (allX.length === 0) {
    const empty = document.createElement("p");
    empty.textContent = "(no data)";
    container.appendChild(empty);
    return container;
  }
  let [x0, x1] = [Math.min(...allX), Math.max(...allX)];
  let [y0, y1] = [Math.min(...allY), Math.max(...allY)];
  if (x0 === x1) { x0 -= 1; x1 += 1; }
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const pad = (y1 - y0) * 0.05;
  y0 -= pad;
  y1 += pad;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => MARGIN.left + ((x - x0) / (x1 - x0)) * plotW;
  const py = (y: number) => MARGIN.top + plotH - ((y - y0) / (y1 - y0)) * plotH;

  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`, width: WIDTH, height: HEIGHT,
    role: "img", class: "chart",
  });

  // horizontal gridlines with y tick labels
  for (let i = 0; i <= 4; i++) {
    const y = y0 + ((y1 - y0) * i) / 4;
    svg.appendChild(svgEl("line", {
      x1: MARGIN.left, x2: WIDTH - MARGIN.right, y1: py(y), y2: py(y),
      stroke: "#ddd", "stroke-width": 1,
    }));
    const label = svgEl("text", {
      x: MARGIN.left - 6, y: py(y) + 4, "text-anchor": "end",
      "font-size": 11, fill: "#444",
    });
    label.textContent = formatTick(y);
    svg.appendChild(label);
  }

  // x extent labels
  const first = item.series[0]?.x[0];
  const last = item.series[item.series.length - 1]?.x.slice(-1)[0];
  for (const [value, anchor, xpos] of [
    [first, "start", MARGIN.left],
    [last, "end", WIDTH - MARGIN.right],
  ] as const) {
    if (value === undefined) continue;
    const label = svgEl("text", {
      x: xpos, y: HEIGHT - 10, "text-anchor": anchor, "font-size": 11, fill: "#444",
    });
    label.textContent = String(value);
    svg.appendChild(label);
  }

  for (const series of scaled) {
    const points = series.xs.map((x, i) => `${px(x)},${py(series.wire.y[i])}`);
    svg.appendChild(svgEl("polyline", {
      points: points.join(" "), fill: "none", stroke: series.color, "stroke-width": 1.5,
      "data-series": series.wire.label,
    }));
    // hoverable markers carrying the exact wire values
    series.xs.forEach((x, i) => {
      const marker = svgEl("circle", {
        cx: px(x), cy: py(series.wire.y[i]), r: 3,
        fill: series.color, "fill-opacity": 0, "pointer-events": "all",
      });
      const tip = svgEl("title");
      tip.textContent = `${series.wire.label}: ${series.wire.x[i]} → ${series.wire.y[i]}`;
      marker.appendChild(tip);
      marker.addEventListener("mouseenter", () => marker.setAttribute("fill-opacity", "1"));
      marker.addEventListener("mouseleave", () => marker.setAttribute("fill-opacity", "0"));
      svg.appendChild(marker);
    });
  }
  container.appendChild(svg);

  const legend = document.createElement("ul");
  legend.className = "legend";
  for (const series of scaled) {
    const entry = document.createElement("li");
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = series.color;
    entry.append(swatch, document.createTextNode(series.wire.label));
    legend.appendChild(entry);
  }
  container.appendChild(legend);
  return container;
}

function formatTick(value: number): string {
  if (Math.abs(value) >= 10000) return value.toExponential(2);
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(Math.abs(value) < 1 ? 3 : 1);
}
