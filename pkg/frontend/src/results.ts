/**
 * Result-document model and pure SVG render helpers for the explorer.
 *
 * Every number shown comes straight from the result file; nothing is
 * recomputed client-side, so the service stays the single source of
 * truth.
 */

import { XmlNode, findChild, findChildren, parseXml } from "./qml.js";

export interface BlochRow {
  qubit: number;
  x: number;
  y: number;
  z: number;
}

export interface ListingEntry {
  index: number;
  p: number;
  phase: number;
}

export interface OutcomeRecord {
  targets: number[];
  bits: string;
  p: number;
}

export interface StepRecord {
  step: number;
  bloch: BlochRow[];
  listing: ListingEntry[];
  entropy: number;
  outcomes: OutcomeRecord[];
}

export interface SpectrumResult {
  kind: "spectrum";
  engine: string;
  eigenvalues: Array<{ v: number; converged: boolean }>;
  job: XmlNode;
}

export interface TraceResult {
  kind: "trace";
  engine: string;
  rng: string;
  nQubits: number;
  records: StepRecord[];
  warnings: string[];
  job: XmlNode;
}

export type ParsedResult = TraceResult | SpectrumResult;

export function parseResultDocument(text: string): ParsedResult {
  const root = parseXml(text);
  if (root.tag !== "qml") throw new Error("not a QML document");
  const result = findChild(root, "result");
  if (!result) throw new Error("document contains no result");
  const job = findChild(result, "job");
  if (!job) throw new Error("result does not embed its job");

  const spectrum = findChild(result, "spectrum");
  if (spectrum) {
    return {
      kind: "spectrum",
      engine: result.attrs.engine ?? "",
      eigenvalues: findChildren(spectrum, "ev").map((ev) => ({
        v: parseFloat(ev.attrs.v),
        converged: ev.attrs.converged !== "false",
      })),
      job,
    };
  }

  const records: StepRecord[] = findChildren(result, "record").map((rec) => ({
    step: parseInt(rec.attrs.step, 10),
    bloch: findChildren(rec, "bloch").map((b) => ({
      qubit: parseInt(b.attrs.i, 10),
      x: parseFloat(b.attrs.x),
      y: parseFloat(b.attrs.y),
      z: parseFloat(b.attrs.z),
    })),
    listing: findChildren(rec, "base").map((b) => ({
      index: parseInt(b.attrs.index, 10),
      p: parseFloat(b.attrs.p),
      phase: parseFloat(b.attrs.phase),
    })),
    entropy: parseFloat(findChild(rec, "entropy")?.attrs.v ?? "0"),
    outcomes: findChildren(rec, "outcome").map((o) => ({
      targets: (o.attrs.targets ?? "")
        .split(",")
        .filter((s) => s !== "")
        .map((s) => parseInt(s, 10)),
      bits: o.attrs.bits ?? "",
      p: parseFloat(o.attrs.p),
    })),
  }));

  return {
    kind: "trace",
    engine: result.attrs.engine ?? "",
    rng: result.attrs.rng ?? "",
    nQubits: parseInt(job.attrs.nqubits, 10),
    records,
    warnings: findChildren(result, "warning").map((w) => w.attrs.text ?? ""),
    job,
  };
}

export function entropySeries(trace: TraceResult): number[] {
  return trace.records.map((r) => r.entropy);
}

// ---------------------------------------------------------------------------
// SVG builders (strings, so they are unit-testable without a DOM)

const svgOpen = (w: number, h: number) =>
  `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${w} ${h}" ` +
  `width="${w}" height="${h}">`;

function phaseColor(phase: number): string {
  const hue = ((phase + Math.PI) / (2 * Math.PI)) * 360;
  return `hsl(${hue.toFixed(0)},70%,50%)`;
}

/** Entropy-vs-step polyline; y spans [0, nQubits]. */
export function renderEntropyCurve(
  trace: TraceResult,
  width = 360,
  height = 160,
): string {
  const pad = 28;
  const series = entropySeries(trace);
  const maxY = Math.max(trace.nQubits, 1);
  const stepX = series.length > 1 ? (width - 2 * pad) / (series.length - 1) : 0;
  const pts = series
    .map((s, i) => {
      const x = pad + i * stepX;
      const y = height - pad - (s / maxY) * (height - 2 * pad);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  const labels = series
    .map((s, i) => {
      const x = pad + i * stepX;
      return (
        `<text x="${x.toFixed(1)}" y="${height - 8}" font-size="9" ` +
        `text-anchor="middle">${i + 1}</text>`
      );
    })
    .join("");
  return (
    svgOpen(width, height) +
    `<line x1="${pad}" y1="${height - pad}" x2="${width - pad}" ` +
    `y2="${height - pad}" stroke="#888"/>` +
    `<line x1="${pad}" y1="${pad}" x2="${pad}" y2="${height - pad}" stroke="#888"/>` +
    `<polyline fill="none" stroke="#0a6" stroke-width="2" points="${pts}"/>` +
    series
      .map((s, i) => {
        const x = pad + i * stepX;
        const y = height - pad - (s / maxY) * (height - 2 * pad);
        return (
          `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3" fill="#0a6">` +
          `<title>step ${i + 1}: S = ${s}</title></circle>`
        );
      })
      .join("") +
    labels +
    `</svg>`
  );
}

/** Thresholded base-state probability bars, annotated with phase. */
export function renderListing(
  record: StepRecord,
  nQubits: number,
  width = 460,
  height = 180,
  maxBars = 32,
): string {
  const pad = 24;
  const entries = record.listing.slice(0, maxBars);
  if (entries.length === 0) {
    return svgOpen(width, height) +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" ` +
      `font-size="11">no states above threshold</text></svg>`;
  }
  const barW = Math.max(4, (width - 2 * pad) / entries.length - 3);
  const maxP = Math.max(...entries.map((e) => e.p), 1e-12);
  const bars = entries
    .map((e, i) => {
      const x = pad + i * (barW + 3);
      const h = (e.p / maxP) * (height - 2 * pad - 14);
      const y = height - pad - h;
      const bits = e.index.toString(2).padStart(nQubits, "0");
      return (
        `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${barW.toFixed(1)}" ` +
        `height="${h.toFixed(1)}" fill="${phaseColor(e.phase)}">` +
        `<title>|${bits}⟩ p=${e.p} φ=${e.phase}</title></rect>` +
        `<text x="${(x + barW / 2).toFixed(1)}" y="${height - pad + 10}" ` +
        `font-size="8" text-anchor="middle">${e.index}</text>`
      );
    })
    .join("");
  return svgOpen(width, height) + bars + `</svg>`;
}

/** Per-qubit Bloch components as grouped bars (x, y, z). */
export function renderBloch(
  record: StepRecord,
  width = 460,
  height = 160,
): string {
  const pad = 24;
  const rows = record.bloch;
  if (rows.length === 0) return svgOpen(width, height) + `</svg>`;
  const groupW = (width - 2 * pad) / rows.length;
  const mid = height / 2;
  const scale = (height - 2 * pad) / 2;
  const colors = ["#d33", "#36c", "#293"];
  const bars = rows
    .map((row, qi) => {
      const comps = [row.x, row.y, row.z];
      const barW = Math.max(3, groupW / 4);
      return comps
        .map((v, ci) => {
          const x = pad + qi * groupW + ci * barW;
          const h = Math.abs(v) * scale;
          const y = v >= 0 ? mid - h : mid;
          return (
            `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" ` +
            `width="${(barW - 1).toFixed(1)}" height="${h.toFixed(1)}" ` +
            `fill="${colors[ci]}"><title>qubit ${row.qubit} ` +
            `${"xyz"[ci]} = ${v}</title></rect>`
          );
        })
        .join("") +
        `<text x="${(pad + qi * groupW + groupW / 2 - 2).toFixed(1)}" ` +
        `y="${height - 6}" font-size="9" text-anchor="middle">q${row.qubit}</text>`;
    })
    .join("");
  return (
    svgOpen(width, height) +
    `<line x1="${pad}" y1="${mid}" x2="${width - pad}" y2="${mid}" stroke="#888"/>` +
    bars +
    `</svg>`
  );
}
