/**
 * Browser wiring: draw a circuit on a qubit-row / step-column grid,
 * save/load QML, submit to the service, poll, and explore the result.
 */

import {
  Circuit,
  Coupling,
  FieldTerm,
  HamiltonianModel,
  PALETTE,
  PaletteEntry,
  PlacedGate,
  circuitToQml,
  emptyCircuit,
  gateSupport,
  placementError,
  placeGate,
  qmlToCircuit,
  removeGate,
} from "./circuit.js";
import { ServiceClient, SubmitRejected } from "./client.js";
import {
  ParsedResult,
  parseResultDocument,
  renderBloch,
  renderEntropyCurve,
  renderListing,
} from "./results.js";

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

let circuit: Circuit = emptyCircuit(3);
let selected: PaletteEntry | null = null;
let pendingQubits: number[] = [];
let pendingColumn = -1;
let lastResult: ParsedResult | null = null;
let shownStep = 0;

function note(text: string, isError = false): void {
  const box = $("message");
  box.textContent = text;
  box.className = isError ? "message error" : "message";
}

// -- palette ----------------------------------------------------------------

function buildPalette(): void {
  const box = $("palette");
  box.innerHTML = "";
  for (const entry of PALETTE) {
    const button = document.createElement("button");
    button.textContent = entry.label;
    button.title = entry.kind;
    button.onclick = () => {
      selected = entry;
      pendingQubits = [];
      pendingColumn = -1;
      for (const other of box.querySelectorAll("button")) {
        other.classList.toggle("selected", other === button);
      }
      note(placementHint(entry));
    };
    box.appendChild(button);
  }
}

function placementHint(entry: PaletteEntry): string {
  if (entry.isModulo) return "Modulo: click any cell in the column, then fill the form";
  if (entry.isExp) return "exp(-itH): click any cell in the column, then edit the Hamiltonian";
  if (entry.targets === "register") {
    return `${entry.label}: click the register qubits top to bottom, double-click the last one`;
  }
  const picks: string[] = [];
  for (let i = 0; i < entry.controls; i++) picks.push(`control ${i + 1}`);
  for (let i = 0; i < (entry.targets as number); i++) picks.push(`target ${i + 1}`);
  return `${entry.label}: click ${picks.join(", then ")}`;
}

// -- grid -------------------------------------------------------------------

function gateAt(column: number, qubit: number): PlacedGate | null {
  const step = circuit.steps[column] ?? [];
  for (const gate of step) {
    if (gateSupport(gate).includes(qubit)) return gate;
  }
  return null;
}

function gateGlyph(gate: PlacedGate, qubit: number): string {
  if (gate.kind === "MEASURE") return "⟨M⟩";
  if (gate.kind === "MODULO") {
    return gate.xreg?.includes(qubit) ? "x:aˣ%N" : "y⊕";
  }
  if (gate.kind === "EXP") return "e⁻ⁱᵗᴴ";
  if (gate.controls.includes(qubit)) return "●";
  if (gate.kind === "CNOT" && gate.targets.includes(qubit)) return "⊕";
  return gate.kind;
}

function drawGrid(): void {
  const grid = $("grid");
  const columns = circuit.steps.length + 1; // trailing empty column to extend
  let html = "<table><tr><th></th>";
  for (let c = 0; c < columns; c++) html += `<th>step ${c + 1}</th>`;
  html += "</tr>";
  for (let q = 1; q <= circuit.nQubits; q++) {
    html += `<tr><th>q${q}</th>`;
    for (let c = 0; c < columns; c++) {
      const gate = gateAt(c, q);
      const pending =
        pendingColumn === c && pendingQubits.includes(q) ? " pending" : "";
      const label = gate ? gateGlyph(gate, q) : "";
      html += `<td class="cell${gate ? " busy" : ""}${pending}" ` +
        `data-q="${q}" data-c="${c}">${label}</td>`;
    }
    html += "</tr>";
  }
  html += "</table>";
  grid.innerHTML = html;
  for (const cell of grid.querySelectorAll<HTMLTableCellElement>("td.cell")) {
    cell.onclick = () => cellClicked(cell, false);
    cell.ondblclick = () => cellClicked(cell, true);
  }
  $("qml-preview").textContent = circuitToQml(circuit);
}

function cellClicked(cell: HTMLTableCellElement, isDouble: boolean): void {
  const qubit = parseInt(cell.dataset.q!, 10);
  const column = parseInt(cell.dataset.c!, 10);
  const existing = gateAt(column, qubit);
  if (!selected) {
    if (existing) {
      removeGate(circuit, column, existing);
      note(`removed ${existing.kind} from step ${column + 1}`);
      drawGrid();
    }
    return;
  }
  if (pendingColumn !== column) {
    pendingColumn = column;
    pendingQubits = [];
  }
  if (selected.isModulo || selected.isExp) {
    openParamsDialog(selected, column, [qubit]);
    return;
  }
  if (!pendingQubits.includes(qubit)) pendingQubits.push(qubit);
  const needed =
    selected.targets === "register"
      ? isDouble
        ? pendingQubits.length
        : Infinity
      : selected.controls + (selected.targets as number);
  if (pendingQubits.length >= needed) {
    finishPlacement(selected, column, [...pendingQubits]);
  } else {
    drawGrid();
    note(`${selected.label}: ${pendingQubits.length} qubit(s) picked`);
  }
}

function finishPlacement(
  entry: PaletteEntry,
  column: number,
  qubits: number[],
): void {
  const gate: PlacedGate = { kind: entry.kind, targets: [], controls: [] };
  if (entry.targets === "register") {
    gate.targets = qubits;
  } else {
    gate.controls = qubits.slice(0, entry.controls);
    gate.targets = qubits.slice(entry.controls);
  }
  if (entry.needsTheta || entry.needsMarked || entry.needsIterations ||
      entry.needsMatrix) {
    openParamsDialog(entry, column, qubits, gate);
    return;
  }
  tryPlace(column, gate);
}

function tryPlace(column: number, gate: PlacedGate): void {
  const error = placementError(circuit, column, gate);
  pendingQubits = [];
  pendingColumn = -1;
  if (error) {
    note(`cannot place ${gate.kind} in step ${column + 1}: ${error}`, true);
  } else {
    placeGate(circuit, column, gate);
    note(`${gate.kind} placed in step ${column + 1}`);
  }
  drawGrid();
}

// -- parameter dialog (theta / marked / modulo / hamiltonian) ----------------

function openParamsDialog(
  entry: PaletteEntry,
  column: number,
  qubits: number[],
  partial?: PlacedGate,
): void {
  const dialog = $("params") as unknown as HTMLDialogElement;
  const form = $("params-form");
  form.innerHTML = "";
  const add = (label: string, id: string, value: string) => {
    const row = document.createElement("label");
    row.textContent = label + " ";
    const input = document.createElement("input");
    input.id = id;
    input.value = value;
    row.appendChild(input);
    form.appendChild(row);
  };
  if (entry.needsTheta) add("theta (radians)", "p-theta", "1.5707963267948966");
  if (entry.needsMarked) add("marked states (decimal, comma)", "p-marked", "0");
  if (entry.needsIterations) add("iterations", "p-iter", "1");
  if (entry.needsMatrix) {
    add(`matrix (${entry.needsMatrix}x${entry.needsMatrix} re,im;…)`, "p-matrix",
        entry.needsMatrix === 2 ? "0,0;1,0;1,0;0,0" : "");
  }
  if (entry.isModulo) {
    add("a", "p-a", "2");
    add("N", "p-modn", "6");
    add("x register (qubits)", "p-xreg", "1,2,3");
    add("y register (qubits)", "p-yreg", "4,5,6");
  }
  if (entry.isExp) {
    add("t", "p-t", "1.0");
    add("slices n", "p-n", "16");
    add("order (1|2|4|exact)", "p-order", "2");
    add("couplings i:j:Jij:zz", "p-couplings", "1:2:1.0:1.0");
    add("fields i:Bx,By,Bz", "p-fields", "1:1.0,0.0,0.0");
  }
  $("params-title").textContent = `${entry.label} parameters`;
  dialog.showModal();
  $("params-ok").onclick = (event) => {
    event.preventDefault();
    const gate = partial ?? { kind: entry.kind, targets: qubits, controls: [] };
    try {
      applyParams(entry, gate);
    } catch (err) {
      note(String(err), true);
      dialog.close();
      return;
    }
    dialog.close();
    tryPlace(column, gate);
  };
  $("params-cancel").onclick = (event) => {
    event.preventDefault();
    dialog.close();
    pendingQubits = [];
    pendingColumn = -1;
    drawGrid();
  };
}

function numOrThrow(raw: string, what: string): number {
  const value = parseFloat(raw);
  if (!Number.isFinite(value)) throw new Error(`${what} must be a number`);
  return value;
}

function intOrThrow(raw: string, what: string): number {
  const value = parseInt(raw, 10);
  if (!Number.isInteger(value)) throw new Error(`${what} must be an integer`);
  return value;
}

function intsOrThrow(raw: string, what: string): number[] {
  return raw.split(",").map((s) => intOrThrow(s.trim(), what));
}

function applyParams(entry: PaletteEntry, gate: PlacedGate): void {
  const val = (id: string) => ($(id) as HTMLInputElement).value.trim();
  if (entry.needsTheta) gate.theta = numOrThrow(val("p-theta"), "theta");
  if (entry.needsMarked) {
    gate.marked = intsOrThrow(val("p-marked"), "marked state");
  }
  if (entry.needsIterations) {
    gate.iterations = intOrThrow(val("p-iter"), "iterations");
  }
  if (entry.needsMatrix) {
    gate.matrix = val("p-matrix").split(";").map((chunk) => {
      const [re, im] = chunk.split(",").map((s) => numOrThrow(s, "matrix entry"));
      return [re, im] as [number, number];
    });
  }
  if (entry.isModulo) {
    gate.a = intOrThrow(val("p-a"), "a");
    gate.modn = intOrThrow(val("p-modn"), "N");
    gate.xreg = intsOrThrow(val("p-xreg"), "x register");
    gate.yreg = intsOrThrow(val("p-yreg"), "y register");
    gate.targets = [];
  }
  if (entry.isExp) {
    gate.t = numOrThrow(val("p-t"), "t");
    gate.nSlices = intOrThrow(val("p-n"), "slices");
    const order = val("p-order");
    if (!["1", "2", "4", "exact"].includes(order)) {
      throw new Error("order must be 1, 2, 4 or exact");
    }
    gate.order = order as PlacedGate["order"];
    const model: HamiltonianModel = { couplings: [], fields: [] };
    for (const part of val("p-couplings").split(";").filter((s) => s)) {
      const [i, j, jij, zz] = part.split(":");
      const e2 = [0, 0, 0, 0, 0, 0, 0, 0, numOrThrow(zz, "coupling zz")];
      model.couplings.push({
        i: intOrThrow(i, "coupling qubit"),
        j: intOrThrow(j, "coupling qubit"),
        jij: numOrThrow(jij, "Jij"),
        e2,
      } as Coupling);
    }
    for (const part of val("p-fields").split(";").filter((s) => s)) {
      const [i, vec] = part.split(":");
      const [x, y, z] = vec.split(",").map((s) => numOrThrow(s, "field entry"));
      model.fields.push({ i: intOrThrow(i, "field qubit"), e1: [x, y, z] } as FieldTerm);
    }
    gate.model = model;
    gate.targets = [];
  }
}

// -- load / save / submit ----------------------------------------------------

function wireToolbar(): void {
  $("new-circuit").onclick = () => {
    const n = parseInt(($("nqubits") as HTMLInputElement).value, 10);
    circuit = emptyCircuit(Math.min(Math.max(n || 2, 1), 31));
    lastResult = null;
    drawGrid();
    note(`new ${circuit.nQubits}-qubit circuit`);
  };
  $("save-file").onclick = () => {
    const blob = new Blob([circuitToQml(circuit)], { type: "application/xml" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "circuit.qml";
    a.click();
    URL.revokeObjectURL(a.href);
  };
  ($("load-file") as HTMLInputElement).onchange = async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const text = await file.text();
      if (text.includes("<result")) {
        lastResult = parseResultDocument(text);
        circuit = qmlToCircuit(text); // editor reconstructs the embedded job
        shownStep = 0;
        drawExplorer();
        note(`loaded result file; circuit reconstructed (${file.name})`);
      } else {
        circuit = qmlToCircuit(text);
        note(`loaded ${file.name}`);
      }
      ($("nqubits") as HTMLInputElement).value = String(circuit.nQubits);
      drawGrid();
    } catch (err) {
      note(String(err), true);
    }
    input.value = "";
  };
  $("submit-job").onclick = () => void submitAndPoll();
}

async function submitAndPoll(): Promise<void> {
  const base = ($("service-url") as HTMLInputElement).value || "";
  const client = new ServiceClient(base);
  circuit.seed = parseInt(($("seed") as HTMLInputElement).value, 10) || 0;
  try {
    const submitted = await client.submit(circuitToQml(circuit));
    note(`job ${submitted.id} queued (${submitted.estimate_bytes} bytes, ` +
         `${submitted.engine})`);
    const status = await client.pollUntilDone(submitted.id, {
      intervalMs: 500,
      onStatus: (s) => note(`job ${submitted.id}: ${s.status}`),
    });
    if (status.status === "failed") {
      note(`job failed: ${status.error ?? "unknown error"}`, true);
      return;
    }
    lastResult = parseResultDocument(await client.result(submitted.id));
    shownStep = lastResult.kind === "trace" ? lastResult.records.length - 1 : 0;
    drawExplorer();
    note(`job ${submitted.id} done`);
  } catch (err) {
    if (err instanceof SubmitRejected && err.diagnostics.length > 0) {
      note(err.diagnostics.map((d) => `${d.line}:${d.column} ${d.message}`)
             .join("; "), true);
    } else if (err instanceof SubmitRejected && err.requiredBytes) {
      note(`rejected: needs ${err.requiredBytes} bytes`, true);
    } else {
      note(String(err), true);
    }
  }
}

// -- explorer -----------------------------------------------------------------

function drawExplorer(): void {
  const panel = $("explorer");
  if (!lastResult) {
    panel.innerHTML = "<p>No result loaded.</p>";
    return;
  }
  if (lastResult.kind === "spectrum") {
    const rows = lastResult.eigenvalues
      .map((ev, i) =>
        `<tr><td>${i}</td><td>${ev.v}</td><td>${ev.converged ? "yes" : "no"}</td></tr>`)
      .join("");
    panel.innerHTML =
      `<h3>Spectrum (${lastResult.engine})</h3>` +
      `<table class="spectrum"><tr><th>#</th><th>eigenvalue</th>` +
      `<th>converged</th></tr>${rows}</table>`;
    return;
  }
  const trace = lastResult;
  const nSteps = trace.records.length;
  shownStep = Math.min(Math.max(shownStep, 0), nSteps - 1);
  const record = trace.records[shownStep];
  const outcomes = record.outcomes
    .map((o) => `<li>qubits ${o.targets.join(",")} → ${o.bits} (p=${o.p})</li>`)
    .join("");
  panel.innerHTML =
    `<h3>Result (${trace.engine}, ${trace.rng})</h3>` +
    (trace.warnings.length
      ? `<p class="warn">${trace.warnings.join("<br>")}</p>` : "") +
    `<h4>Entropy by step</h4>${renderEntropyCurve(trace)}` +
    `<div class="scrub"><label>step
       <input type="range" id="step-scrub" min="1" max="${nSteps}"
              value="${shownStep + 1}"/></label>
       <span>${shownStep + 1} / ${nSteps}</span></div>` +
    `<h4>Base states (p ≥ threshold), phase as color</h4>` +
    renderListing(record, trace.nQubits) +
    `<h4>Bloch vectors</h4>` +
    renderBloch(record) +
    (outcomes ? `<h4>Measurements</h4><ul>${outcomes}</ul>` : "");
  const scrub = $("step-scrub") as HTMLInputElement;
  scrub.oninput = () => {
    shownStep = parseInt(scrub.value, 10) - 1;
    drawExplorer();
  };
}

export function start(): void {
  buildPalette();
  wireToolbar();
  drawGrid();
  drawExplorer();
  note("pick a gate, then click grid cells to place it; " +
       "click a placed gate with no palette selection to remove it");
}

start();
