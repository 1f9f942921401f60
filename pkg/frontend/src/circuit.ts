/**
 * Editor-side circuit model: a grid of qubits (rows) by time steps
 * (columns).  Placement enforces the engine's rule that gates within
 * one step touch disjoint qubits, so the editor can never produce a
 * document the validator rejects.
 */

import {
  WriteNode,
  XmlNode,
  findChild,
  findChildren,
  formatNumber,
  parseXml,
  writeXml,
} from "./qml.js";

export type GateKind =
  | "H" | "X" | "Y" | "Z" | "S" | "T"
  | "PHASE" | "RX" | "RY" | "RZ"
  | "CNOT" | "CZ" | "SWAP" | "TOFFOLI" | "FREDKIN"
  | "CUSTOM1" | "CUSTOM2"
  | "QFT" | "INVQFT" | "ORACLE" | "GROVERSTEP" | "GROVER" | "MODULO"
  | "EXP" | "MEASURE";

export interface PaletteEntry {
  kind: GateKind;
  targets: number | "register";
  controls: number;
  needsTheta?: boolean;
  needsMarked?: boolean;
  needsIterations?: boolean;
  needsMatrix?: 2 | 4;
  isModulo?: boolean;
  isExp?: boolean;
  label: string;
}

export const PALETTE: PaletteEntry[] = [
  { kind: "H", targets: 1, controls: 0, label: "Hadamard" },
  { kind: "X", targets: 1, controls: 0, label: "Pauli X" },
  { kind: "Y", targets: 1, controls: 0, label: "Pauli Y" },
  { kind: "Z", targets: 1, controls: 0, label: "Pauli Z" },
  { kind: "S", targets: 1, controls: 0, label: "Phase S" },
  { kind: "T", targets: 1, controls: 0, label: "Phase T" },
  { kind: "PHASE", targets: 1, controls: 0, needsTheta: true, label: "Phase(θ)" },
  { kind: "RX", targets: 1, controls: 0, needsTheta: true, label: "Rx(θ)" },
  { kind: "RY", targets: 1, controls: 0, needsTheta: true, label: "Ry(θ)" },
  { kind: "RZ", targets: 1, controls: 0, needsTheta: true, label: "Rz(θ)" },
  { kind: "CNOT", targets: 1, controls: 1, label: "CNOT" },
  { kind: "CZ", targets: 1, controls: 1, label: "CZ" },
  { kind: "SWAP", targets: 2, controls: 0, label: "Swap" },
  { kind: "TOFFOLI", targets: 1, controls: 2, label: "Toffoli" },
  { kind: "FREDKIN", targets: 2, controls: 1, label: "Fredkin" },
  { kind: "CUSTOM1", targets: 1, controls: 0, needsMatrix: 2, label: "Custom 1q" },
  { kind: "CUSTOM2", targets: 2, controls: 0, needsMatrix: 4, label: "Custom 2q" },
  { kind: "QFT", targets: "register", controls: 0, label: "QFT" },
  { kind: "INVQFT", targets: "register", controls: 0, label: "QFT†" },
  { kind: "ORACLE", targets: "register", controls: 0, needsMarked: true, label: "Oracle" },
  { kind: "GROVERSTEP", targets: "register", controls: 0, needsMarked: true, label: "Grover step" },
  { kind: "GROVER", targets: "register", controls: 0, needsMarked: true, needsIterations: true, label: "Grover" },
  { kind: "MODULO", targets: "register", controls: 0, isModulo: true, label: "Modulo" },
  { kind: "EXP", targets: "register", controls: 0, isExp: true, label: "exp(-itH)" },
  { kind: "MEASURE", targets: "register", controls: 0, label: "Measure" },
];

export interface Coupling {
  i: number;
  j: number;
  jij: number;
  e2: number[]; // 9 reals row-major
}

export interface FieldTerm {
  i: number;
  e1: [number, number, number];
}

export interface HamiltonianModel {
  couplings: Coupling[];
  fields: FieldTerm[];
}

export interface PlacedGate {
  kind: GateKind;
  targets: number[];
  controls: number[];
  theta?: number;
  marked?: number[];
  iterations?: number;
  a?: number;
  modn?: number;
  xreg?: number[];
  yreg?: number[];
  matrix?: Array<[number, number]>; // row-major re/im pairs
  hamRef?: string;
  model?: HamiltonianModel;
  t?: number;
  nSlices?: number;
  order?: "1" | "2" | "4" | "exact";
}

export interface Circuit {
  nQubits: number;
  seed: number;
  threshold: number;
  steps: PlacedGate[][];
  hamiltonians: Map<string, HamiltonianModel>;
}

export function emptyCircuit(nQubits: number, seed = 0): Circuit {
  return {
    nQubits,
    seed,
    threshold: 1e-4,
    steps: [],
    hamiltonians: new Map(),
  };
}

export function gateSupport(gate: PlacedGate): number[] {
  if (gate.kind === "MODULO") {
    return [...(gate.xreg ?? []), ...(gate.yreg ?? [])];
  }
  if (gate.kind === "EXP" && gate.model) {
    const touched = new Set<number>();
    for (const c of gate.model.couplings) {
      touched.add(c.i);
      touched.add(c.j);
    }
    for (const f of gate.model.fields) touched.add(f.i);
    return [...touched].sort((a, b) => a - b);
  }
  return [...gate.controls, ...gate.targets];
}

/** Reason a placement is rejected, or null when it is allowed. */
export function placementError(
  circuit: Circuit,
  column: number,
  gate: PlacedGate,
): string | null {
  const support = gateSupport(gate);
  if (support.length === 0) return "gate touches no qubits";
  const seen = new Set<number>();
  for (const q of support) {
    if (q < 1 || q > circuit.nQubits) {
      return `qubit ${q} is outside 1..${circuit.nQubits}`;
    }
    if (seen.has(q)) return `qubit ${q} listed twice`;
    seen.add(q);
  }
  const step = circuit.steps[column] ?? [];
  for (const other of step) {
    for (const q of gateSupport(other)) {
      if (seen.has(q)) {
        return `qubit ${q} is already used by ${other.kind} in this step`;
      }
    }
  }
  return null;
}

/** Place a gate, growing the grid as needed; throws on rule violations. */
export function placeGate(circuit: Circuit, column: number, gate: PlacedGate): void {
  const error = placementError(circuit, column, gate);
  if (error) throw new Error(error);
  while (circuit.steps.length <= column) circuit.steps.push([]);
  circuit.steps[column].push(gate);
}

export function removeGate(circuit: Circuit, column: number, gate: PlacedGate): void {
  const step = circuit.steps[column];
  if (!step) return;
  const idx = step.indexOf(gate);
  if (idx >= 0) step.splice(idx, 1);
  while (circuit.steps.length > 0 &&
         circuit.steps[circuit.steps.length - 1].length === 0) {
    circuit.steps.pop();
  }
}

// ---------------------------------------------------------------------------
// QML serialization (mirrors the service's normalized layout exactly)

const ints = (qs: number[]) => qs.join(",");

function hamiltonianNode(model: HamiltonianModel, name: string | null): WriteNode {
  const attrs: Array<[string, string]> = name !== null ? [["name", name]] : [];
  const children: WriteNode[] = [];
  const pairs = [...model.couplings].sort((a, b) => a.i - b.i || a.j - b.j);
  for (const c of pairs) {
    children.push({
      tag: "coupling",
      attrs: [
        ["i", String(c.i)],
        ["j", String(c.j)],
        ["jij", formatNumber(c.jij)],
        ["e2", c.e2.map(formatNumber).join(",")],
      ],
    });
  }
  for (const f of [...model.fields].sort((a, b) => a.i - b.i)) {
    children.push({
      tag: "field",
      attrs: [["i", String(f.i)], ["e1", f.e1.map(formatNumber).join(",")]],
    });
  }
  return { tag: "hamiltonian", attrs, children };
}

function gateNode(gate: PlacedGate): WriteNode {
  if (gate.kind === "MEASURE") {
    return { tag: "measure", attrs: [["targets", ints(gate.targets)]] };
  }
  if (gate.kind === "EXP") {
    const attrs: Array<[string, string]> = [];
    if (gate.hamRef) attrs.push(["ham", gate.hamRef]);
    attrs.push(["t", formatNumber(gate.t ?? 0)]);
    attrs.push(["n", String(gate.nSlices ?? 1)]);
    attrs.push(["order", gate.order ?? "2"]);
    const node: WriteNode = { tag: "exp", attrs };
    if (!gate.hamRef && gate.model) {
      node.children = [hamiltonianNode(gate.model, null)];
    }
    return node;
  }
  const attrs: Array<[string, string]> = [["kind", gate.kind]];
  if (gate.kind === "MODULO") {
    attrs.push(["a", String(gate.a ?? 0)]);
    attrs.push(["modn", String(gate.modn ?? 1)]);
    attrs.push(["xreg", ints(gate.xreg ?? [])]);
    attrs.push(["yreg", ints(gate.yreg ?? [])]);
    return { tag: "gate", attrs };
  }
  attrs.push(["targets", ints(gate.targets)]);
  if (gate.controls.length > 0) attrs.push(["controls", ints(gate.controls)]);
  if (gate.theta !== undefined) attrs.push(["theta", formatNumber(gate.theta)]);
  if (gate.kind === "GROVER") {
    attrs.push(["iterations", String(gate.iterations ?? 0)]);
  }
  if (gate.marked !== undefined) {
    attrs.push(["marked", ints([...gate.marked].sort((a, b) => a - b))]);
  }
  if (gate.matrix !== undefined) {
    attrs.push([
      "matrix",
      gate.matrix.map(([re, im]) => `${formatNumber(re)},${formatNumber(im)}`).join(";"),
    ]);
  }
  return { tag: "gate", attrs };
}

/** Normalized QML document for the circuit; byte-compatible with the
 * service's own serializer. */
export function circuitToQml(circuit: Circuit): string {
  const jobAttrs: Array<[string, string]> = [
    ["type", "circuit"],
    ["nqubits", String(circuit.nQubits)],
    ["seed", String(circuit.seed)],
    ["threshold", formatNumber(circuit.threshold)],
  ];
  const children: WriteNode[] = [];
  for (const name of [...circuit.hamiltonians.keys()].sort()) {
    children.push(hamiltonianNode(circuit.hamiltonians.get(name)!, name));
  }
  for (const step of circuit.steps) {
    children.push({ tag: "step", attrs: [], children: step.map(gateNode) });
  }
  const job: WriteNode = { tag: "job", attrs: jobAttrs, children };
  const root: WriteNode = {
    tag: "qml",
    attrs: [["version", "1.0"]],
    children: [job],
  };
  return writeXml(root);
}

// ---------------------------------------------------------------------------
// QML loading (for opening saved jobs and jobs embedded in results)

const intList = (raw: string | undefined): number[] =>
  raw === undefined || raw.trim() === ""
    ? []
    : raw.split(",").map((s) => parseInt(s.trim(), 10));

function parseHamiltonian(node: XmlNode): HamiltonianModel {
  const model: HamiltonianModel = { couplings: [], fields: [] };
  for (const c of findChildren(node, "coupling")) {
    model.couplings.push({
      i: parseInt(c.attrs.i, 10),
      j: parseInt(c.attrs.j, 10),
      jij: parseFloat(c.attrs.jij),
      e2: c.attrs.e2.split(",").map(parseFloat),
    });
  }
  for (const f of findChildren(node, "field")) {
    const [x, y, z] = f.attrs.e1.split(",").map(parseFloat);
    model.fields.push({ i: parseInt(f.attrs.i, 10), e1: [x, y, z] });
  }
  return model;
}

function parseGate(node: XmlNode): PlacedGate {
  if (node.tag === "measure") {
    return { kind: "MEASURE", targets: intList(node.attrs.targets), controls: [] };
  }
  if (node.tag === "exp") {
    const inline = findChild(node, "hamiltonian");
    return {
      kind: "EXP",
      targets: [],
      controls: [],
      hamRef: node.attrs.ham,
      model: inline ? parseHamiltonian(inline) : undefined,
      t: parseFloat(node.attrs.t),
      nSlices: node.attrs.n !== undefined ? parseInt(node.attrs.n, 10) : 1,
      order: (node.attrs.order ?? "2") as PlacedGate["order"],
    };
  }
  const gate: PlacedGate = {
    kind: node.attrs.kind as GateKind,
    targets: intList(node.attrs.targets),
    controls: intList(node.attrs.controls),
  };
  if (node.attrs.theta !== undefined) gate.theta = parseFloat(node.attrs.theta);
  if (node.attrs.marked !== undefined) gate.marked = intList(node.attrs.marked);
  if (node.attrs.iterations !== undefined) {
    gate.iterations = parseInt(node.attrs.iterations, 10);
  }
  if (node.attrs.a !== undefined) gate.a = parseInt(node.attrs.a, 10);
  if (node.attrs.modn !== undefined) gate.modn = parseInt(node.attrs.modn, 10);
  if (node.attrs.xreg !== undefined) gate.xreg = intList(node.attrs.xreg);
  if (node.attrs.yreg !== undefined) gate.yreg = intList(node.attrs.yreg);
  if (node.attrs.matrix !== undefined) {
    gate.matrix = node.attrs.matrix.split(";").map((entry) => {
      const [re, im] = entry.split(",").map(parseFloat);
      return [re, im] as [number, number];
    });
  }
  return gate;
}

export function jobNodeToCircuit(job: XmlNode): Circuit {
  const circuit = emptyCircuit(
    parseInt(job.attrs.nqubits, 10),
    job.attrs.seed !== undefined ? parseInt(job.attrs.seed, 10) : 0,
  );
  if (job.attrs.threshold !== undefined) {
    circuit.threshold = parseFloat(job.attrs.threshold);
  }
  for (const ham of findChildren(job, "hamiltonian")) {
    if (ham.attrs.name) {
      circuit.hamiltonians.set(ham.attrs.name, parseHamiltonian(ham));
    }
  }
  for (const step of findChildren(job, "step")) {
    circuit.steps.push(step.children.map(parseGate));
  }
  return circuit;
}

/** Load a job document, or the job embedded in a result document. */
export function qmlToCircuit(text: string): Circuit {
  const root = parseXml(text);
  if (root.tag !== "qml") throw new Error("not a QML document");
  let job = findChild(root, "job");
  if (!job) {
    const result = findChild(root, "result");
    if (result) job = findChild(result, "job");
  }
  if (!job) throw new Error("document contains no job");
  if (job.attrs.type !== "circuit") {
    throw new Error(`the editor edits circuit jobs, got ${job.attrs.type}`);
  }
  return jobNodeToCircuit(job);
}
