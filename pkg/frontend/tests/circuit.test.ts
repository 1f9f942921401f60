import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  circuitToQml,
  emptyCircuit,
  placeGate,
  placementError,
  qmlToCircuit,
  removeGate,
} from "../src/circuit.js";

const fixture = (name: string) =>
  readFileSync(join(__dirname, "fixtures", name), "utf-8");

describe("drawing the Bell circuit", () => {
  it("serializes to the canonical normalized document", () => {
    const circuit = emptyCircuit(2, 7);
    placeGate(circuit, 0, { kind: "H", targets: [1], controls: [] });
    placeGate(circuit, 1, { kind: "CNOT", targets: [2], controls: [1] });
    expect(circuitToQml(circuit)).toBe(fixture("bell.canonical.qml"));
  });

  it("round-trips through the loader", () => {
    const circuit = emptyCircuit(2, 7);
    placeGate(circuit, 0, { kind: "H", targets: [1], controls: [] });
    placeGate(circuit, 1, { kind: "CNOT", targets: [2], controls: [1] });
    const text = circuitToQml(circuit);
    expect(circuitToQml(qmlToCircuit(text))).toBe(text);
  });
});

describe("disjoint-support rule at edit time", () => {
  it("rejects two gates on one qubit in the same column", () => {
    const circuit = emptyCircuit(3);
    placeGate(circuit, 0, { kind: "H", targets: [2], controls: [] });
    const error = placementError(circuit, 0, {
      kind: "CNOT", targets: [3], controls: [2],
    });
    expect(error).toMatch(/qubit 2 is already used by H/);
    expect(() =>
      placeGate(circuit, 0, { kind: "CNOT", targets: [3], controls: [2] }),
    ).toThrow(/already used/);
  });

  it("allows the same qubit in the next column", () => {
    const circuit = emptyCircuit(3);
    placeGate(circuit, 0, { kind: "H", targets: [2], controls: [] });
    expect(
      placementError(circuit, 1, { kind: "X", targets: [2], controls: [] }),
    ).toBeNull();
  });

  it("rejects out-of-range and duplicate qubits", () => {
    const circuit = emptyCircuit(2);
    expect(
      placementError(circuit, 0, { kind: "H", targets: [5], controls: [] }),
    ).toMatch(/outside/);
    expect(
      placementError(circuit, 0, { kind: "SWAP", targets: [1, 1], controls: [] }),
    ).toMatch(/twice/);
  });

  it("uses register unions for MODULO and model support for EXP", () => {
    const circuit = emptyCircuit(6);
    placeGate(circuit, 0, {
      kind: "MODULO", targets: [], controls: [],
      a: 2, modn: 6, xreg: [1, 2, 3], yreg: [4, 5, 6],
    });
    const error = placementError(circuit, 0, {
      kind: "EXP", targets: [], controls: [],
      t: 1, nSlices: 4, order: "2",
      model: { couplings: [{ i: 5, j: 6, jij: 1, e2: [0,0,0,0,0,0,0,0,1] }], fields: [] },
    });
    expect(error).toMatch(/qubit 5|qubit 6/);
  });
});

describe("gate removal", () => {
  it("drops the gate and trims empty trailing steps", () => {
    const circuit = emptyCircuit(2);
    const h = { kind: "H" as const, targets: [1], controls: [] };
    placeGate(circuit, 0, h);
    removeGate(circuit, 0, h);
    expect(circuit.steps.length).toBe(0);
  });
});

describe("loading QML", () => {
  it("reconstructs the circuit embedded in a result file", () => {
    const circuit = qmlToCircuit(fixture("shor9.result.qml"));
    expect(circuit.nQubits).toBe(9);
    expect(circuit.steps.length).toBe(4);
    expect(circuit.steps[0].map((g) => g.kind)).toEqual(
      ["H", "H", "H", "H", "H", "H"],
    );
    expect(circuit.steps[1][0].kind).toBe("MODULO");
    expect(circuit.steps[1][0].xreg).toEqual([1, 2, 3, 4, 5, 6]);
    expect(circuit.steps[2][0].kind).toBe("MEASURE");
    expect(circuit.steps[3][0].kind).toBe("QFT");
  });

  it("keeps exp gates with inline models intact through a round trip", () => {
    const text = [
      '<qml version="1.0">',
      '  <job type="circuit" nqubits="2" seed="0" threshold="0.0001">',
      "    <step>",
      '      <exp t="1.0" n="4" order="4">',
      "        <hamiltonian>",
      '          <coupling i="1" j="2" jij="0.5" e2="0.0,0.0,0.0,0.0,0.0,0.0,0.0,0.0,1.0"/>',
      '          <field i="1" e1="0.3,0.0,0.0"/>',
      "        </hamiltonian>",
      "      </exp>",
      "    </step>",
      "  </job>",
      "</qml>",
      "",
    ].join("\n");
    const circuit = qmlToCircuit(text);
    expect(circuitToQml(circuit)).toBe(text);
  });

  it("refuses non-circuit documents", () => {
    const doc = '<qml version="1.0"><job type="spectrum-full" nqubits="2"/></qml>';
    expect(() => qmlToCircuit(doc)).toThrow(/spectrum-full/);
  });
});
