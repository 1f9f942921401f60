import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  entropySeries,
  parseResultDocument,
  renderBloch,
  renderEntropyCurve,
  renderListing,
} from "../src/results.js";

const fixture = (name: string) =>
  readFileSync(join(__dirname, "fixtures", name), "utf-8");

describe("shor result fixture", () => {
  const result = parseResultDocument(fixture("shor9.result.qml"));

  it("is a trace with four step records", () => {
    expect(result.kind).toBe("trace");
    if (result.kind !== "trace") return;
    expect(result.engine).toBe("state-engine");
    expect(result.records.map((r) => r.step)).toEqual([1, 2, 3, 4]);
  });

  it("entropy reaches the x-register size after step 1", () => {
    if (result.kind !== "trace") return;
    const series = entropySeries(result);
    expect(Math.abs(series[0] - 6.0)).toBeLessThan(1e-9);
  });

  it("post-modulo record has vanished Bloch vectors", () => {
    if (result.kind !== "trace") return;
    const rows = result.records[1].bloch;
    const norms = rows.map((r) => Math.hypot(r.x, r.y, r.z));
    expect(Math.min(...norms)).toBeLessThan(1e-9);
  });

  it("records the mid-circuit measurement", () => {
    if (result.kind !== "trace") return;
    const outcome = result.records[2].outcomes[0];
    expect(outcome.targets).toEqual([7, 8, 9]);
    expect(outcome.bits).toHaveLength(3);
  });

  it("final listing is dominant state plus low tail", () => {
    if (result.kind !== "trace") return;
    const listing = result.records[3].listing;
    expect(listing[0].p).toBeGreaterThan(0.3);
    expect(listing.filter((e) => e.p < 0.01).length).toBeGreaterThanOrEqual(40);
  });
});

describe("entropy curve rendering", () => {
  it("draws one point per step and encodes the values", () => {
    const result = parseResultDocument(fixture("shor9.result.qml"));
    if (result.kind !== "trace") return;
    const svg = renderEntropyCurve(result);
    expect(svg).toContain("<polyline");
    expect((svg.match(/<circle/g) ?? []).length).toBe(4);
    const tip = /step 1: S = ([\d.e+-]+)/.exec(svg);
    expect(tip).not.toBeNull();
    expect(Math.abs(parseFloat(tip![1]) - 6.0)).toBeLessThan(1e-9);
  });
});

describe("bell result fixture", () => {
  const result = parseResultDocument(fixture("bell.result.qml"));

  it("bloch bars are at zero in the final step", () => {
    if (result.kind !== "trace") return;
    const rows = result.records[1].bloch;
    for (const row of rows) {
      expect(Math.hypot(row.x, row.y, row.z)).toBeLessThan(1e-9);
    }
    const svg = renderBloch(result.records[1]);
    expect(svg).toContain("qubit 1");
    expect(svg).toContain("qubit 2");
  });

  it("listing renders both basis states with phases", () => {
    if (result.kind !== "trace") return;
    const svg = renderListing(result.records[1], result.nQubits);
    expect((svg.match(/<rect/g) ?? []).length).toBe(2);
    expect(svg).toContain("|00⟩");
    expect(svg).toContain("|11⟩");
  });
});

describe("spectrum documents", () => {
  it("parses eigenvalues with convergence flags", () => {
    const doc = [
      '<qml version="1.0">',
      '  <result engine="spectrum-dense">',
      '    <job type="spectrum-full" nqubits="1" seed="0" threshold="0.0001">',
      '      <hamiltonian name="f">',
      '        <field i="1" e1="2.0,0.0,0.0"/>',
      "      </hamiltonian>",
      "    </job>",
      "    <spectrum>",
      '      <ev v="-2.0" converged="true"/>',
      '      <ev v="2.0" converged="false"/>',
      "    </spectrum>",
      "  </result>",
      "</qml>",
    ].join("\n");
    const result = parseResultDocument(doc);
    expect(result.kind).toBe("spectrum");
    if (result.kind !== "spectrum") return;
    expect(result.eigenvalues).toEqual([
      { v: -2.0, converged: true },
      { v: 2.0, converged: false },
    ]);
  });
});
