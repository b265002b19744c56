import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { parseBenchCsv } from "../src/csv.js";
import { renderOrderings, renderScaling } from "../src/render.js";
import { SchemaError, COLUMNS, SCHEMA_VERSION } from "../src/schema.js";
import { boxStats, quantile } from "../src/stats.js";

const FIXTURES = path.join(__dirname, "fixtures");

function fixture(name: string): string {
  return fs.readFileSync(path.join(FIXTURES, name), "utf-8");
}

describe("csv parsing", () => {
  it("parses the ordering study fixture", () => {
    const records = parseBenchCsv(fixture("ordering_study.csv"));
    expect(records.length).toBe(18);
    expect(records.every((r) => r.study === "orderings")).toBe(true);
    expect(records.filter((r) => r.orderingKind === "manhattan").length).toBe(3);
  });

  it("parses infeasible scaling rows with null counts", () => {
    const records = parseBenchCsv(fixture("scaling_study.csv"));
    const infeasible = records.filter((r) => r.status === "infeasible");
    expect(infeasible.length).toBe(1);
    expect(infeasible[0].planner).toBe("mono");
    expect(infeasible[0].totalOps).toBeNull();
  });

  it("refuses a wrong schema version with expected and found", () => {
    const text = fixture("ordering_study.csv").replaceAll(SCHEMA_VERSION, "famdp-bench/999");
    expect(() => parseBenchCsv(text)).toThrowError(/expected famdp-bench\/1.*found famdp-bench\/999/);
  });

  it("refuses unknown columns", () => {
    const lines = fixture("ordering_study.csv").trimEnd().split("\n");
    const withExtra = [lines[0] + ",surprise",
                       ...lines.slice(1).map((l) => l + ",1")].join("\n");
    expect(() => parseBenchCsv(withExtra)).toThrowError(SchemaError);
    expect(() => parseBenchCsv(withExtra)).toThrowError(/unexpected columns/);
  });

  it("refuses an empty CSV", () => {
    const headerOnly = COLUMNS.join(",") + "\n";
    expect(() => parseBenchCsv(headerOnly)).toThrowError(/no records/);
  });
});

describe("box statistics", () => {
  it("computes interpolated quartiles", () => {
    const stats = boxStats([1, 2, 3, 4]);
    expect(stats.min).toBe(1);
    expect(stats.q1).toBe(1.75);
    expect(stats.median).toBe(2.5);
    expect(stats.q3).toBe(3.25);
    expect(stats.max).toBe(4);
  });

  it("handles single values", () => {
    expect(quantile([7], 0.5)).toBe(7);
  });
});

describe("figure rendering", () => {
  it("renders the orderings figure with a reference line", () => {
    const records = parseBenchCsv(fixture("ordering_study.csv"));
    const manifest = JSON.parse(fixture("ordering_study_manifest.json"));
    const svg = renderOrderings(records, manifest.mono_oracle.total_ops);
    expect(svg).toContain("<svg");
    expect(svg).toContain("value function operations");
    expect(svg).toContain("mono oracle ordering");
    expect(svg).toContain("lattice (hot start)");
  });

  it("renders the scaling figure with infeasible markers", () => {
    const records = parseBenchCsv(fixture("scaling_study.csv"));
    const svg = renderScaling(records);
    expect(svg).toContain("number of actuators");
    expect(svg).toContain("infeasible");
  });

  it("twice-rendered outputs are content-identical", () => {
    const orderingRecords = parseBenchCsv(fixture("ordering_study.csv"));
    expect(renderOrderings(orderingRecords, 12345)).toBe(
      renderOrderings(parseBenchCsv(fixture("ordering_study.csv")), 12345));
    const scalingRecords = parseBenchCsv(fixture("scaling_study.csv"));
    expect(renderScaling(scalingRecords)).toBe(
      renderScaling(parseBenchCsv(fixture("scaling_study.csv"))));
  });

  it("rejects rendering the wrong study kind", () => {
    const records = parseBenchCsv(fixture("ordering_study.csv"));
    expect(() => renderScaling(records)).toThrowError(/expected a "scaling" study/);
  });
});
