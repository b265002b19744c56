import Papa from "papaparse";

import {
  BenchRecord,
  COLUMNS,
  Planner,
  PLANNERS,
  SCHEMA_VERSION,
  SchemaError,
} from "./schema.js";

function num(value: string, field: string, row: number): number {
  const parsed = Number(value);
  if (value === "" || !Number.isFinite(parsed)) {
    throw new SchemaError(`row ${row}: field ${field} is not a number: ${JSON.stringify(value)}`);
  }
  return parsed;
}

function optionalNum(value: string, field: string, row: number): number | null {
  return value === "" ? null : num(value, field, row);
}

export function parseBenchCsv(text: string): BenchRecord[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  const expected = [...COLUMNS];
  if (fields.length !== expected.length || expected.some((c, i) => fields[i] !== c)) {
    throw new SchemaError(
      `unexpected columns: expected [${expected.join(", ")}], found [${fields.join(", ")}]`,
    );
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("CSV carries no records; refusing to render an empty figure");
  }
  return parsed.data.map((row, i) => {
    if (row.schema !== SCHEMA_VERSION) {
      throw new SchemaError(
        `schema version mismatch: expected ${SCHEMA_VERSION}, found ${row.schema}`,
      );
    }
    if (!(PLANNERS as readonly string[]).includes(row.planner)) {
      throw new SchemaError(`row ${i}: unknown planner ${JSON.stringify(row.planner)}`);
    }
    if (row.status !== "ok" && row.status !== "infeasible") {
      throw new SchemaError(`row ${i}: unknown status ${JSON.stringify(row.status)}`);
    }
    return {
      study: row.study,
      planner: row.planner as Planner,
      instance: row.instance,
      m: num(row.m, "m", i),
      numStates: num(row.num_states, "num_states", i),
      gamma: num(row.gamma, "gamma", i),
      epsilon: num(row.epsilon, "epsilon", i),
      orderingKind: row.ordering_kind,
      orderingSeed: optionalNum(row.ordering_seed, "ordering_seed", i),
      reads: optionalNum(row.reads, "reads", i),
      writes: optionalNum(row.writes, "writes", i),
      totalOps: optionalNum(row.total_ops, "total_ops", i),
      sweeps: optionalNum(row.sweeps, "sweeps", i),
      status: row.status,
    };
  });
}
