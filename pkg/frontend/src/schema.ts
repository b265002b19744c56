// Versioned bench CSV schema. The column order is fixed; files carrying a
// different version or any extra/missing column are refused.

export const SCHEMA_VERSION = "famdp-bench/1";

export const COLUMNS = [
  "schema",
  "study",
  "planner",
  "instance",
  "m",
  "num_states",
  "gamma",
  "epsilon",
  "ordering_kind",
  "ordering_seed",
  "reads",
  "writes",
  "total_ops",
  "sweeps",
  "status",
] as const;

export type Column = (typeof COLUMNS)[number];

export const PLANNERS = ["mono", "lattice", "lattice_hot"] as const;
export type Planner = (typeof PLANNERS)[number];

export const PLANNER_LABELS: Record<Planner, string> = {
  mono: "mono",
  lattice: "lattice",
  lattice_hot: "lattice (hot start)",
};

export const PLANNER_COLORS: Record<Planner, string> = {
  mono: "#4878cf",
  lattice: "#2ca02c",
  lattice_hot: "#9467bd",
};

export interface BenchRecord {
  study: string;
  planner: Planner;
  instance: string;
  m: number;
  numStates: number;
  gamma: number;
  epsilon: number;
  orderingKind: string;
  orderingSeed: number | null;
  reads: number | null;
  writes: number | null;
  totalOps: number | null;
  sweeps: number | null;
  status: "ok" | "infeasible";
}

export class SchemaError extends Error {}
