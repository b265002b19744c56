import {
  BenchRecord,
  PLANNERS,
  Planner,
  PLANNER_COLORS,
  PLANNER_LABELS,
  SchemaError,
} from "./schema.js";
import { boxStats } from "./stats.js";
import { compact, document, el, fmt, line, linearScale, logScale, text } from "./svg.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 32, bottom: 64, left: 88 };
const REF_COLOR = "#ff7f0e";

function plotArea() {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

function requireStudy(records: BenchRecord[], study: string): void {
  const studies = [...new Set(records.map((r) => r.study))];
  if (studies.length !== 1 || studies[0] !== study) {
    throw new SchemaError(
      `expected a ${JSON.stringify(study)} study, found ${JSON.stringify(studies)}`,
    );
  }
}

function presentPlanners(records: BenchRecord[]): Planner[] {
  const present = new Set(records.map((r) => r.planner));
  return PLANNERS.filter((p) => present.has(p));
}

function yAxis(scale: { ticks: number[] } & ((v: number) => number),
               labels: (v: number) => string): string[] {
  const { x0, x1 } = plotArea();
  const out: string[] = [];
  for (const tick of scale.ticks) {
    const y = scale(tick);
    out.push(line(x0, y, x1, y, { stroke: "#ddd", "stroke-width": 1 }));
    out.push(text(x0 - 8, y + 4, labels(tick), {
      "text-anchor": "end", "font-size": 12,
    }));
  }
  return out;
}

function yAxisTitle(title: string): string {
  const { y0, y1 } = plotArea();
  const cy = (y0 + y1) / 2;
  return text(22, cy, title, {
    "text-anchor": "middle", "font-size": 14,
    transform: `rotate(-90 22 ${fmt(cy)})`,
  });
}

/**
 * Box-whisker chart of value-function operations per planner over the random
 * backup orderings; the Manhattan run is a diamond marker and the mono
 * oracle run (when given) a dashed horizontal reference line.
 */
export function renderOrderings(records: BenchRecord[],
                                referenceOps: number | null = null): string {
  requireStudy(records, "orderings");
  const planners = presentPlanners(records);
  const area = plotArea();

  const groups = planners.map((planner) => {
    const random = records
      .filter((r) => r.planner === planner && r.orderingKind === "random")
      .map((r) => {
        if (r.totalOps === null) throw new SchemaError("random record without ops");
        return r.totalOps;
      });
    if (random.length === 0) {
      throw new SchemaError(`no random-ordering records for planner ${planner}`);
    }
    const manhattan = records.find(
      (r) => r.planner === planner && r.orderingKind === "manhattan");
    return {
      planner,
      box: boxStats(random),
      manhattan: manhattan?.totalOps ?? null,
    };
  });

  let lo = Math.min(...groups.map((g) => Math.min(g.box.min, g.manhattan ?? g.box.min)));
  let hi = Math.max(...groups.map((g) => Math.max(g.box.max, g.manhattan ?? g.box.max)));
  if (referenceOps !== null) {
    lo = Math.min(lo, referenceOps);
    hi = Math.max(hi, referenceOps);
  }
  const pad = (hi - lo || hi || 1) * 0.08;
  const y = linearScale(Math.max(0, lo - pad), hi + pad, area.y0, area.y1);

  const slot = (area.x1 - area.x0) / groups.length;
  const boxWidth = Math.min(72, slot * 0.4);
  const body: string[] = [];

  body.push(...yAxis(y, compact));
  body.push(yAxisTitle("value function operations"));

  groups.forEach((group, i) => {
    const cx = area.x0 + slot * (i + 0.5);
    const color = PLANNER_COLORS[group.planner];
    const b = group.box;
    // whiskers with caps
    body.push(line(cx, y(b.min), cx, y(b.q1), { stroke: color }));
    body.push(line(cx, y(b.q3), cx, y(b.max), { stroke: color }));
    for (const w of [b.min, b.max]) {
      body.push(line(cx - boxWidth / 4, y(w), cx + boxWidth / 4, y(w), { stroke: color }));
    }
    body.push(el("rect", {
      x: cx - boxWidth / 2, y: y(b.q3),
      width: boxWidth, height: Math.max(1, y(b.q1) - y(b.q3)),
      fill: color, "fill-opacity": "0.25", stroke: color,
    }));
    body.push(line(cx - boxWidth / 2, y(b.median), cx + boxWidth / 2, y(b.median),
                   { stroke: color, "stroke-width": 2 }));
    if (group.manhattan !== null) {
      const my = y(group.manhattan);
      body.push(el("path", {
        d: `M ${fmt(cx)} ${fmt(my - 6)} L ${fmt(cx + 6)} ${fmt(my)} ` +
           `L ${fmt(cx)} ${fmt(my + 6)} L ${fmt(cx - 6)} ${fmt(my)} Z`,
        fill: "#222",
      }));
    }
    body.push(text(cx, area.y0 + 22, PLANNER_LABELS[group.planner],
                   { "text-anchor": "middle", "font-size": 13 }));
    body.push(text(cx, area.y0 + 38, `${b.count} random orderings`,
                   { "text-anchor": "middle", "font-size": 10, fill: "#666" }));
  });

  if (referenceOps !== null) {
    const ry = y(referenceOps);
    body.push(line(area.x0, ry, area.x1, ry, {
      stroke: REF_COLOR, "stroke-width": 2, "stroke-dasharray": "6 4",
    }));
    body.push(text(area.x1, ry - 6, "mono oracle ordering", {
      "text-anchor": "end", "font-size": 11, fill: REF_COLOR,
    }));
  }

  const meta = records[0];
  body.push(text(WIDTH / 2, 24,
                 "value function operations vs state backup ordering", {
                   "text-anchor": "middle", "font-size": 15,
                 }));
  body.push(text(WIDTH / 2, 42,
                 `${meta.instance}, gamma=${meta.gamma}, epsilon=${meta.epsilon}`, {
                   "text-anchor": "middle", "font-size": 11, fill: "#666",
                 }));
  body.push(line(area.x0, area.y0, area.x1, area.y0));
  body.push(line(area.x0, area.y0, area.x0, area.y1));
  // diamond legend marker
  body.push(el("path", {
    d: `M ${fmt(area.x1 - 150)} ${fmt(area.y1 + 2)} l 5 5 l -5 5 l -5 -5 Z`,
    fill: "#222",
  }));
  body.push(text(area.x1 - 140, area.y1 + 11, "Manhattan ordering",
                 { "font-size": 11 }));
  return document(WIDTH, HEIGHT, body);
}

/**
 * Ops vs actuator count, log-scale ops, one series per planner. Mono points
 * past its capacity cap are marked as infeasible crosses on the top edge.
 */
export function renderScaling(records: BenchRecord[]): string {
  requireStudy(records, "scaling");
  const planners = presentPlanners(records);
  const area = plotArea();
  const ms = [...new Set(records.map((r) => r.m))].sort((a, b) => a - b);
  if (ms.length === 0) throw new SchemaError("no actuator counts in the records");

  const ok = records.filter((r) => r.status === "ok");
  if (ok.length === 0) throw new SchemaError("no feasible records to plot");
  const opsValues = ok.map((r) => {
    if (r.totalOps === null) throw new SchemaError("ok record without ops");
    return r.totalOps;
  });
  const y = logScale(Math.min(...opsValues) / 1.5, Math.max(...opsValues) * 1.5,
                     area.y0, area.y1);
  const xSpan = area.x1 - area.x0;
  const x = (m: number) =>
    area.x0 + ((m - ms[0]) / Math.max(1, ms[ms.length - 1] - ms[0])) * xSpan;

  const body: string[] = [];
  body.push(...yAxis(y, (t) => `1e${Math.round(Math.log10(t))}`));
  body.push(yAxisTitle("value function operations"));
  for (const m of ms) {
    body.push(text(x(m), area.y0 + 20, String(m),
                   { "text-anchor": "middle", "font-size": 12 }));
  }
  body.push(text((area.x0 + area.x1) / 2, area.y0 + 42, "number of actuators",
                 { "text-anchor": "middle", "font-size": 14 }));

  planners.forEach((planner, i) => {
    const color = PLANNER_COLORS[planner];
    const series = ms
      .map((m) => records.find((r) => r.planner === planner && r.m === m))
      .filter((r): r is BenchRecord => r !== undefined);
    const okPoints = series.filter((r) => r.status === "ok");
    const path = okPoints
      .map((r, j) => `${j === 0 ? "M" : "L"} ${fmt(x(r.m))} ${fmt(y(r.totalOps!))}`)
      .join(" ");
    if (okPoints.length > 1) {
      body.push(el("path", { d: path, fill: "none", stroke: color, "stroke-width": 2 }));
    }
    for (const r of okPoints) {
      body.push(el("circle", { cx: x(r.m), cy: y(r.totalOps!), r: 4, fill: color }));
    }
    for (const r of series.filter((s) => s.status === "infeasible")) {
      const cx = x(r.m);
      const cy = area.y1 + 10;
      body.push(el("path", {
        d: `M ${fmt(cx - 5)} ${fmt(cy - 5)} L ${fmt(cx + 5)} ${fmt(cy + 5)} ` +
           `M ${fmt(cx - 5)} ${fmt(cy + 5)} L ${fmt(cx + 5)} ${fmt(cy - 5)}`,
        stroke: color, "stroke-width": 2, fill: "none",
      }));
      body.push(text(cx, cy + 18, "infeasible", {
        "text-anchor": "middle", "font-size": 9, fill: color,
      }));
    }
    // legend
    const lx = area.x0 + 12;
    const ly = area.y1 + 14 + 16 * i;
    body.push(line(lx, ly - 4, lx + 18, ly - 4, { stroke: color, "stroke-width": 2 }));
    body.push(text(lx + 24, ly, PLANNER_LABELS[planner], { "font-size": 11 }));
  });

  const meta = records[0];
  body.push(text(WIDTH / 2, 24, "value function operations vs number of actuators",
                 { "text-anchor": "middle", "font-size": 15 }));
  body.push(text(WIDTH / 2, 42,
                 `${meta.instance.split(":")[0]}, gamma=${meta.gamma}, epsilon=${meta.epsilon}`,
                 { "text-anchor": "middle", "font-size": 11, fill: "#666" }));
  body.push(line(area.x0, area.y0, area.x1, area.y0));
  body.push(line(area.x0, area.y0, area.x0, area.y1));
  return document(WIDTH, HEIGHT, body);
}
