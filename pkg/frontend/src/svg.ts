// Minimal deterministic SVG assembly: plain strings, fixed formatting.

export function fmt(x: number): string {
  const rounded = Math.round(x * 100) / 100;
  return String(rounded);
}

export function compact(x: number): string {
  if (x >= 1e6) return `${String(parseFloat((x / 1e6).toPrecision(3)))}M`;
  if (x >= 1e3) return `${String(parseFloat((x / 1e3).toPrecision(3)))}k`;
  return String(parseFloat(x.toPrecision(3)));
}

export function el(tag: string, attrs: Record<string, string | number>, body = ""): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : v}"`)
    .join(" ");
  return body === "" ? `<${tag} ${parts}/>` : `<${tag} ${parts}>${body}</${tag}>`;
}

export function text(x: number, y: number, body: string,
                     attrs: Record<string, string | number> = {}): string {
  return el("text", { x, y, "font-family": "sans-serif", ...attrs }, body);
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     attrs: Record<string, string | number> = {}): string {
  return el("line", { x1, y1, x2, y2, stroke: "#333", ...attrs });
}

export interface LinearScale {
  (value: number): number;
  ticks: number[];
}

// nice-step linear scale mapping [lo, hi] onto [rangeLo, rangeHi]
export function linearScale(lo: number, hi: number, rangeLo: number,
                            rangeHi: number): LinearScale {
  const span = hi - lo || 1;
  const rawStep = span / 5;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const tickLo = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = tickLo; t <= hi + 1e-9 * span; t += step) ticks.push(t);
  const scale = ((value: number) =>
    rangeLo + ((value - lo) / span) * (rangeHi - rangeLo)) as LinearScale;
  scale.ticks = ticks;
  return scale;
}

// log10 scale with decade ticks
export function logScale(lo: number, hi: number, rangeLo: number,
                         rangeHi: number): LinearScale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const ticks: number[] = [];
  for (let k = Math.ceil(llo); k <= Math.floor(lhi + 1e-9); k += 1) {
    ticks.push(Math.pow(10, k));
  }
  const scale = ((value: number) =>
    rangeLo + ((Math.log10(value) - llo) / span) * (rangeHi - rangeLo)) as LinearScale;
  scale.ticks = ticks;
  return scale;
}

export function document(width: number, height: number, body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el("rect", { x: 0, y: 0, width, height, fill: "white" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
