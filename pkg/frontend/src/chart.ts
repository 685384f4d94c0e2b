// Minimal SVG line chart: one point per episode plus an optional horizontal
// reference line for a user-supplied baseline (the comparison value drawn
// across the whole plot). SVG keeps every rendered element assertable.

const WIDTH = 420;
const HEIGHT = 160;
const PAD = 12;

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartOptions {
  baseline?: number | null;
  color?: string;
  baselineColor?: string;
}

function scaleY(value: number, maxValue: number): number {
  if (maxValue <= 0) return HEIGHT - PAD;
  return HEIGHT - PAD - (value / maxValue) * (HEIGHT - 2 * PAD);
}

function scaleX(index: number, count: number): number {
  if (count <= 1) return PAD;
  return PAD + (index * (WIDTH - 2 * PAD)) / (count - 1);
}

export function renderChart(
  svg: SVGSVGElement,
  values: number[],
  options: ChartOptions = {},
): void {
  const baseline = options.baseline ?? null;
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  while (svg.firstChild) svg.removeChild(svg.firstChild);

  const maxValue = Math.max(...values, baseline ?? 0, 1);

  if (baseline !== null) {
    const line = document.createElementNS(SVG_NS, "line");
    const y = scaleY(baseline, maxValue);
    line.setAttribute("class", "baseline-line");
    line.setAttribute("data-value", String(baseline));
    line.setAttribute("x1", String(PAD));
    line.setAttribute("x2", String(WIDTH - PAD));
    line.setAttribute("y1", String(y));
    line.setAttribute("y2", String(y));
    line.setAttribute("stroke", options.baselineColor ?? "#d33");
    line.setAttribute("stroke-dasharray", "6 3");
    svg.appendChild(line);
  }

  if (values.length > 1) {
    const path = document.createElementNS(SVG_NS, "polyline");
    path.setAttribute("class", "series-line");
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", options.color ?? "#36c");
    path.setAttribute(
      "points",
      values
        .map((v, i) => `${scaleX(i, values.length)},${scaleY(v, maxValue)}`)
        .join(" "),
    );
    svg.appendChild(path);
  }

  values.forEach((value, index) => {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("class", "series-point");
    dot.setAttribute("cx", String(scaleX(index, values.length)));
    dot.setAttribute("cy", String(scaleY(value, maxValue)));
    dot.setAttribute("r", "3");
    dot.setAttribute("fill", options.color ?? "#36c");
    dot.setAttribute("data-value", String(value));
    svg.appendChild(dot);
  });
}
