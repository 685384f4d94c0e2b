import { describe, expect, it } from "vitest";

import { renderChart } from "../src/chart.js";

function freshSvg(): SVGSVGElement {
  return document.createElementNS("http://www.w3.org/2000/svg", "svg");
}

describe("renderChart", () => {
  it("renders one point per value", () => {
    const svg = freshSvg();
    const values = Array.from({ length: 20 }, (_, i) => 100 - i);
    renderChart(svg, values);
    expect(svg.querySelectorAll("circle.series-point")).toHaveLength(20);
    expect(svg.querySelectorAll("polyline.series-line")).toHaveLength(1);
  });

  it("draws the baseline at the configured value", () => {
    const svg = freshSvg();
    renderChart(svg, [10, 20, 30], { baseline: 25 });
    const line = svg.querySelector("line.baseline-line");
    expect(line).not.toBeNull();
    expect(line!.getAttribute("data-value")).toBe("25");
    expect(line!.getAttribute("y1")).toBe(line!.getAttribute("y2"));
  });

  it("places a baseline above all observed values above the series", () => {
    // SVG y grows downward: a larger value maps to a smaller y
    const svg = freshSvg();
    renderChart(svg, [10, 20, 30], { baseline: 100 });
    const lineY = Number(svg.querySelector("line.baseline-line")!.getAttribute("y1"));
    const pointYs = [...svg.querySelectorAll("circle.series-point")].map(
      (c) => Number(c.getAttribute("cy")),
    );
    expect(Math.min(...pointYs)).toBeGreaterThan(lineY);
  });

  it("omits the baseline when not configured", () => {
    const svg = freshSvg();
    renderChart(svg, [1, 2, 3]);
    expect(svg.querySelector("line.baseline-line")).toBeNull();
  });

  it("replaces previous content on re-render", () => {
    const svg = freshSvg();
    renderChart(svg, [1, 2]);
    renderChart(svg, [1, 2, 3]);
    expect(svg.querySelectorAll("circle.series-point")).toHaveLength(3);
  });

  it("handles empty and single-point series", () => {
    const svg = freshSvg();
    renderChart(svg, []);
    expect(svg.querySelectorAll("circle.series-point")).toHaveLength(0);
    renderChart(svg, [5]);
    expect(svg.querySelectorAll("circle.series-point")).toHaveLength(1);
    expect(svg.querySelector("polyline.series-line")).toBeNull();
  });
});
