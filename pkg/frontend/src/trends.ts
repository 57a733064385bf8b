import type { ReportDoc, ReportRow } from "./types.js";

/** Minimal CSV splitter for the report payload (no quoting in its cells). */
export function splitCsv(text: string): string[][] {
  return text
    .replace(/\n$/, "")
    .split("\n")
    .map((line) => line.split(","));
}

export interface ChartBox {
  width: number;
  height: number;
  pad: number;
}

const DEFAULT_BOX: ChartBox = { width: 420, height: 160, pad: 28 };

export interface SeriesGeometry {
  /** One SVG polyline `points` string per unbroken run of values. */
  segments: string[];
  /** One marker per plotted value, for single-point series. */
  markers: { x: number; y: number }[];
}

function xScale(rows: ReportRow[], box: ChartBox): (g: number) => number {
  const first = rows[0]?.generation ?? 0;
  const last = rows[rows.length - 1]?.generation ?? first;
  const span = Math.max(last - first, 1);
  return (g) =>
    box.pad + ((g - first) / span) * (box.width - 2 * box.pad);
}

function yScale(lo: number, hi: number, box: ChartBox): (v: number) => number {
  const span = Math.max(hi - lo, 1e-9);
  return (v) =>
    box.height - box.pad - ((v - lo) / span) * (box.height - 2 * box.pad);
}

function seriesGeometry(
  rows: ReportRow[],
  pick: (row: ReportRow) => number | null,
  y: (v: number) => number,
  box: ChartBox,
): SeriesGeometry {
  const x = xScale(rows, box);
  const segments: string[] = [];
  const markers: { x: number; y: number }[] = [];
  let run: string[] = [];
  for (const row of rows) {
    const value = pick(row);
    if (value === null) {
      if (run.length > 0) segments.push(run.join(" "));
      run = [];
      continue;
    }
    const px = x(row.generation);
    const py = y(value);
    markers.push({ x: px, y: py });
    run.push(`${px.toFixed(2)},${py.toFixed(2)}`);
  }
  if (run.length > 0) segments.push(run.join(" "));
  return { segments, markers };
}

export interface TrendsGeometry {
  box: ChartBox;
  fitnessTop: number;
  maxForce: SeriesGeometry;
  meanForce: SeriesGeometry;
  /** Similarity axis is pinned to [0, 1] regardless of the data. */
  bestSimilarity: SeriesGeometry;
  meanSimilarity: SeriesGeometry;
}

export function trendsGeometry(
  rows: ReportRow[],
  box: ChartBox = DEFAULT_BOX,
): TrendsGeometry {
  const fitnessTop = Math.max(...rows.map((r) => r.max_f), 1e-9);
  const fitnessY = yScale(0, fitnessTop, box);
  const similarityY = yScale(0, 1, box);
  return {
    box,
    fitnessTop,
    maxForce: seriesGeometry(rows, (r) => r.max_f, fitnessY, box),
    meanForce: seriesGeometry(rows, (r) => r.mean_f, fitnessY, box),
    bestSimilarity: seriesGeometry(
      rows,
      (r) => r.best_similarity,
      similarityY,
      box,
    ),
    meanSimilarity: seriesGeometry(
      rows,
      (r) => r.mean_similarity,
      similarityY,
      box,
    ),
  };
}

const SVG_NS = "http://www.w3.org/2000/svg";

function chartSvg(
  box: ChartBox,
  series: { geometry: SeriesGeometry; cssClass: string }[],
  axis: { lo: string; hi: string },
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${box.width} ${box.height}`);
  svg.setAttribute("class", "trend-chart");
  for (const { geometry, cssClass } of series) {
    for (const segment of geometry.segments) {
      const line = document.createElementNS(SVG_NS, "polyline");
      line.setAttribute("points", segment);
      line.setAttribute("class", cssClass);
      svg.appendChild(line);
    }
    for (const marker of geometry.markers) {
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", marker.x.toFixed(2));
      dot.setAttribute("cy", marker.y.toFixed(2));
      dot.setAttribute("r", "2.5");
      dot.setAttribute("class", cssClass);
      svg.appendChild(dot);
    }
  }
  const top = document.createElementNS(SVG_NS, "text");
  top.setAttribute("x", "2");
  top.setAttribute("y", String(box.pad - 4));
  top.setAttribute("class", "axis-label");
  top.textContent = axis.hi;
  svg.appendChild(top);
  const bottom = document.createElementNS(SVG_NS, "text");
  bottom.setAttribute("x", "2");
  bottom.setAttribute("y", String(box.height - box.pad + 12));
  bottom.setAttribute("class", "axis-label");
  bottom.textContent = axis.lo;
  svg.appendChild(bottom);
  return svg;
}

/**
 * Render both trend charts plus the per-generation value table.
 * The table shows the server's CSV cells verbatim: what you read here is
 * exactly what `/api/report?format=csv` said, no client reformatting.
 */
export function renderTrends(
  container: HTMLElement,
  doc: ReportDoc,
  csvText: string,
): void {
  container.textContent = "";
  const geometry = trendsGeometry(doc.rows);

  const fitnessTitle = document.createElement("h3");
  fitnessTitle.textContent = "retention force by generation (N)";
  container.appendChild(fitnessTitle);
  container.appendChild(
    chartSvg(
      geometry.box,
      [
        { geometry: geometry.maxForce, cssClass: "series-max" },
        { geometry: geometry.meanForce, cssClass: "series-mean" },
      ],
      { lo: "0", hi: geometry.fitnessTop.toPrecision(3) },
    ),
  );

  const similarityTitle = document.createElement("h3");
  similarityTitle.textContent = "bag similarity by generation";
  container.appendChild(similarityTitle);
  container.appendChild(
    chartSvg(
      geometry.box,
      [
        { geometry: geometry.bestSimilarity, cssClass: "series-best-sim" },
        { geometry: geometry.meanSimilarity, cssClass: "series-mean-sim" },
      ],
      { lo: "0", hi: "1" },
    ),
  );

  const table = document.createElement("table");
  table.setAttribute("data-testid", "report-table");
  const cells = splitCsv(csvText);
  cells.forEach((row, rowIndex) => {
    const tr = document.createElement("tr");
    for (const cell of row) {
      const td = document.createElement(rowIndex === 0 ? "th" : "td");
      td.textContent = cell;
      tr.appendChild(td);
    }
    table.appendChild(tr);
  });
  container.appendChild(table);
}
