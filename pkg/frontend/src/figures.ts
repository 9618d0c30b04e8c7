/**
 * The two figure kinds: sweep lines (p_log vs n per mode, log y, CI bands)
 * and the (n, alpha) heatmap of delta p_log with a diverging colormap
 * centered at zero.  Both consume aggregate CSV rows as-is.
 */

import { aggregateRows, parseResultCsv, ResultRow } from './csv.js';
import { divergingColor, fmt, linearScale, logScale, SvgBuilder } from './svg.js';

export type FigureKind = 'sweep-lines' | 'grid-heatmap';

export interface FigureSpec {
  kind: FigureKind;
  inputCsv: string; // file contents
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

const WIDTH = 640;
const HEIGHT = 440;
const MARGIN = { left: 70, right: 150, top: 40, bottom: 55 };

const MODE_COLORS: Record<string, string> = {
  direct: '#d62728',
  clinr: '#1f77b4',
  cznr: '#2ca02c',
};

export interface RenderOutcome {
  svg: string;
  seriesCount: number; // sweep: plotted series; heatmap: cells
  pointCount: number;
}

export function render(spec: FigureSpec): RenderOutcome {
  const rows = parseResultCsv(spec.inputCsv);
  if (spec.kind === 'sweep-lines') {
    return renderSweep(rows, spec.title ?? 'logical error rate vs qubit count',
      spec.xLabel ?? 'qubit count n', spec.yLabel ?? 'p_log');
  }
  if (spec.kind === 'grid-heatmap') {
    return renderHeatmap(rows, spec.title ?? 'delta p_log over (n, alpha)',
      spec.xLabel ?? 'qubit count n', spec.yLabel ?? 'shape alpha');
  }
  throw new Error(`unknown figure kind ${String(spec.kind)}`);
}

function seriesKey(row: ResultRow): string {
  return `${row.mode} p2=${row.p2}`;
}

function renderSweep(rows: ResultRow[], title: string, xLabel: string, yLabel: string): RenderOutcome {
  const aggs = aggregateRows(rows).filter((r) => r.mode !== 'delta');
  if (aggs.length === 0) {
    throw new Error('no aggregate rows (circuit_idx = -1) to plot');
  }
  const series = new Map<string, ResultRow[]>();
  for (const row of aggs) {
    const key = seriesKey(row);
    if (!series.has(key)) series.set(key, []);
    (series.get(key) as ResultRow[]).push(row);
  }
  for (const pts of series.values()) {
    pts.sort((a, b) => a.n - b.n);
  }

  const ns = aggs.map((r) => r.n);
  const plogs = aggs.flatMap((r) => [r.plog, r.ciLo, r.ciHi]).filter((v) => v > 0);
  const yLo = Math.min(...plogs) / 1.5;
  const yHi = Math.max(...plogs) * 1.5;
  const x = linearScale(Math.min(...ns), Math.max(...ns), MARGIN.left, WIDTH - MARGIN.right);
  const y = logScale(yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);

  const svg = new SvgBuilder(WIDTH, HEIGHT);
  drawAxes(svg, x, y, xLabel, yLabel, true);
  svg.text(WIDTH / 2, 20, title, 14, 'middle');

  let pointCount = 0;
  let seriesIdx = 0;
  const floorY = (v: number) => Math.max(v, yLo);
  for (const [key, pts] of [...series.entries()].sort()) {
    const color = MODE_COLORS[pts[0].mode] ?? '#555555';
    // confidence band from the CSV bounds, clipped to the positive axis
    const band: Array<[number, number]> = [
      ...pts.map((p): [number, number] => [x(p.n), y(floorY(p.ciHi))]),
      ...[...pts].reverse().map((p): [number, number] => [x(p.n), y(floorY(p.ciLo))]),
    ];
    if (pts.length > 1) svg.polygon(band, color, 0.18);
    svg.polyline(
      pts.map((p): [number, number] => [x(p.n), y(floorY(p.plog))]),
      color,
    );
    for (const p of pts) {
      svg.circle(x(p.n), y(floorY(p.plog)), 3, color);
      pointCount += 1;
    }
    svg.text(WIDTH - MARGIN.right + 12, MARGIN.top + 16 * seriesIdx + 4, key, 12);
    svg.rect(WIDTH - MARGIN.right + 0, MARGIN.top + 16 * seriesIdx - 4, 8, 8, color);
    seriesIdx += 1;
  }
  return { svg: svg.render(), seriesCount: series.size, pointCount };
}

function renderHeatmap(rows: ResultRow[], title: string, xLabel: string, yLabel: string): RenderOutcome {
  const deltas = rows.filter((r) => r.mode === 'delta');
  if (deltas.length === 0) {
    throw new Error('no delta rows to plot; run the grid command first');
  }
  const ns = [...new Set(deltas.map((r) => r.n))].sort((a, b) => a - b);
  const alphas = [...new Set(deltas.map((r) => r.alpha ?? 0))].sort((a, b) => a - b);
  const maxAbs = Math.max(...deltas.map((r) => Math.abs(r.plog)), 1e-12);

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const cellW = plotW / ns.length;
  const cellH = plotH / alphas.length;

  const svg = new SvgBuilder(WIDTH, HEIGHT);
  svg.text(WIDTH / 2, 20, title, 14, 'middle');
  let cells = 0;
  for (const row of deltas) {
    const i = ns.indexOf(row.n);
    const j = alphas.indexOf(row.alpha ?? 0);
    const cx = MARGIN.left + i * cellW;
    // larger alpha at the bottom matches the "lower-right favored" reading
    const cy = MARGIN.top + j * cellH;
    svg.rect(cx, cy, cellW, cellH, divergingColor(row.plog / maxAbs), '#888888');
    svg.text(
      cx + cellW / 2,
      cy + cellH / 2 + 4,
      row.plog.toExponential(1),
      11,
      'middle',
    );
    cells += 1;
  }
  for (const [i, n] of ns.entries()) {
    svg.text(MARGIN.left + (i + 0.5) * cellW, HEIGHT - MARGIN.bottom + 18, `${n}`, 12, 'middle');
  }
  for (const [j, alpha] of alphas.entries()) {
    svg.text(MARGIN.left - 8, MARGIN.top + (j + 0.5) * cellH + 4, `${alpha}`, 12, 'end');
  }
  svg.text(WIDTH / 2, HEIGHT - 14, xLabel, 12, 'middle');
  svg.text(18, HEIGHT / 2, yLabel, 12, 'middle', -90);
  // legend: blue = direct favored, red = protocol favored
  const legendX = WIDTH - MARGIN.right + 16;
  for (let k = 0; k <= 10; k++) {
    const v = -1 + (2 * k) / 10;
    svg.rect(legendX, MARGIN.top + (10 - k) * 14, 16, 14, divergingColor(v));
  }
  svg.text(legendX + 22, MARGIN.top + 12, `+${maxAbs.toExponential(1)}`, 10);
  svg.text(legendX + 22, MARGIN.top + 11 * 14, `-${maxAbs.toExponential(1)}`, 10);
  return { svg: svg.render(), seriesCount: cells, pointCount: cells };
}

function drawAxes(
  svg: SvgBuilder,
  x: ReturnType<typeof linearScale>,
  y: ReturnType<typeof logScale>,
  xLabel: string,
  yLabel: string,
  logY: boolean,
) {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  svg.line(x0, y0, x1, y0, '#000000');
  svg.line(x0, y0, x0, y1, '#000000');
  for (const t of x.ticks) {
    svg.line(x(t), y0, x(t), y0 + 5, '#000000');
    svg.text(x(t), y0 + 18, `${t}`, 11, 'middle');
  }
  for (const t of y.ticks) {
    svg.line(x0 - 5, y(t), x0, y(t), '#000000');
    svg.line(x0, y(t), x1, y(t), '#dddddd');
    svg.text(x0 - 8, y(t) + 4, logY ? t.toExponential(0) : fmt(t), 11, 'end');
  }
  svg.text((x0 + x1) / 2, HEIGHT - 14, xLabel, 12, 'middle');
  svg.text(18, (y0 + y1) / 2, yLabel, 12, 'middle', -90);
}
