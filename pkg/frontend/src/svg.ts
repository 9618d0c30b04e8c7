/**
 * Minimal deterministic SVG assembly: fixed-precision coordinates, no
 * timestamps or randomness, so identical inputs give byte-identical files.
 */

export function fmt(value: number): string {
  return value.toFixed(2);
}

export class SvgBuilder {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
        `height="${height}" viewBox="0 0 ${width} ${height}">`,
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, widthPx = 1) {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${widthPx}"/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, widthPx = 2) {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${widthPx}"/>`,
    );
  }

  polygon(points: Array<[number, number]>, fill: string, opacity = 1) {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    this.parts.push(`<polygon points="${pts}" fill="${fill}" opacity="${opacity}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = 'none') {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
        `fill="${fill}" stroke="${stroke}"/>`,
    );
  }

  circle(cx: number, cy: number, r: number, fill: string) {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${r}" fill="${fill}"/>`);
  }

  text(
    x: number,
    y: number,
    content: string,
    size = 12,
    anchor: 'start' | 'middle' | 'end' = 'start',
    rotate?: number,
  ) {
    const transform =
      rotate === undefined ? '' : ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"`;
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" ` +
        `font-size="${size}" text-anchor="${anchor}"${transform}>${escapeXml(content)}</text>`,
    );
  }

  render(): string {
    return [...this.parts, '</svg>', ''].join('\n');
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;');
}

export interface Scale {
  (value: number): number;
  ticks: number[];
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  const fn = ((v: number) => outLo + ((v - lo) / span) * (outHi - outLo)) as Scale;
  const step = niceStep(span / 5);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  fn.ticks = ticks;
  return fn;
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const a = Math.log10(lo);
  const b = Math.log10(hi);
  const span = b - a || 1;
  const fn = ((v: number) =>
    outLo + ((Math.log10(v) - a) / span) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.floor(a); e <= Math.ceil(b); e++) {
    const t = Math.pow(10, e);
    if (t >= lo / 1.0001 && t <= hi * 1.0001) ticks.push(t);
  }
  fn.ticks = ticks;
  return fn;
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const unit = raw / mag;
  if (unit < 1.5) return mag;
  if (unit < 3.5) return 2 * mag;
  if (unit < 7.5) return 5 * mag;
  return 10 * mag;
}

/** Diverging blue-white-red map on [-1, 1], exactly white at 0. */
export function divergingColor(value: number): string {
  const v = Math.max(-1, Math.min(1, value));
  const other = Math.round(255 * (1 - Math.abs(v)));
  const hex = (c: number) => c.toString(16).padStart(2, '0');
  if (v >= 0) {
    // toward red for positive (protocol favored)
    return `#ff${hex(other)}${hex(other)}`;
  }
  return `#${hex(other)}${hex(other)}ff`;
}
