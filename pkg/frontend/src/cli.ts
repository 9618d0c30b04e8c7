#!/usr/bin/env node
/**
 * render-figures --kind sweep|grid --in results.csv --out fig.svg
 */

import { readFileSync, writeFileSync } from 'node:fs';
import { render, FigureKind } from './figures.js';

const KIND_ALIASES: Record<string, FigureKind> = {
  sweep: 'sweep-lines',
  'sweep-lines': 'sweep-lines',
  grid: 'grid-heatmap',
  'grid-heatmap': 'grid-heatmap',
};

export function main(argv: string[]): number {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith('--') || value === undefined) {
      console.error('usage: render-figures --kind sweep|grid --in results.csv --out fig.svg');
      return 2;
    }
    args.set(key.slice(2), value);
  }
  const kindArg = args.get('kind');
  const input = args.get('in');
  const output = args.get('out');
  const title = args.get('title');
  const xLabel = args.get('xlabel');
  const yLabel = args.get('ylabel');
  if (!kindArg || !input || !output) {
    console.error('usage: render-figures --kind sweep|grid --in results.csv --out fig.svg');
    return 2;
  }
  const kind = KIND_ALIASES[kindArg];
  if (!kind) {
    console.error(`unknown figure kind: ${kindArg}`);
    return 2;
  }
  let csvText: string;
  try {
    csvText = readFileSync(input, 'utf-8');
  } catch (err) {
    console.error(`cannot read ${input}: ${(err as Error).message}`);
    return 2;
  }
  try {
    const outcome = render({ kind, inputCsv: csvText, title, xLabel, yLabel });
    writeFileSync(output, outcome.svg, 'utf-8');
    console.log(
      `wrote ${output}: ${outcome.seriesCount} ` +
        `${kind === 'sweep-lines' ? 'series' : 'cells'}, ${outcome.pointCount} points`,
    );
    return 0;
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    return 2;
  }
}

if (process.argv[1] && process.argv[1].endsWith('cli.js')) {
  process.exit(main(process.argv.slice(2)));
}
