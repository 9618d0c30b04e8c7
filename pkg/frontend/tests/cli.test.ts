import assert from 'node:assert/strict';
import { existsSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { test } from 'node:test';

import { main } from '../src/cli.js';

const here = dirname(fileURLToPath(import.meta.url));
const fixturesDir = join(here, '..', '..', 'fixtures');

test('cli renders a sweep figure', () => {
  const out = join(tmpdir(), 'clinr-fig-sweep.svg');
  rmSync(out, { force: true });
  const code = main(['--kind', 'sweep', '--in', join(fixturesDir, 'sweep.csv'), '--out', out]);
  assert.equal(code, 0);
  assert.ok(existsSync(out));
  assert.match(readFileSync(out, 'utf-8'), /<\/svg>/);
});

test('cli renders a grid figure', () => {
  const out = join(tmpdir(), 'clinr-fig-grid.svg');
  rmSync(out, { force: true });
  const code = main(['--kind', 'grid', '--in', join(fixturesDir, 'grid.csv'), '--out', out]);
  assert.equal(code, 0);
  assert.ok(existsSync(out));
});

test('cli rejects unknown kind', () => {
  const code = main(['--kind', 'pie', '--in', 'x.csv', '--out', 'y.svg']);
  assert.equal(code, 2);
});

test('cli rejects missing args', () => {
  assert.equal(main(['--kind', 'sweep']), 2);
});

test('cli reports unreadable input', () => {
  const code = main(['--kind', 'sweep', '--in', '/nonexistent.csv', '--out', '/tmp/x.svg']);
  assert.equal(code, 2);
});
