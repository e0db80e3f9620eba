/**
 * Command line: render --bundle <dir> --out <file>
 *
 * Consumes the exact file set written by `osc-engine figure-data`.
 */

import { loadBundle } from './bundle.js';
import { renderFigure } from './render.js';

function usage(): never {
  console.error('usage: render --bundle <dir> --out <file.svg>');
  process.exit(2);
}

export function main(argv: string[]): number {
  if (argv[0] !== 'render') {
    usage();
  }
  let bundleDir: string | undefined;
  let outPath: string | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage();
    if (flag === '--bundle') bundleDir = value;
    else if (flag === '--out') outPath = value;
    else usage();
  }
  if (!bundleDir || !outPath) {
    usage();
  }
  const bundle = loadBundle(bundleDir);
  renderFigure(bundle, outPath);
  console.log(`rendered ${bundle.geometry} figure -> ${outPath}`);
  return 0;
}

process.exit(main(process.argv.slice(2)));
