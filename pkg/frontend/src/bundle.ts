/**
 * Figure bundle: the file set emitted by `osc-engine figure-data`.
 *
 * bundle.json names the geometry, the energy-series CSV, the axes sidecar
 * and four snapshot pairs (Fock-probability matrix + real-space density).
 * Loading validates that every referenced file exists and that the grids are
 * mutually consistent; failures name the offending file.
 */

import { existsSync, readFileSync } from 'node:fs';
import { join } from 'node:path';

import { NumericTable, readMatrix, readTable } from './csv.js';

export interface SnapshotRef {
  tau: number;
  fock: string;
  density: string;
}

export interface BundleManifest {
  geometry: 'parallel' | 'perpendicular';
  energy_series: string;
  density_axes: string;
  snapshots: SnapshotRef[];
  tracked_states: Array<[number, number]>;
}

export interface Snapshot {
  tau: number;
  /** full Fock probability matrix, rows = j, cols = k */
  fock: number[][];
  /** real-space density, rows follow x1 */
  density: number[][];
}

export interface FigureBundle {
  geometry: 'parallel' | 'perpendicular';
  energy: NumericTable;
  x1: number[];
  x2: number[];
  snapshots: Snapshot[];
  trackedStates: Array<[number, number]>;
}

function requireFile(dir: string, name: string): string {
  const path = join(dir, name);
  if (!existsSync(path)) {
    throw new Error(`bundle file missing: ${name} (expected at ${path})`);
  }
  return path;
}

/** Load and validate a figure bundle directory. */
export function loadBundle(dir: string): FigureBundle {
  const manifestPath = requireFile(dir, 'bundle.json');
  const manifest = JSON.parse(readFileSync(manifestPath, 'utf-8')) as BundleManifest;
  if (manifest.geometry !== 'parallel' && manifest.geometry !== 'perpendicular') {
    throw new Error(`bundle.json: unknown geometry ${String(manifest.geometry)}`);
  }

  const energy = readTable(requireFile(dir, manifest.energy_series));
  for (const column of ['tau', 'e_total', 'e_free', 'e_int', 'e_int_post', 'e_total_post', 'p00']) {
    if (!energy.columns.includes(column)) {
      throw new Error(`${manifest.energy_series}: missing column ${column}`);
    }
  }

  const axes = readTable(requireFile(dir, manifest.density_axes));
  const x1 = axes.data.get('x1')!;
  const x2 = axes.data.get('x2')!;

  const snapshots: Snapshot[] = manifest.snapshots.map((ref) => {
    const fock = readMatrix(requireFile(dir, ref.fock));
    if (fock.length !== fock[0].length) {
      throw new Error(`${ref.fock}: Fock matrix must be square, got ${fock.length}x${fock[0].length}`);
    }
    const density = readMatrix(requireFile(dir, ref.density));
    if (density.length !== x1.length || density[0].length !== x2.length) {
      throw new Error(
        `${ref.density}: density grid ${density.length}x${density[0].length} does not match ` +
          `axes ${x1.length}x${x2.length} from ${manifest.density_axes}`,
      );
    }
    return { tau: ref.tau, fock, density };
  });
  if (snapshots.length === 0) {
    throw new Error('bundle.json lists no snapshots');
  }

  return {
    geometry: manifest.geometry,
    energy,
    x1,
    x2,
    snapshots,
    trackedStates: (manifest.tracked_states ?? []).map(([j, k]) => [j, k]),
  };
}
