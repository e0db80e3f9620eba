/**
 * Ten-panel figure renderer.
 *
 * Layout mirrors the simulator's observables: four Fock-space heatmaps
 * (levels 0-10 per axis regardless of the simulation truncation), four
 * real-space density maps, one energy panel (solid = unitary expectation
 * values, dashed = post-measurement averages) and one occupation panel.
 * Rendering is a pure function of the bundle: fixed size, fixed palette,
 * no timestamps, so the output is byte-identical across runs.
 */

import { writeFileSync } from 'node:fs';

import { FigureBundle, Snapshot } from './bundle.js';
import { ENERGY_SERIES_STYLE, heatmapColor, LINE_COLORS, OCCUPATION_CYCLE } from './palette.js';
import { SvgDocument } from './svg.js';

/** Fock panels always display levels 0..FOCK_DISPLAY_LEVELS-1 per axis. */
export const FOCK_DISPLAY_LEVELS = 11;

export const FIGURE_WIDTH = 1180;
export const FIGURE_HEIGHT = 860;

const MARGIN = 46;
const GAP = 26;
const PANEL = (FIGURE_WIDTH - 2 * MARGIN - 3 * GAP) / 4; // small-panel edge
const ROW3_TOP = 2 * (MARGIN + PANEL) + GAP + 30;
const ROW3_HEIGHT = FIGURE_HEIGHT - ROW3_TOP - MARGIN;
const HALF = (FIGURE_WIDTH - 2 * MARGIN - GAP) / 2;

/** Slice the displayed (truncated) Fock block out of a snapshot. */
export function displayedFock(snapshot: Snapshot): number[][] {
  if (snapshot.fock.length < FOCK_DISPLAY_LEVELS) {
    throw new Error(
      `Fock matrix has ${snapshot.fock.length} levels; need >= ${FOCK_DISPLAY_LEVELS} to display`,
    );
  }
  return snapshot.fock.slice(0, FOCK_DISPLAY_LEVELS).map((row) => row.slice(0, FOCK_DISPLAY_LEVELS));
}

function drawHeatmap(
  svg: SvgDocument,
  cells: number[][],
  x0: number,
  y0: number,
  size: number,
  maxValue: number,
  label: string,
): void {
  const n = cells.length;
  const cell = size / n;
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < cells[r].length; c++) {
      // rows of the matrix are j (oscillator 1); draw j upward from the bottom
      const value = maxValue > 0 ? cells[r][c] / maxValue : 0;
      svg.rect(x0 + c * cell, y0 + size - (r + 1) * cell, cell, cell, heatmapColor(value));
    }
  }
  svg.text(x0, y0 - 7, label, 13);
}

function panelFrame(svg: SvgDocument, x0: number, y0: number, w: number, h: number): void {
  svg.rect(x0, y0, w, h, 'none', ' stroke="#444444" stroke-width="1"');
}

interface Extent {
  min: number;
  max: number;
}

function seriesExtent(series: number[][]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const values of series) {
    for (const v of values) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  const pad = 0.06 * (max - min || 1);
  return { min: min - pad, max: max + pad };
}

function drawCurves(
  svg: SvgDocument,
  x0: number,
  y0: number,
  w: number,
  h: number,
  taus: number[],
  curves: Array<{ values: number[]; color: string; dashed: boolean; label: string }>,
  title: string,
): void {
  panelFrame(svg, x0, y0, w, h);
  const extent = seriesExtent(curves.map((c) => c.values));
  const tauMax = taus[taus.length - 1] || 1;
  const sx = (tau: number) => x0 + (tau / tauMax) * w;
  const sy = (v: number) => y0 + h - ((v - extent.min) / (extent.max - extent.min)) * h;
  for (const curve of curves) {
    svg.polyline(
      taus.map((tau, i) => [sx(tau), sy(curve.values[i])] as [number, number]),
      { color: curve.color, dashed: curve.dashed },
    );
  }
  svg.text(x0, y0 - 7, title, 13);
  svg.text(x0 + w / 2, y0 + h + 16, 'tau', 11, 'middle');
  svg.text(x0, y0 + h + 16, `${extent.min.toFixed(2)}..${extent.max.toFixed(2)}`, 10);
  // legend, one entry per curve
  curves.forEach((curve, i) => {
    const ly = y0 + 14 + 14 * i;
    svg.line(x0 + w - 86, ly - 4, x0 + w - 66, ly - 4, curve.color, 2);
    svg.text(x0 + w - 62, ly, curve.label, 10);
  });
}

/** Build the full figure as an SVG string. */
export function renderFigureSvg(bundle: FigureBundle): string {
  const svg = new SvgDocument(FIGURE_WIDTH, FIGURE_HEIGHT);
  svg.text(MARGIN, 24, `coupled-oscillator evolution (${bundle.geometry} geometry)`, 15);

  const labels = 'abcdefgh';
  const fockMax = Math.max(
    ...bundle.snapshots.map((snap) => Math.max(...displayedFock(snap).map((r) => Math.max(...r)))),
  );
  bundle.snapshots.slice(0, 4).forEach((snap, i) => {
    const x0 = MARGIN + i * (PANEL + GAP);
    drawHeatmap(
      svg,
      displayedFock(snap),
      x0,
      MARGIN + 12,
      PANEL,
      fockMax,
      `(${labels[i]}) Fock tau=${snap.tau.toFixed(3)}`,
    );
  });

  const densityMax = Math.max(
    ...bundle.snapshots.map((snap) => Math.max(...snap.density.map((r) => Math.max(...r)))),
  );
  bundle.snapshots.slice(0, 4).forEach((snap, i) => {
    const x0 = MARGIN + i * (PANEL + GAP);
    drawHeatmap(
      svg,
      snap.density,
      x0,
      MARGIN + PANEL + GAP + 24,
      PANEL,
      densityMax,
      `(${labels[i + 4]}) density tau=${snap.tau.toFixed(3)}`,
    );
  });

  const taus = bundle.energy.data.get('tau')!;
  const energyCurves = ENERGY_SERIES_STYLE.map((style) => ({
    values: bundle.energy.data.get(style.column)!,
    color: style.color,
    dashed: style.dashed,
    label: style.label,
  }));
  drawCurves(svg, MARGIN, ROW3_TOP, HALF, ROW3_HEIGHT, taus, energyCurves, '(i) energies');

  const occupationCurves: Array<{
    values: number[];
    color: string;
    dashed: boolean;
    label: string;
  }> = [
    {
      values: bundle.energy.data.get('p00')!,
      color: LINE_COLORS.black,
      dashed: false,
      label: 'p(0,0)',
    },
  ];
  bundle.trackedStates.forEach(([j, k], i) => {
    if (j === 0 && k === 0) {
      return; // p00 is already drawn
    }
    const column = `p_${j}_${k}`;
    const values = bundle.energy.data.get(column);
    if (!values) {
      throw new Error(`energy series is missing tracked column ${column}`);
    }
    occupationCurves.push({
      values,
      color: OCCUPATION_CYCLE[(i + 1) % OCCUPATION_CYCLE.length],
      dashed: false,
      label: `p(${j},${k})`,
    });
  });
  drawCurves(
    svg,
    MARGIN + HALF + GAP,
    ROW3_TOP,
    HALF,
    ROW3_HEIGHT,
    taus,
    occupationCurves,
    '(j) occupations',
  );

  return svg.render();
}

/** Render a bundle to an SVG file. */
export function renderFigure(bundle: FigureBundle, outPath: string): void {
  writeFileSync(outPath, renderFigureSvg(bundle), 'utf-8');
}
