/**
 * Figure color constants — the one place hues are chosen.
 *
 * Line colors follow Wong's colorblind-safe palette (Nature Methods, 2011);
 * heatmaps use a small perceptually-uniform viridis-like ramp that stays
 * legible for the major color-vision deficiencies and in grayscale.
 */

/** Wong colorblind-safe line palette. */
export const LINE_COLORS = {
  blue: '#0072B2',
  orange: '#E69F00',
  vermillion: '#D55E00',
  skyBlue: '#56B4E9',
  green: '#009E73',
  pink: '#CC79A7',
  yellow: '#F0E442',
  black: '#000000',
} as const;

/** Energy panel assignments (solid = unitary evolution, dashed = post-measurement). */
export const ENERGY_SERIES_STYLE: Array<{
  column: string;
  label: string;
  color: string;
  dashed: boolean;
}> = [
  { column: 'e_total', label: 'total', color: LINE_COLORS.black, dashed: false },
  { column: 'e_free', label: 'free', color: LINE_COLORS.blue, dashed: false },
  { column: 'e_int', label: 'interaction', color: LINE_COLORS.vermillion, dashed: false },
  { column: 'e_total_post', label: 'total (post)', color: LINE_COLORS.orange, dashed: true },
  { column: 'e_int_post', label: 'interaction (post)', color: LINE_COLORS.skyBlue, dashed: true },
];

/** Cycled for the occupation curves beyond p00. */
export const OCCUPATION_CYCLE: string[] = [
  LINE_COLORS.black,
  LINE_COLORS.blue,
  LINE_COLORS.orange,
  LINE_COLORS.green,
  LINE_COLORS.vermillion,
  LINE_COLORS.skyBlue,
  LINE_COLORS.pink,
];

/**
 * Sequential heatmap ramp, dark-to-bright (viridis anchor points).
 * Index 0 is the zero-value color; tests rely on it for parity checks.
 */
export const HEATMAP_RAMP: string[] = [
  '#440154',
  '#46327e',
  '#365c8d',
  '#277f8e',
  '#1fa187',
  '#4ac16d',
  '#a0da39',
  '#fde725',
];

/** Map a value in [0, 1] onto the discrete heatmap ramp. */
export function heatmapColor(fraction: number): string {
  if (!Number.isFinite(fraction)) {
    throw new Error(`heatmap fraction must be finite, got ${fraction}`);
  }
  const clamped = Math.min(1, Math.max(0, fraction));
  const idx = Math.min(HEATMAP_RAMP.length - 1, Math.floor(clamped * HEATMAP_RAMP.length));
  return HEATMAP_RAMP[idx];
}
