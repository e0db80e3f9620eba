/**
 * Tiny deterministic SVG builder: plain string assembly, fixed numeric
 * precision, no timestamps or generated ids, so identical inputs produce
 * byte-identical files.
 */

export function fmt(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`cannot place non-finite coordinate: ${value}`);
  }
  // fixed precision keeps output stable and small
  const rounded = value.toFixed(2);
  return rounded === '-0.00' ? '0.00' : rounded;
}

export interface LineStyle {
  color: string;
  width?: number;
  dashed?: boolean;
}

export class SvgDocument {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}">`,
      `<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`,
    );
  }

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ''): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${extra}/>`,
    );
  }

  polyline(points: Array<[number, number]>, style: LineStyle): void {
    const attr = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(' ');
    const dash = style.dashed ? ' stroke-dasharray="6,4"' : '';
    this.parts.push(
      `<polyline points="${attr}" fill="none" stroke="${style.color}" ` +
        `stroke-width="${style.width ?? 1.5}"${dash}/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, color: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${color}" stroke-width="${width}"/>`,
    );
  }

  text(x: number, y: number, content: string, size = 12, anchor = 'start'): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-family="Helvetica,Arial,sans-serif" ` +
        `font-size="${size}" text-anchor="${anchor}">${escapeXml(content)}</text>`,
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
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
