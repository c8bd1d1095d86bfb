/**
 * Sequential color ramp over the fixed [0, 1] probability domain.
 *
 * The domain never rescales to the data on screen, so a given probability is
 * always the same color regardless of what else the viewport contains; the
 * ramp direction (pale -> saturated = low -> high risk) is part of the legend
 * contract.  Stops are evenly spaced hex colors; lookups clamp out-of-range
 * inputs to the endpoints.
 */

function hexToRgb(hex: string): [number, number, number] {
  const m = /^#([0-9a-f]{6})$/i.exec(hex.trim());
  if (!m || m[1] === undefined) throw new Error(`bad hex color: ${hex}`);
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

function rgbToHex(r: number, g: number, b: number): string {
  const v = (Math.round(r) << 16) | (Math.round(g) << 8) | Math.round(b);
  return `#${v.toString(16).padStart(6, "0")}`;
}

export class ColorRamp {
  private readonly stops: [number, number, number][];

  constructor(stops: string[]) {
    if (stops.length < 2) throw new Error("ramp needs at least two stops");
    this.stops = stops.map(hexToRgb);
  }

  /** Color for a probability; values outside [0, 1] clamp to the endpoints. */
  color(p: number): string {
    const n = this.stops.length;
    const t = Math.min(1, Math.max(0, p)) * (n - 1);
    const i = Math.min(n - 2, Math.floor(t));
    const frac = t - i;
    const lo = this.stops[i];
    const hi = this.stops[i + 1];
    if (lo === undefined || hi === undefined) throw new Error("ramp index out of range");
    return rgbToHex(
      lo[0] + (hi[0] - lo[0]) * frac,
      lo[1] + (hi[1] - lo[1]) * frac,
      lo[2] + (hi[2] - lo[2]) * frac,
    );
  }
}
