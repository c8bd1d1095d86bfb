/** Static deployment configuration: API base, color ramp, zoom->precision table. */

export interface ZoomPrecisionRule {
  /** Rule applies to zooms >= minZoom; first match in descending order wins. */
  minZoom: number;
  precision: number;
}

export interface MapConfig {
  apiBase: string;
  /** Raster tile URL template for the base map ({z}/{x}/{y}); empty = plain background. */
  tileUrlTemplate: string;
  center: { lat: number; lon: number };
  zoom: number;
  /** Evenly spaced hex stops over the fixed [0, 1] probability domain. */
  rampStops: string[];
  zoomTable: ZoomPrecisionRule[];
}

export const DEFAULT_CONFIG: MapConfig = {
  apiBase: "http://127.0.0.1:8321",
  tileUrlTemplate: "",
  center: { lat: 40.53, lon: -74.14 },
  zoom: 12,
  rampStops: ["#ffffcc", "#fed976", "#fd8d3c", "#e31a1c", "#800026"],
  zoomTable: [
    { minZoom: 13, precision: 7 }, // city block scale
    { minZoom: 10, precision: 6 }, // metro scale
    { minZoom: 0, precision: 5 }, // state scale
  ],
};

/** Pick the grid precision for a zoom level from the config table. */
export function precisionForZoom(table: ZoomPrecisionRule[], zoom: number): number {
  const rules = [...table].sort((a, b) => b.minZoom - a.minZoom);
  for (const rule of rules) {
    if (zoom >= rule.minZoom) return rule.precision;
  }
  const last = rules[rules.length - 1];
  if (last === undefined) throw new Error("empty zoom table");
  return last.precision;
}

/**
 * Load config from a static JSON document next to the page; any missing keys
 * fall back to the built-in defaults so the app works with no config at all.
 */
export async function loadConfig(
  url = "./config.json",
  fetchFn: typeof fetch = fetch,
): Promise<MapConfig> {
  try {
    const res = await fetchFn(url);
    if (!res.ok) return DEFAULT_CONFIG;
    const doc = (await res.json()) as Partial<MapConfig>;
    return { ...DEFAULT_CONFIG, ...doc };
  } catch {
    return DEFAULT_CONFIG;
  }
}
