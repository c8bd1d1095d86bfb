/** Payload types mirroring the prediction service's JSON responses. */

export interface RegionBounds {
  min_lat: number;
  max_lat: number;
  min_lon: number;
  max_lon: number;
}

export interface SeverityBin {
  lo_usd: number;
  hi_usd: number | null; // null = open-ended top bracket
  mass: number;
}

export interface CellPrediction {
  geohash: string;
  p_crime: number;
  expected_fine_usd: number;
  unconditional_fine_usd: number;
  type_probs: Record<string, number>;
  /** Already sorted by the server; rendered verbatim. */
  top_risks: [string, number][];
  severity_histogram: SeverityBin[];
}

export interface SurfaceProperties {
  geohash: string;
  p_crime: number;
  expected_fine_usd: number;
}

export interface SurfaceFeature {
  type: "Feature";
  geometry: {
    type: "Polygon";
    /** One closed exterior ring of [lon, lat] pairs. */
    coordinates: number[][][];
  };
  properties: SurfaceProperties;
}

export interface SurfaceDoc {
  type: "FeatureCollection";
  features: SurfaceFeature[];
}

export interface MetaDoc {
  fingerprint: string;
  trained_at: string;
  train_precision: number;
  taxonomy: string[];
  feature_schema: string[];
  severity_edges_usd: number[];
  region: RegionBounds;
  eval_report: unknown;
}

export interface ErrorEnvelope {
  error: {
    code: string;
    message: string;
  };
}

/** Map viewport extent in plain lon/lat (not the server's lat-first order). */
export interface Bounds {
  minLon: number;
  minLat: number;
  maxLon: number;
  maxLat: number;
}

/** Structural check for /cell payloads so a malformed body never reaches the panel. */
export function isCellPrediction(body: unknown): body is CellPrediction {
  if (typeof body !== "object" || body === null) return false;
  const b = body as Record<string, unknown>;
  if (typeof b.geohash !== "string") return false;
  if (typeof b.p_crime !== "number" || typeof b.expected_fine_usd !== "number") return false;
  if (typeof b.type_probs !== "object" || b.type_probs === null) return false;
  if (!Array.isArray(b.top_risks)) return false;
  for (const item of b.top_risks) {
    if (!Array.isArray(item) || item.length !== 2) return false;
    if (typeof item[0] !== "string" || typeof item[1] !== "number") return false;
  }
  if (!Array.isArray(b.severity_histogram)) return false;
  for (const bin of b.severity_histogram) {
    if (typeof bin !== "object" || bin === null) return false;
    const s = bin as Record<string, unknown>;
    if (typeof s.lo_usd !== "number") return false;
    if (s.hi_usd !== null && typeof s.hi_usd !== "number") return false;
    if (typeof s.mass !== "number") return false;
  }
  return true;
}
