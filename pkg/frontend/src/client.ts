import type { Bounds, CellPrediction, ErrorEnvelope, MetaDoc, SurfaceDoc } from "./types.js";

/**
 * The one place that knows the service's URL layout.  Everything else in the
 * app goes through this class; no endpoint strings appear outside it.
 */

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function isEnvelope(body: unknown): body is ErrorEnvelope {
  return (
    typeof body === "object" &&
    body !== null &&
    typeof (body as ErrorEnvelope).error === "object" &&
    (body as ErrorEnvelope).error !== null &&
    typeof (body as ErrorEnvelope).error.code === "string"
  );
}

export class RiskgridClient {
  private readonly base: string;
  private readonly fetchFn: typeof fetch;

  constructor(base: string, fetchFn: typeof fetch = fetch) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.base}${path}`);
    let body: unknown = null;
    try {
      body = await res.json();
    } catch {
      body = null;
    }
    if (!res.ok) {
      if (isEnvelope(body)) {
        throw new ApiError(res.status, body.error.code, body.error.message);
      }
      throw new ApiError(res.status, "http_error", `HTTP ${res.status}`);
    }
    if (body === null) {
      throw new ApiError(res.status, "bad_payload", "response body is not JSON");
    }
    return body as T;
  }

  meta(): Promise<MetaDoc> {
    return this.get<MetaDoc>("/api/v1/meta");
  }

  cell(geohash: string): Promise<CellPrediction> {
    return this.get<CellPrediction>(`/api/v1/cell/${encodeURIComponent(geohash)}`);
  }

  /** bbox goes on the wire lon-first: min_lon,min_lat,max_lon,max_lat. */
  surface(bounds: Bounds, precision?: number): Promise<SurfaceDoc> {
    const bbox = `${bounds.minLon},${bounds.minLat},${bounds.maxLon},${bounds.maxLat}`;
    const query = precision === undefined ? `bbox=${bbox}` : `bbox=${bbox}&precision=${precision}`;
    return this.get<SurfaceDoc>(`/api/v1/surface?${query}`);
  }
}
