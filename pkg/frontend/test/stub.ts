import { createServer } from "node:http";
import type { Server } from "node:http";
import type { AddressInfo } from "node:net";
import type { CellPrediction, SurfaceDoc, SurfaceFeature } from "../src/types.js";

/**
 * Stub prediction service for tests: canned JSON per route prefix, a request
 * log, and optional per-route delays/overrides so races and fallbacks can be
 * exercised deterministically.
 */

export interface StubRoute {
  status: number;
  body: unknown;
  /** Delay before responding, ms. */
  delayMs?: number;
  /** If set, used for the first N hits only, then falls through to `after`. */
  times?: number;
  after?: { status: number; body: unknown };
}

export interface Stub {
  base: string;
  /** Full request paths (with query) in arrival order. */
  log: string[];
  /** Paths matching a prefix. */
  hits(prefix: string): string[];
  route(prefix: string, route: StubRoute): void;
  close(): Promise<void>;
}

export async function startStub(routes: Record<string, StubRoute> = {}): Promise<Stub> {
  const table = new Map<string, StubRoute & { used: number }>();
  for (const [prefix, r] of Object.entries(routes)) table.set(prefix, { ...r, used: 0 });
  const log: string[] = [];

  const server: Server = createServer((req, res) => {
    const path = req.url ?? "";
    if (req.method === "OPTIONS") {
      // happy-dom preflights every cross-origin fetch; answer permissively
      // and keep preflights out of the log so tests count real requests
      res.writeHead(204, {
        "access-control-allow-origin": "*",
        "access-control-allow-methods": "GET,OPTIONS",
        "access-control-allow-headers": "*",
      });
      res.end();
      return;
    }
    log.push(path);
    let match: (StubRoute & { used: number }) | undefined;
    let matchLen = -1;
    for (const [prefix, r] of table) {
      if (path.startsWith(prefix) && prefix.length > matchLen) {
        match = r;
        matchLen = prefix.length;
      }
    }
    const send = (status: number, body: unknown): void => {
      res.writeHead(status, {
        "content-type": "application/json",
        "access-control-allow-origin": "*",
      });
      res.end(JSON.stringify(body));
    };
    if (match === undefined) {
      send(404, { error: { code: "not_found", message: `no stub route for ${path}` } });
      return;
    }
    match.used += 1;
    const useAfter = match.times !== undefined && match.used > match.times && match.after;
    const status = useAfter && match.after ? match.after.status : match.status;
    const body = useAfter && match.after ? match.after.body : match.body;
    const delay = match.delayMs ?? 0;
    if (delay > 0) setTimeout(() => send(status, body), delay);
    else send(status, body);
  });

  await new Promise<void>((resolve) => server.listen(0, "127.0.0.1", resolve));
  const addr = server.address() as AddressInfo;
  return {
    base: `http://127.0.0.1:${addr.port}`,
    log,
    hits: (prefix) => log.filter((p) => p.startsWith(prefix)),
    route: (prefix, r) => table.set(prefix, { ...r, used: 0 }),
    close: () => new Promise<void>((resolve) => server.close(() => resolve())),
  };
}

/** A small axis-aligned cell polygon centered on (lon, lat). */
export function cellFeature(
  geohash: string,
  lon: number,
  lat: number,
  p_crime: number,
  size = 0.01,
): SurfaceFeature {
  const w = lon - size / 2;
  const e = lon + size / 2;
  const s = lat - size / 2;
  const n = lat + size / 2;
  return {
    type: "Feature",
    geometry: {
      type: "Polygon",
      coordinates: [
        [
          [w, s],
          [e, s],
          [e, n],
          [w, n],
          [w, s],
        ],
      ],
    },
    properties: { geohash, p_crime, expected_fine_usd: 1000 * (1 + p_crime) },
  };
}

/** Grid of cells spanning the given extent. */
export function surfaceDoc(
  count: number,
  opts: { minLon?: number; minLat?: number; pFor?: (i: number) => number } = {},
): SurfaceDoc {
  const minLon = opts.minLon ?? -74.1;
  const minLat = opts.minLat ?? 40.5;
  const pFor = opts.pFor ?? ((i: number): number => (count === 1 ? 0.5 : i / (count - 1)));
  const cols = Math.ceil(Math.sqrt(count));
  const features: SurfaceFeature[] = [];
  for (let i = 0; i < count; i++) {
    const col = i % cols;
    const row = Math.floor(i / cols);
    features.push(
      cellFeature(`dr5r${i.toString(36)}`, minLon + col * 0.01, minLat + row * 0.01, pFor(i)),
    );
  }
  return { type: "FeatureCollection", features };
}

/** Canned /cell payload with distinctive, non-round values. */
export function cellPayload(geohash = "dr5r0", overrides: Partial<CellPrediction> = {}): CellPrediction {
  return {
    geohash,
    p_crime: 0.8731502915,
    expected_fine_usd: 48213.77,
    unconditional_fine_usd: 42097.9183,
    type_probs: {
      fraud: 0.41,
      money_laundering: 0.27,
      tax_evasion: 0.17,
      bribery: 0.09,
      forgery: 0.06,
    },
    top_risks: [
      ["fraud", 0.41],
      ["money_laundering", 0.27],
      ["tax_evasion", 0.17],
      ["bribery", 0.09],
      ["forgery", 0.06],
    ],
    severity_histogram: [
      { lo_usd: 1000, hi_usd: 10000, mass: 0.131 },
      { lo_usd: 10000, hi_usd: 100000, mass: 0.562 },
      { lo_usd: 100000, hi_usd: 1000000, mass: 0.281 },
      { lo_usd: 1000000, hi_usd: 10000000, mass: 0.0247 },
      { lo_usd: 10000000, hi_usd: null, mass: 0.0013 },
    ],
    ...overrides,
  };
}
