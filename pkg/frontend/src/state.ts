import type { Bounds } from "./types.js";

/**
 * What the map is looking at.  The client renders the server's answers and
 * keeps no derived model state: everything here is either camera pose or
 * bookkeeping about in-flight requests.
 */
export interface ViewState {
  center: { lat: number; lon: number };
  zoom: number;
  /** At most one selected cell, and only ever one of the displayed cells. */
  selected: string | null;
  /** Extent and precision of the surface currently on screen. */
  surfaceBounds: Bounds | null;
  surfacePrecision: number | null;
  loading: boolean;
  /** Non-blocking banner text; null = no banner. */
  error: string | null;
}

export function initialViewState(center: { lat: number; lon: number }, zoom: number): ViewState {
  return {
    center: { ...center },
    zoom,
    selected: null,
    surfaceBounds: null,
    surfacePrecision: null,
    loading: false,
    error: null,
  };
}

/**
 * Monotonic ticket counter for last-write-wins fetches.  Each request takes a
 * ticket; a response is applied only if its ticket is still the newest issued
 * for that channel, so stale responses from slow requests are discarded.
 */
export class RequestSequencer {
  private latest = 0;

  next(): number {
    this.latest += 1;
    return this.latest;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.latest;
  }
}

export function sameBounds(a: Bounds | null, b: Bounds | null): boolean {
  if (a === null || b === null) return false;
  return (
    a.minLon === b.minLon && a.minLat === b.minLat && a.maxLon === b.maxLon && a.maxLat === b.maxLat
  );
}
