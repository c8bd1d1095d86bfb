import { ApiError, RiskgridClient } from "./client.js";
import type { MapConfig } from "./config.js";
import { precisionForZoom } from "./config.js";
import { SurfaceOverlay, project } from "./overlay.js";
import type { Viewport } from "./overlay.js";
import { DetailPanel } from "./panel.js";
import { ColorRamp } from "./ramp.js";
import { RequestSequencer, initialViewState, sameBounds } from "./state.js";
import type { ViewState } from "./state.js";
import { isCellPrediction } from "./types.js";
import type { Bounds, SurfaceDoc } from "./types.js";

export interface RiskMapOptions {
  width?: number;
  height?: number;
  /** Debounce for pan/zoom settle before re-fetching the surface. */
  settleMs?: number;
}

/** Visible extent for a center + zoom under a 256px/world-tile scale. */
export function boundsForView(
  center: { lat: number; lon: number },
  zoom: number,
  width: number,
  height: number,
): Bounds {
  const degPerPx = 360 / (256 * 2 ** zoom);
  const halfLon = (width * degPerPx) / 2;
  const halfLat = (height * degPerPx) / 2;
  return {
    minLon: center.lon - halfLon,
    minLat: Math.max(-90, center.lat - halfLat),
    maxLon: center.lon + halfLon,
    maxLat: Math.min(90, center.lat + halfLat),
  };
}

/**
 * Map controller: owns the view state, the base tile layer, the choropleth
 * overlay, and the detail panel.  All server traffic goes through the injected
 * client; responses are applied last-write-wins by request ticket so a slow
 * stale response never overwrites a newer one.
 */
export class RiskMap {
  readonly state: ViewState;
  private readonly width: number;
  private readonly height: number;
  private readonly settleMs: number;

  private readonly banner: HTMLElement;
  private readonly tileLayer: HTMLElement;
  private readonly svg: SVGSVGElement;
  private readonly overlay: SurfaceOverlay;
  private readonly panel: DetailPanel;

  private readonly surfaceSeq = new RequestSequencer();
  private readonly cellSeq = new RequestSequencer();
  private settleTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: RiskgridClient,
    private readonly config: MapConfig,
    opts: RiskMapOptions = {},
  ) {
    this.width = opts.width ?? 800;
    this.height = opts.height ?? 600;
    this.settleMs = opts.settleMs ?? 200;
    this.state = initialViewState(config.center, config.zoom);

    this.root.classList.add("risk-map");
    this.banner = document.createElement("div");
    this.banner.className = "map-banner";
    this.banner.hidden = true;

    const stage = document.createElement("div");
    stage.className = "map-stage";
    stage.style.width = `${this.width}px`;
    stage.style.height = `${this.height}px`;

    this.tileLayer = document.createElement("div");
    this.tileLayer.className = "tile-layer";

    this.svg = document.createElementNS("http://www.w3.org/2000/svg", "svg") as SVGSVGElement;
    this.svg.classList.add("surface-overlay");
    this.svg.setAttribute("width", String(this.width));
    this.svg.setAttribute("height", String(this.height));

    const panelHost = document.createElement("aside");
    panelHost.className = "panel-host";

    stage.appendChild(this.tileLayer);
    stage.appendChild(this.svg);
    this.root.appendChild(this.banner);
    this.root.appendChild(stage);
    this.root.appendChild(panelHost);

    this.overlay = new SurfaceOverlay(this.svg, new ColorRamp(config.rampStops), (gh) => {
      void this.selectCell(gh);
    });
    this.panel = new DetailPanel(panelHost);

    // click anywhere that is not a cell polygon deselects
    stage.addEventListener("click", () => this.deselect());
  }

  viewport(): Viewport {
    return {
      width: this.width,
      height: this.height,
      bounds: boundsForView(this.state.center, this.state.zoom, this.width, this.height),
    };
  }

  async start(): Promise<void> {
    await this.refresh();
  }

  /** Move the camera; the surface re-fetches after the view settles. */
  setView(center: { lat: number; lon: number }, zoom: number): void {
    this.state.center = { ...center };
    this.state.zoom = zoom;
    this.queueRefresh();
  }

  panBy(dLat: number, dLon: number): void {
    this.setView(
      { lat: this.state.center.lat + dLat, lon: this.state.center.lon + dLon },
      this.state.zoom,
    );
  }

  zoomIn(): void {
    this.setView(this.state.center, this.state.zoom + 1);
  }

  zoomOut(): void {
    this.setView(this.state.center, Math.max(1, this.state.zoom - 1));
  }

  private queueRefresh(): void {
    if (this.settleTimer !== null) clearTimeout(this.settleTimer);
    this.settleTimer = setTimeout(() => {
      this.settleTimer = null;
      void this.refresh();
    }, this.settleMs);
  }

  /**
   * Fetch the surface for the visible extent and redraw the overlay.  Skips
   * the request when the extent and precision are unchanged (de-duplication);
   * on a 422 cell-budget error drops precision one level and retries once; on
   * a network error shows the banner and keeps the stale overlay.
   */
  async refresh(force = false): Promise<void> {
    const vp = this.viewport();
    const precision = precisionForZoom(this.config.zoomTable, this.state.zoom);
    if (
      !force &&
      sameBounds(this.state.surfaceBounds, vp.bounds) &&
      this.state.surfacePrecision === precision
    ) {
      return;
    }
    const ticket = this.surfaceSeq.next();
    this.state.loading = true;
    try {
      const doc = await this.fetchSurfaceWithFallback(vp.bounds, precision);
      if (!this.surfaceSeq.isCurrent(ticket)) return; // stale response; discard
      this.overlay.render(doc.doc, vp);
      this.state.surfaceBounds = vp.bounds;
      this.state.surfacePrecision = doc.precision;
      this.state.error = null;
      this.hideBanner();
      this.renderTiles(vp);
      if (this.state.selected !== null && !this.overlay.displayedCodes().includes(this.state.selected)) {
        // cell scrolled out of view: drop the selection marker, keep the panel
        this.state.selected = null;
        this.overlay.setSelected(null);
      } else {
        this.overlay.setSelected(this.state.selected);
      }
    } catch (err) {
      if (!this.surfaceSeq.isCurrent(ticket)) return;
      const message = err instanceof ApiError ? err.message : "service unreachable";
      this.state.error = message;
      this.showBanner(message); // stale overlay stays up
    } finally {
      if (this.surfaceSeq.isCurrent(ticket)) this.state.loading = false;
    }
  }

  private async fetchSurfaceWithFallback(
    bounds: Bounds,
    precision: number,
  ): Promise<{ doc: SurfaceDoc; precision: number }> {
    try {
      return { doc: await this.client.surface(bounds, precision), precision };
    } catch (err) {
      if (err instanceof ApiError && err.status === 422 && precision > 1) {
        const coarser = precision - 1;
        return { doc: await this.client.surface(bounds, coarser), precision: coarser };
      }
      throw err;
    }
  }

  /**
   * Select a visible cell: exactly one /cell request per selection, and the
   * panel shows the response verbatim.
   */
  async selectCell(geohash: string): Promise<void> {
    if (!this.overlay.displayedCodes().includes(geohash)) return;
    this.state.selected = geohash;
    this.overlay.setSelected(geohash);
    this.panel.showLoading(geohash);
    const ticket = this.cellSeq.next();
    try {
      const payload: unknown = await this.client.cell(geohash);
      if (!this.cellSeq.isCurrent(ticket)) return;
      if (!isCellPrediction(payload)) {
        this.panel.showError("malformed cell payload");
        return;
      }
      this.panel.render(payload);
    } catch (err) {
      if (!this.cellSeq.isCurrent(ticket)) return;
      if (err instanceof ApiError && err.status === 404) {
        this.panel.showOutsideRegion(geohash);
      } else if (err instanceof ApiError) {
        this.panel.showError(err.message);
      } else {
        this.panel.showError("request failed");
      }
    }
  }

  deselect(): void {
    if (this.state.selected === null) return;
    this.state.selected = null;
    this.overlay.setSelected(null);
    this.panel.clear();
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  private hideBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  /**
   * Base map: position raster tiles at their true geographic boxes under the
   * overlay's plate-carree projection.  With the default empty template the
   * layer stays blank, which keeps demos fully offline.
   */
  private renderTiles(vp: Viewport): void {
    this.tileLayer.innerHTML = "";
    const template = this.config.tileUrlTemplate;
    if (template === "") return;
    const z = Math.max(0, Math.min(19, Math.floor(this.state.zoom)));
    const n = 2 ** z;
    const xMin = Math.floor(((vp.bounds.minLon + 180) / 360) * n);
    const xMax = Math.floor(((vp.bounds.maxLon + 180) / 360) * n);
    const latToY = (lat: number): number => {
      const r = (lat * Math.PI) / 180;
      return Math.floor(((1 - Math.log(Math.tan(r) + 1 / Math.cos(r)) / Math.PI) / 2) * n);
    };
    const yMin = latToY(vp.bounds.maxLat);
    const yMax = latToY(vp.bounds.minLat);
    const tileLat = (y: number): number => {
      const t = Math.PI * (1 - (2 * y) / n);
      return (Math.atan(Math.sinh(t)) * 180) / Math.PI;
    };
    for (let x = xMin; x <= xMax; x++) {
      for (let y = Math.max(0, yMin); y <= Math.min(n - 1, yMax); y++) {
        const west = (x / n) * 360 - 180;
        const east = ((x + 1) / n) * 360 - 180;
        const north = tileLat(y);
        const south = tileLat(y + 1);
        const [px0, py0] = project(vp, west, north);
        const [px1, py1] = project(vp, east, south);
        const img = document.createElement("img");
        const xw = ((x % n) + n) % n; // wrap antimeridian
        img.src = template.replace("{z}", String(z)).replace("{x}", String(xw)).replace("{y}", String(y));
        img.style.position = "absolute";
        img.style.left = `${px0.toFixed(1)}px`;
        img.style.top = `${py0.toFixed(1)}px`;
        img.style.width = `${(px1 - px0).toFixed(1)}px`;
        img.style.height = `${(py1 - py0).toFixed(1)}px`;
        this.tileLayer.appendChild(img);
      }
    }
  }
}
