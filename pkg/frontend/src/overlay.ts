import type { ColorRamp } from "./ramp.js";
import type { Bounds, SurfaceDoc, SurfaceFeature } from "./types.js";

/** Pixel viewport the overlay projects into. */
export interface Viewport {
  width: number;
  height: number;
  bounds: Bounds;
}

/** Equirectangular projection into viewport pixels; y grows south. */
export function project(vp: Viewport, lon: number, lat: number): [number, number] {
  const { bounds } = vp;
  const x = ((lon - bounds.minLon) / (bounds.maxLon - bounds.minLon)) * vp.width;
  const y = ((bounds.maxLat - lat) / (bounds.maxLat - bounds.minLat)) * vp.height;
  return [x, y];
}

const SVG_NS = "http://www.w3.org/2000/svg";

/**
 * Choropleth layer: one <polygon> per served feature, filled from the ramp.
 * The overlay is a pure view of the last surface response; it never invents,
 * merges, or drops cells.
 */
export class SurfaceOverlay {
  private readonly svg: SVGSVGElement;
  private codes: string[] = [];

  constructor(
    svg: SVGSVGElement,
    private readonly ramp: ColorRamp,
    private readonly onCellClick: (geohash: string) => void,
  ) {
    this.svg = svg;
  }

  render(doc: SurfaceDoc, vp: Viewport): void {
    this.clear();
    this.svg.setAttribute("viewBox", `0 0 ${vp.width} ${vp.height}`);
    for (const feature of doc.features) {
      this.svg.appendChild(this.polygonFor(feature, vp));
      this.codes.push(feature.properties.geohash);
    }
  }

  private polygonFor(feature: SurfaceFeature, vp: Viewport): SVGPolygonElement {
    const ring = feature.geometry.coordinates[0] ?? [];
    const points = ring
      .map(([lon, lat]) => {
        const [x, y] = project(vp, lon ?? 0, lat ?? 0);
        return `${x.toFixed(2)},${y.toFixed(2)}`;
      })
      .join(" ");
    const poly = document.createElementNS(SVG_NS, "polygon") as SVGPolygonElement;
    poly.setAttribute("points", points);
    poly.setAttribute("fill", this.ramp.color(feature.properties.p_crime));
    poly.setAttribute("fill-opacity", "0.65");
    poly.setAttribute("stroke", "#555555");
    poly.setAttribute("stroke-width", "0.5");
    poly.setAttribute("data-geohash", feature.properties.geohash);
    poly.addEventListener("click", (ev) => {
      ev.stopPropagation(); // background click means deselect; cell click must not
      this.onCellClick(feature.properties.geohash);
    });
    return poly;
  }

  /** Geohashes currently on screen, in render order. */
  displayedCodes(): string[] {
    return [...this.codes];
  }

  setSelected(geohash: string | null): void {
    for (const el of Array.from(this.svg.querySelectorAll("polygon"))) {
      const mine = geohash !== null && el.getAttribute("data-geohash") === geohash;
      el.setAttribute("stroke", mine ? "#000000" : "#555555");
      el.setAttribute("stroke-width", mine ? "2" : "0.5");
    }
  }

  clear(): void {
    while (this.svg.firstChild) this.svg.removeChild(this.svg.firstChild);
    this.codes = [];
  }
}
