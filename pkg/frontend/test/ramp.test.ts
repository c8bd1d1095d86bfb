import { describe, expect, it } from "vitest";
import { DEFAULT_CONFIG, precisionForZoom } from "../src/config.js";
import { ColorRamp } from "../src/ramp.js";

describe("ColorRamp", () => {
  const ramp = new ColorRamp(DEFAULT_CONFIG.rampStops);

  it("maps the domain endpoints to the endpoint stops", () => {
    expect(ramp.color(0)).toBe("#ffffcc");
    expect(ramp.color(1)).toBe("#800026");
  });

  it("clamps out-of-domain values to the endpoints", () => {
    expect(ramp.color(-0.5)).toBe(ramp.color(0));
    expect(ramp.color(1.5)).toBe(ramp.color(1));
  });

  it("hits interior stops exactly at their positions", () => {
    // five stops -> positions 0, 0.25, 0.5, 0.75, 1
    expect(ramp.color(0.25)).toBe("#fed976");
    expect(ramp.color(0.5)).toBe("#fd8d3c");
    expect(ramp.color(0.75)).toBe("#e31a1c");
  });

  it("interpolates linearly between stops", () => {
    // halfway between #ffffcc (255,255,204) and #fed976 (254,217,118)
    expect(ramp.color(0.125)).toBe("#ffeca1");
    const twoStop = new ColorRamp(["#000000", "#0000ff"]);
    expect(twoStop.color(0.5)).toBe("#000080");
  });

  it("rejects malformed stop lists", () => {
    expect(() => new ColorRamp(["#ffffff"])).toThrow();
    expect(() => new ColorRamp(["red", "blue"])).toThrow();
  });
});

describe("precisionForZoom", () => {
  const table = DEFAULT_CONFIG.zoomTable;

  it("uses the highest matching minZoom rule", () => {
    expect(precisionForZoom(table, 14)).toBe(7);
    expect(precisionForZoom(table, 13)).toBe(7);
    expect(precisionForZoom(table, 12)).toBe(6);
    expect(precisionForZoom(table, 10)).toBe(6);
    expect(precisionForZoom(table, 9)).toBe(5);
    expect(precisionForZoom(table, 2)).toBe(5);
  });

  it("is order-independent in the config document", () => {
    const shuffled = [table[2], table[0], table[1]].map((r) => ({ ...r! }));
    expect(precisionForZoom(shuffled, 14)).toBe(7);
    expect(precisionForZoom(shuffled, 11)).toBe(6);
  });
});
