import { afterEach, describe, expect, it } from "vitest";
import { ApiError, RiskgridClient } from "../src/client.js";
import { cellPayload, startStub, surfaceDoc } from "./stub.js";
import type { Stub } from "./stub.js";

let stub: Stub | null = null;

afterEach(async () => {
  if (stub !== null) await stub.close();
  stub = null;
});

describe("RiskgridClient", () => {
  it("fetches a cell payload verbatim", async () => {
    const payload = cellPayload("dr5r7h");
    stub = await startStub({ "/api/v1/cell/dr5r7h": { status: 200, body: payload } });
    const client = new RiskgridClient(stub.base);
    const got = await client.cell("dr5r7h");
    expect(got).toEqual(payload);
  });

  it("requests surface with lon-first bbox and precision", async () => {
    stub = await startStub({ "/api/v1/surface": { status: 200, body: surfaceDoc(3) } });
    const client = new RiskgridClient(stub.base);
    await client.surface({ minLon: -74.1, minLat: 40.5, maxLon: -74.0, maxLat: 40.6 }, 6);
    expect(stub.log).toEqual(["/api/v1/surface?bbox=-74.1,40.5,-74,40.6&precision=6"]);
  });

  it("omits precision from the query when not given", async () => {
    stub = await startStub({ "/api/v1/surface": { status: 200, body: surfaceDoc(1) } });
    const client = new RiskgridClient(stub.base);
    await client.surface({ minLon: 0, minLat: 1, maxLon: 2, maxLat: 3 });
    expect(stub.log).toEqual(["/api/v1/surface?bbox=0,1,2,3"]);
  });

  it("fetches meta", async () => {
    const meta = { fingerprint: "abcd", taxonomy: ["fraud"], train_precision: 6 };
    stub = await startStub({ "/api/v1/meta": { status: 200, body: meta } });
    const client = new RiskgridClient(stub.base);
    const got = await client.meta();
    expect(got.fingerprint).toBe("abcd");
    expect(stub.log).toEqual(["/api/v1/meta"]);
  });

  it("surfaces error envelopes as ApiError with code and status", async () => {
    stub = await startStub({
      "/api/v1/cell/": {
        status: 404,
        body: { error: { code: "outside_region", message: "cell is outside the served region" } },
      },
    });
    const client = new RiskgridClient(stub.base);
    const err = await client.cell("gcpvj0").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(404);
    expect(apiErr.code).toBe("outside_region");
    expect(apiErr.message).toBe("cell is outside the served region");
  });

  it("wraps non-envelope error bodies with a generic code", async () => {
    stub = await startStub({ "/api/v1/cell/": { status: 500, body: "boom" } });
    const client = new RiskgridClient(stub.base);
    const err = (await client.cell("dr5r0").catch((e: unknown) => e)) as ApiError;
    expect(err.code).toBe("http_error");
    expect(err.status).toBe(500);
  });

  it("rejects when the server is unreachable", async () => {
    const client = new RiskgridClient("http://127.0.0.1:1");
    await expect(client.meta()).rejects.toThrow();
  });

  it("escapes path segments", async () => {
    stub = await startStub({ "/api/v1/cell/": { status: 200, body: cellPayload() } });
    const client = new RiskgridClient(stub.base);
    await client.cell("a/b");
    expect(stub.log).toEqual(["/api/v1/cell/a%2Fb"]);
  });
});
