"""HTTP prediction service.

Endpoints (all JSON):

    GET /healthz                       liveness probe
    GET /api/v1/meta                   taxonomy, schema, eval report, fingerprint
    GET /api/v1/cell/{geohash}         full per-cell prediction
    GET /api/v1/surface?bbox=&precision=   GeoJSON risk surface

The bbox query parameter is ``minLon,minLat,maxLon,maxLat`` — GeoJSON
axis order, longitude first.

Every /api/v1 response carries an ETag derived from the model fingerprint;
a matching If-None-Match short-circuits to 304. The app holds only
immutable state plus a memo cache of per-cell feature rows, so any
response is a pure function of (model file, POI data, request).
"""

from __future__ import annotations

import threading
from typing import Sequence

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from riskgrid.data.types import PoiSet
from riskgrid.errors import CellBudgetError, GeohashParseError, SchemaError
from riskgrid.features import CellGrid, FeatureParams, featurize
from riskgrid.geogrid import BBox, Geohash, cover_count, decode_bbox
from riskgrid.riskmodel import WccewsModel, predict_cell
from riskgrid.service.surface import render_surface, surface_to_geojson

API_PREFIX = "/api/v1"


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _intersects(a: BBox, b: BBox) -> bool:
    """Interior overlap, same convention as cover(): boundary contact does
    not count."""
    return a.min_lat < b.max_lat and a.max_lat > b.min_lat and a.min_lon < b.max_lon and a.max_lon > b.min_lon


class FeatureCache:
    """Memo of per-cell feature rows; concurrent reads, single writer."""

    def __init__(self):
        self._rows: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    def get(self, code: str) -> np.ndarray | None:
        return self._rows.get(code)

    def put(self, code: str, row: np.ndarray) -> None:
        with self._lock:
            self._rows[code] = row


def categories_from_schema(schema: Sequence[str]) -> list[str]:
    """Recover the POI category order a model was trained with from its
    column names (each category owns a count_/nbr_/dist_/kde_ block)."""
    return [name[len("count_") :] for name in schema if name.startswith("count_")]


def order_poi_sets(poi_sets: Sequence[PoiSet], schema: Sequence[str]) -> list[PoiSet]:
    """Match the model's training category order; unknown or missing
    categories are a schema mismatch reported at predict time."""
    by_cat = {p.category: p for p in poi_sets}
    ordered = [by_cat[c] for c in categories_from_schema(schema) if c in by_cat]
    extras = [p for p in poi_sets if p.category not in set(categories_from_schema(schema))]
    return ordered + extras


def create_app(
    model: WccewsModel,
    poi_sets: Sequence[PoiSet],
    region: BBox,
    feature_params: FeatureParams = FeatureParams(),
    max_cells: int = 50_000,
    backend: str | None = None,
) -> FastAPI:
    app = FastAPI(title="riskgrid", docs_url=None, redoc_url=None)
    poi_sets = order_poi_sets(poi_sets, model.feature_schema)
    cache = FeatureCache()
    etag = f'"{model.fingerprint}"'

    @app.middleware("http")
    async def cache_validation(request: Request, call_next):
        if request.url.path.startswith(API_PREFIX):
            if request.headers.get("if-none-match") == etag:
                return Response(status_code=304, headers={"ETag": etag, "Cache-Control": "no-cache"})
            response = await call_next(request)
            response.headers["ETag"] = etag
            response.headers["Cache-Control"] = "no-cache"
            return response
        return await call_next(request)

    # read-only public data API; lets the web map run from any origin.
    # Added after the ETag middleware so CORS headers wrap every response,
    # 304 revalidations included (last added runs outermost).
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["GET"], allow_headers=["*"]
    )

    def feature_row(gh: Geohash) -> np.ndarray:
        row = cache.get(gh.code)
        if row is None:
            grid = CellGrid(precision=gh.precision, cells=(gh,), bbox=decode_bbox(gh))
            row = featurize(grid, poi_sets, feature_params).rows[0]
            cache.put(gh.code, row)
        return row

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get(f"{API_PREFIX}/meta")
    def meta():
        md = model.metadata
        return {
            "taxonomy": list(model.taxonomy.labels),
            "feature_schema": list(model.feature_schema),
            "eval_report": md.eval_report.to_dict(),
            "fingerprint": md.data_fingerprint,
            "trained_at": md.trained_at,
            "train_precision": md.train_precision,
            "severity_edges_usd": list(md.severity_edges_usd),
            "region": {
                "min_lat": region.min_lat,
                "max_lat": region.max_lat,
                "min_lon": region.min_lon,
                "max_lon": region.max_lon,
            },
        }

    @app.get(f"{API_PREFIX}/cell/{{geohash}}")
    def cell(geohash: str):
        try:
            gh = Geohash(geohash)
        except GeohashParseError as exc:
            return _error(400, "invalid_geohash", str(exc))
        if not _intersects(decode_bbox(gh), region):
            return _error(404, "outside_region", f"cell {gh.code} lies outside the served region")
        try:
            pred = predict_cell(model, feature_row(gh), gh, backend=backend)
        except SchemaError as exc:
            return _error(500, "feature_schema_mismatch", str(exc))
        return pred.to_dict()

    @app.get(f"{API_PREFIX}/surface")
    def surface(bbox: str | None = None, precision: str | None = None):
        if bbox is None:
            return _error(400, "missing_bbox", "bbox query parameter is required (minLon,minLat,maxLon,maxLat)")
        parts = bbox.split(",")
        try:
            if len(parts) != 4:
                raise ValueError(f"expected 4 comma-separated numbers, got {len(parts)}")
            min_lon, min_lat, max_lon, max_lat = (float(p) for p in parts)
            box = BBox(min_lat=min_lat, max_lat=max_lat, min_lon=min_lon, max_lon=max_lon)
        except ValueError as exc:
            return _error(400, "invalid_bbox", f"bbox must be minLon,minLat,maxLon,maxLat: {exc}")
        if precision is None:
            prec = model.metadata.train_precision
        else:
            try:
                prec = int(precision)
            except ValueError:
                return _error(400, "invalid_precision", f"precision must be an integer: {precision!r}")
            if not 1 <= prec <= 12:
                return _error(400, "invalid_precision", f"precision must be within 1..12: {prec}")
        n = cover_count(box, prec)
        if n > max_cells:
            return _error(
                422,
                "cell_budget_exceeded",
                f"bbox needs {n} cells at precision {prec}, cap is {max_cells}; try a lower precision",
            )
        try:
            surf = render_surface(model, poi_sets, box, prec, feature_params, cell_cap=max_cells, backend=backend)
        except CellBudgetError as exc:  # cover_count raced nothing; belt and braces
            return _error(422, "cell_budget_exceeded", str(exc))
        except SchemaError as exc:
            return _error(500, "feature_schema_mismatch", str(exc))
        return surface_to_geojson(surf)

    return app
