"""Risk surfaces: a bbox covered at one precision with a prediction per cell,
and their GeoJSON rendering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from riskgrid.data.types import PoiSet
from riskgrid.errors import CellBudgetError
from riskgrid.features import FeatureParams, build_grid, featurize
from riskgrid.geogrid import BBox, Geohash, decode_bbox
from riskgrid.riskmodel import WccewsModel, predict_cell


@dataclass(frozen=True)
class SurfaceCell:
    geohash: Geohash
    p_crime: float
    expected_fine_usd: float


@dataclass
class RiskSurface:
    precision: int
    cells: tuple[SurfaceCell, ...]
    bbox: BBox
    fingerprint: str


def render_surface(
    model: WccewsModel,
    poi_sets: Sequence[PoiSet],
    bbox: BBox,
    precision: int,
    params: FeatureParams = FeatureParams(),
    cell_cap: int | None = None,
    backend: str | None = None,
) -> RiskSurface:
    """Cover the bbox, featurize every cell, and predict each one.

    The per-cell values are exactly what predict_cell returns for that
    cell's feature row; rendering a surface is just a batched loop over it.
    """
    try:
        grid = build_grid(bbox, precision, cell_cap)
    except CellBudgetError as exc:
        raise CellBudgetError(exc.count, exc.cap, hint=f"try a precision below {precision}") from None
    fm = featurize(grid, poi_sets, params)
    cells = []
    for i, g in enumerate(grid.cells):
        pred = predict_cell(model, fm.rows[i], g, backend=backend)
        cells.append(SurfaceCell(geohash=g, p_crime=pred.p_crime, expected_fine_usd=pred.expected_fine_usd))
    return RiskSurface(precision=precision, cells=tuple(cells), bbox=bbox, fingerprint=model.fingerprint)


def surface_to_geojson(surface: RiskSurface) -> dict:
    """A FeatureCollection with one Polygon per cell.

    Rings are closed, counterclockwise, in GeoJSON [lon, lat] order, with
    coordinates rounded to 6 decimal places (about 0.1 m, far below cell
    size at any supported precision).
    """
    features = []
    for cell in surface.cells:
        cb = decode_bbox(cell.geohash)
        w, e = round(cb.min_lon, 6), round(cb.max_lon, 6)
        s, n = round(cb.min_lat, 6), round(cb.max_lat, 6)
        ring = [[w, s], [e, s], [e, n], [w, n], [w, s]]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": {
                    "geohash": cell.geohash.code,
                    "p_crime": cell.p_crime,
                    "expected_fine_usd": cell.expected_fine_usd,
                },
            }
        )
    return {"type": "FeatureCollection", "features": features}
