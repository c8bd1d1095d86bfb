"""Risk surface rendering: cell coverage, per-cell parity with predict_cell,
and the GeoJSON contract."""

from __future__ import annotations

import json

import jsonschema
import pytest
from shapely.geometry import shape

from riskgrid.errors import CellBudgetError
from riskgrid.features import CellGrid, featurize
from riskgrid.geogrid import BBox, cover, cover_count, decode_bbox
from riskgrid.riskmodel import predict_cell
from riskgrid.service import render_surface, surface_to_geojson

SUB_BBOX = BBox(min_lat=40.71, max_lat=40.74, min_lon=-74.0, max_lon=-73.95)

# Structural contract for the emitted document: a FeatureCollection of
# Polygon features whose rings are closed 5-point lists of [lon, lat]
# pairs within world bounds.
GEOJSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["type", "features"],
    "properties": {
        "type": {"const": "FeatureCollection"},
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "geometry", "properties"],
                "properties": {
                    "type": {"const": "Feature"},
                    "geometry": {
                        "type": "object",
                        "required": ["type", "coordinates"],
                        "properties": {
                            "type": {"const": "Polygon"},
                            "coordinates": {
                                "type": "array",
                                "minItems": 1,
                                "maxItems": 1,
                                "items": {
                                    "type": "array",
                                    "minItems": 5,
                                    "maxItems": 5,
                                    "items": {
                                        "type": "array",
                                        "prefixItems": [
                                            {"type": "number", "minimum": -180, "maximum": 180},
                                            {"type": "number", "minimum": -90, "maximum": 90},
                                        ],
                                        "minItems": 2,
                                        "maxItems": 2,
                                    },
                                },
                            },
                        },
                    },
                    "properties": {
                        "type": "object",
                        "required": ["geohash", "p_crime", "expected_fine_usd"],
                    },
                },
            },
        },
    },
}


@pytest.fixture(scope="module")
def surface(pipeline):
    return render_surface(
        pipeline.model, pipeline.poi_sets, SUB_BBOX, 6, pipeline.cfg.features
    )


@pytest.fixture(scope="module")
def geojson(surface):
    return surface_to_geojson(surface)


class TestRenderSurface:
    def test_cells_are_exactly_the_cover(self, surface):
        want = [g.code for g in cover(SUB_BBOX, 6)]
        got = [c.geohash.code for c in surface.cells]
        assert got == want
        assert len(surface.cells) == cover_count(SUB_BBOX, 6)

    def test_values_match_predict_cell_per_cell(self, pipeline, surface):
        # Rendering must be nothing more than predict_cell in a loop: each
        # cell, featurized on its own, yields bit-identical numbers.
        for cell in surface.cells:
            g = cell.geohash
            grid = CellGrid(precision=6, cells=(g,), bbox=decode_bbox(g))
            row = featurize(grid, pipeline.poi_sets, pipeline.cfg.features).rows[0]
            pred = predict_cell(pipeline.model, row, g)
            assert cell.p_crime == pred.p_crime
            assert cell.expected_fine_usd == pred.expected_fine_usd

    def test_other_precision(self, pipeline):
        surf = render_surface(pipeline.model, pipeline.poi_sets, SUB_BBOX, 5, pipeline.cfg.features)
        assert len(surf.cells) == cover_count(SUB_BBOX, 5)
        assert all(c.geohash.precision == 5 for c in surf.cells)

    def test_single_cell_bbox(self, pipeline):
        g = pipeline.grid.cells[17]
        b = decode_bbox(g)
        eps_lat = (b.max_lat - b.min_lat) / 10.0
        eps_lon = (b.max_lon - b.min_lon) / 10.0
        tiny = BBox(
            min_lat=b.min_lat + eps_lat,
            max_lat=b.max_lat - eps_lat,
            min_lon=b.min_lon + eps_lon,
            max_lon=b.max_lon - eps_lon,
        )
        surf = render_surface(pipeline.model, pipeline.poi_sets, tiny, 6, pipeline.cfg.features)
        assert [c.geohash.code for c in surf.cells] == [g.code]

    def test_cell_cap(self, pipeline):
        with pytest.raises(CellBudgetError, match="precision below 6"):
            render_surface(
                pipeline.model, pipeline.poi_sets, SUB_BBOX, 6, pipeline.cfg.features, cell_cap=4
            )

    def test_fingerprint_carried(self, pipeline, surface):
        assert surface.fingerprint == pipeline.model.fingerprint

    def test_deterministic(self, pipeline, geojson):
        again = surface_to_geojson(
            render_surface(pipeline.model, pipeline.poi_sets, SUB_BBOX, 6, pipeline.cfg.features)
        )
        assert json.dumps(again, sort_keys=True) == json.dumps(geojson, sort_keys=True)


class TestGeojson:
    def test_schema(self, geojson):
        jsonschema.validate(geojson, GEOJSON_SCHEMA)

    def test_one_feature_per_cell(self, surface, geojson):
        assert len(geojson["features"]) == len(surface.cells)
        codes = [f["properties"]["geohash"] for f in geojson["features"]]
        assert codes == [c.geohash.code for c in surface.cells]

    def test_rings_are_valid_ccw_polygons(self, geojson):
        for feat in geojson["features"]:
            poly = shape(feat["geometry"])
            assert poly.is_valid
            assert poly.exterior.is_ccw
            ring = feat["geometry"]["coordinates"][0]
            assert ring[0] == ring[-1]

    def test_corners_match_cell_bounds(self, geojson):
        for feat in geojson["features"]:
            b = decode_bbox(feat["properties"]["geohash"])
            w, e = round(b.min_lon, 6), round(b.max_lon, 6)
            s, n = round(b.min_lat, 6), round(b.max_lat, 6)
            assert feat["geometry"]["coordinates"][0] == [[w, s], [e, s], [e, n], [w, n], [w, s]]

    def test_coordinates_rounded_to_6_places(self, geojson):
        for feat in geojson["features"]:
            for lon, lat in feat["geometry"]["coordinates"][0]:
                assert lon == round(lon, 6)
                assert lat == round(lat, 6)

    def test_property_values(self, geojson):
        for feat in geojson["features"]:
            props = feat["properties"]
            assert 0.0 <= props["p_crime"] <= 1.0
            assert props["expected_fine_usd"] > 0.0

    def test_document_is_json_serializable(self, geojson):
        json.loads(json.dumps(geojson))
