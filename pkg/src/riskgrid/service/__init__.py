from riskgrid.service.app import categories_from_schema, create_app, order_poi_sets
from riskgrid.service.config import (
    AppConfig,
    ServiceConfig,
    apply_overrides,
    demo_config_path,
    load_config,
    parse_config,
)
from riskgrid.service.surface import RiskSurface, SurfaceCell, render_surface, surface_to_geojson

__all__ = [
    "AppConfig",
    "RiskSurface",
    "ServiceConfig",
    "SurfaceCell",
    "apply_overrides",
    "categories_from_schema",
    "create_app",
    "demo_config_path",
    "load_config",
    "order_poi_sets",
    "parse_config",
    "render_surface",
    "surface_to_geojson",
]
