"""Dataset schemas, CSV loaders, geocoding client, synthetic generator."""

from riskgrid.data.geocode import (
    CachingGeocoder,
    Geocoder,
    HttpGeocoder,
    StaticGeocoder,
    normalize_address,
)
from riskgrid.data.loaders import (
    IncidentLoadResult,
    PoiLoadResult,
    RowIssue,
    load_incidents,
    load_poi,
)
from riskgrid.data.synth import (
    GroundTruth,
    SynthResult,
    synth_generate,
    write_incidents_csv,
    write_poi_csv,
    write_synth_csvs,
)
from riskgrid.data.types import (
    DEFAULT_TAXONOMY_LABELS,
    POI_CATEGORIES,
    Incident,
    PoiSet,
    SynthConfig,
    Taxonomy,
)

__all__ = [
    "CachingGeocoder",
    "DEFAULT_TAXONOMY_LABELS",
    "Geocoder",
    "GroundTruth",
    "HttpGeocoder",
    "Incident",
    "IncidentLoadResult",
    "POI_CATEGORIES",
    "PoiLoadResult",
    "PoiSet",
    "RowIssue",
    "StaticGeocoder",
    "SynthConfig",
    "SynthResult",
    "Taxonomy",
    "load_incidents",
    "load_poi",
    "normalize_address",
    "synth_generate",
    "write_incidents_csv",
    "write_poi_csv",
    "write_synth_csvs",
]
