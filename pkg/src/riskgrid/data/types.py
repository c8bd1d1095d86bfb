"""Record types shared by the loaders, the synthesizer, and training."""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

from riskgrid.errors import SchemaError
from riskgrid.geogrid import BBox, GeoPoint

# Default crime-type taxonomy; ordered, and the order is frozen into any
# trained model that uses it.
DEFAULT_TAXONOMY_LABELS: tuple[str, ...] = (
    "fraud",
    "insider_trading",
    "money_laundering",
    "market_manipulation",
    "embezzlement",
    "bribery",
    "tax_evasion",
    "ponzi_scheme",
    "forgery",
    "breach_of_fiduciary_duty",
)

POI_CATEGORIES: tuple[str, ...] = (
    "investment_advisers",
    "liquor_licenses",
    "tax_exempt_orgs",
)


@dataclass(frozen=True)
class Taxonomy:
    """Ordered, duplicate-free list of crime-type labels."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise SchemaError("taxonomy must have at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise SchemaError("taxonomy labels must be distinct")
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def default(cls) -> "Taxonomy":
        return cls(DEFAULT_TAXONOMY_LABELS)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SchemaError(f"label not in taxonomy: {label!r}") from None

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Incident:
    """One financial-crime record. `point` may be None before geocoding, in
    which case `address` must be present."""

    id: str
    date: datetime.date
    point: GeoPoint | None
    crime_type: str
    fine_usd: float
    respondent: str
    address: str | None = None

    def __post_init__(self) -> None:
        if self.fine_usd < 0:
            raise ValueError(f"fine_usd must be non-negative: {self.fine_usd}")
        if self.point is None and not self.address:
            raise ValueError(f"incident {self.id!r} has neither coordinates nor an address")


@dataclass(frozen=True)
class PoiSet:
    """Point-of-interest dataset for one category."""

    category: str
    points: tuple[GeoPoint, ...]

    def __post_init__(self) -> None:
        if not self.category:
            raise SchemaError("poi category must be nonempty")
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class SynthConfig:
    """Planted generative model for the synthetic pipeline.

    weight_vector / fine_coefficients / type_mixing are keyed by feature
    column name (as produced by the feature stage); type_mixing maps each
    taxonomy label to its own coefficient vector. The seed fully determines
    the generated datasets.
    """

    bbox: BBox
    precision: int
    poi_counts: dict[str, int]
    weight_vector: dict[str, float]
    intercept: float
    fine_coefficients: dict[str, float]
    fine_intercept: float
    fine_sigma: float
    type_mixing: dict[str, dict[str, float]]
    type_intercepts: dict[str, float]
    incident_rate: float
    seed: int
    taxonomy: Taxonomy = field(default_factory=Taxonomy.default)

    def __post_init__(self) -> None:
        if not 1 <= self.precision <= 12:
            raise ValueError(f"precision out of range 1..12: {self.precision}")
        for cat, n in self.poi_counts.items():
            if n < 0:
                raise ValueError(f"poi count for {cat!r} must be >= 0: {n}")
        if self.incident_rate < 0:
            raise ValueError(f"incident_rate must be >= 0: {self.incident_rate}")
        if self.fine_sigma < 0:
            raise ValueError(f"fine_sigma must be >= 0: {self.fine_sigma}")
        unknown = set(self.type_mixing) - set(self.taxonomy.labels)
        if unknown:
            raise SchemaError(f"type_mixing labels not in taxonomy: {sorted(unknown)}")
        unknown = set(self.type_intercepts) - set(self.taxonomy.labels)
        if unknown:
            raise SchemaError(f"type_intercepts labels not in taxonomy: {sorted(unknown)}")
