"""CSV loaders with per-row error reports.

Incident files carry the header ``id,date,lat,lon,address,crime_type,
fine_usd,respondent`` (UTF-8, RFC-4180 quoting). A row may supply either
lat/lon or an address; address-only rows land in the "needs geocoding"
partition. POI files carry ``lat,lon``; extra columns are ignored.

Malformed rows are collected, never silently dropped; when their share
exceeds ``max_bad_fraction`` the whole load fails.
"""

from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass, field
from typing import Iterable

from riskgrid.data.types import Incident, PoiSet, Taxonomy
from riskgrid.errors import LoadError, SchemaError
from riskgrid.geogrid import GeoPoint

INCIDENT_COLUMNS = ("id", "date", "lat", "lon", "address", "crime_type", "fine_usd", "respondent")
POI_COLUMNS = ("lat", "lon")

# Records before this year predate the earliest source era and get a
# warning entry (loaded anyway).
EARLIEST_PLAUSIBLE_YEAR = 1964

DEFAULT_MAX_BAD_FRACTION = 0.10


@dataclass(frozen=True)
class RowIssue:
    line: int
    reason: str
    row: dict


@dataclass
class IncidentLoadResult:
    incidents: list[Incident] = field(default_factory=list)
    needs_geocoding: list[Incident] = field(default_factory=list)
    errors: list[RowIssue] = field(default_factory=list)
    warnings: list[RowIssue] = field(default_factory=list)

    @property
    def all_rows(self) -> int:
        return len(self.incidents) + len(self.needs_geocoding) + len(self.errors)


@dataclass
class PoiLoadResult:
    poi_set: PoiSet = None  # type: ignore[assignment]
    errors: list[RowIssue] = field(default_factory=list)


def _check_header(found: Iterable[str] | None, required: tuple[str, ...], path) -> None:
    found = list(found or [])
    missing = [c for c in required if c not in found]
    if missing:
        raise SchemaError(f"{path}: header is missing columns {missing} (found {found})")


def _parse_point(row: dict) -> GeoPoint | None:
    """GeoPoint from lat/lon fields, None when both are blank; raises
    ValueError on half-filled or out-of-range coordinates."""
    lat_s = (row.get("lat") or "").strip()
    lon_s = (row.get("lon") or "").strip()
    if not lat_s and not lon_s:
        return None
    if not lat_s or not lon_s:
        raise ValueError("one of lat/lon is missing")
    return GeoPoint(float(lat_s), float(lon_s))


def load_incidents(
    path,
    taxonomy: Taxonomy,
    max_bad_fraction: float = DEFAULT_MAX_BAD_FRACTION,
) -> IncidentLoadResult:
    """Parse every row; geocoded rows become incidents, address-only rows
    go to ``needs_geocoding``, bad rows to ``errors`` with a reason."""
    result = IncidentLoadResult()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, INCIDENT_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            try:
                incident = _parse_incident_row(row, taxonomy)
            except (ValueError, KeyError) as exc:
                result.errors.append(RowIssue(line, str(exc), dict(row)))
                continue
            if incident.date.year < EARLIEST_PLAUSIBLE_YEAR:
                result.warnings.append(
                    RowIssue(line, f"date {incident.date.isoformat()} predates {EARLIEST_PLAUSIBLE_YEAR}", dict(row))
                )
            if incident.point is None:
                result.needs_geocoding.append(incident)
            else:
                result.incidents.append(incident)
    total = result.all_rows
    if total and len(result.errors) / total > max_bad_fraction:
        raise LoadError(
            f"{path}: {len(result.errors)}/{total} malformed rows exceeds "
            f"the {max_bad_fraction:.0%} threshold"
        )
    return result


def _parse_incident_row(row: dict, taxonomy: Taxonomy) -> Incident:
    rid = (row.get("id") or "").strip()
    if not rid:
        raise ValueError("missing id")
    try:
        date = datetime.date.fromisoformat((row.get("date") or "").strip())
    except ValueError:
        raise ValueError(f"bad date: {row.get('date')!r}") from None
    fine_s = (row.get("fine_usd") or "").strip()
    try:
        fine = float(fine_s)
    except ValueError:
        raise ValueError(f"bad fine_usd: {fine_s!r}") from None
    if fine < 0:
        raise ValueError("negative fine")
    ctype = (row.get("crime_type") or "").strip()
    if ctype not in taxonomy:
        raise ValueError(f"crime_type not in taxonomy: {ctype!r}")
    point = _parse_point(row)
    address = (row.get("address") or "").strip() or None
    if point is None and address is None:
        raise ValueError("row has neither coordinates nor an address")
    return Incident(
        id=rid,
        date=date,
        point=point,
        crime_type=ctype,
        fine_usd=fine,
        respondent=(row.get("respondent") or "").strip(),
        address=address,
    )


def load_poi(
    path,
    category: str,
    max_bad_fraction: float = DEFAULT_MAX_BAD_FRACTION,
) -> PoiLoadResult:
    result = PoiLoadResult()
    points: list[GeoPoint] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader.fieldnames, POI_COLUMNS, path)
        for line, row in enumerate(reader, start=2):
            try:
                lat = float((row.get("lat") or "").strip())
                lon = float((row.get("lon") or "").strip())
                points.append(GeoPoint(lat, lon))
            except ValueError as exc:
                result.errors.append(RowIssue(line, str(exc), dict(row)))
    total = len(points) + len(result.errors)
    if total and len(result.errors) / total > max_bad_fraction:
        raise LoadError(
            f"{path}: {len(result.errors)}/{total} malformed rows exceeds "
            f"the {max_bad_fraction:.0%} threshold"
        )
    result.poi_set = PoiSet(category=category, points=tuple(points))
    return result
