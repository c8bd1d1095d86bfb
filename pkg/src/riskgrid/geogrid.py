"""Geohash grid primitives: encode/decode, box covering, neighbors, distance.

Conventions (fixed for the life of any trained model):

* Standard base32 alphabet, longitude bit first, so e.g. (40.15, 74) at
  precision 4 encodes to ``txhs``.
* A coordinate sitting exactly on a cell boundary belongs to the upper
  cell (the ``value >= midpoint`` branch of the binary subdivision).
* Bounding boxes never cross the antimeridian; callers split such boxes
  themselves.
* All distances use a spherical Earth with mean radius
  :data:`EARTH_RADIUS_M`; this is the single distance constant in the
  package so that every derived feature is comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from riskgrid.errors import CellBudgetError, GeohashParseError

ALPHABET = "0123456789bcdefghjkmnpqrstuvwxyz"
_CHAR_INDEX = {c: i for i, c in enumerate(ALPHABET)}

EARTH_RADIUS_M = 6_371_000.0

MAX_PRECISION = 12

#: Default ceiling on cells produced by :func:`cover`; keeps surface
#: rendering memory-bounded at desk scale.
DEFAULT_CELL_CAP = 250_000

#: Neighbor directions in canonical order.
DIRECTIONS = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
_DIRECTION_OFFSETS = {
    "N": (1, 0),
    "NE": (1, 1),
    "E": (0, 1),
    "SE": (-1, 1),
    "S": (-1, 0),
    "SW": (-1, -1),
    "W": (0, -1),
    "NW": (1, -1),
}


@dataclass(frozen=True)
class GeoPoint:
    """A latitude/longitude pair in degrees."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (isinstance(self.lat, (int, float)) and math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude out of range [-90, 90]: {self.lat!r}")
        if not (isinstance(self.lon, (int, float)) and math.isfinite(self.lon) and -180.0 <= self.lon <= 180.0):
            raise ValueError(f"longitude out of range [-180, 180]: {self.lon!r}")


@dataclass(frozen=True)
class BBox:
    """An axis-aligned lat/lon box. Antimeridian-crossing boxes are rejected."""

    min_lat: float
    max_lat: float
    min_lon: float
    max_lon: float

    def __post_init__(self):
        for name in ("min_lat", "max_lat", "min_lon", "max_lon"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValueError(f"{name} is not a finite number: {v!r}")
        if not -90.0 <= self.min_lat < self.max_lat <= 90.0:
            raise ValueError(f"need -90 <= min_lat < max_lat <= 90, got [{self.min_lat}, {self.max_lat}]")
        if not -180.0 <= self.min_lon < self.max_lon <= 180.0:
            raise ValueError(f"need -180 <= min_lon < max_lon <= 180, got [{self.min_lon}, {self.max_lon}]")

    @property
    def center(self) -> GeoPoint:
        return GeoPoint((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)

    def contains(self, p: GeoPoint) -> bool:
        return self.min_lat <= p.lat <= self.max_lat and self.min_lon <= p.lon <= self.max_lon


@dataclass(frozen=True)
class Geohash:
    """A base32 geohash cell identifier; precision equals the code length."""

    code: str

    def __post_init__(self):
        if not isinstance(self.code, str) or not 1 <= len(self.code) <= MAX_PRECISION:
            raise GeohashParseError(f"geohash length must be 1..{MAX_PRECISION}: {self.code!r}")
        bad = [c for c in self.code if c not in _CHAR_INDEX]
        if bad:
            raise GeohashParseError(f"invalid geohash characters {bad!r} in {self.code!r}")

    @property
    def precision(self) -> int:
        return len(self.code)

    def truncate(self, precision: int) -> "Geohash":
        """The containing cell at a coarser precision (the prefix)."""
        if not 1 <= precision <= self.precision:
            raise ValueError(f"truncation precision must be in [1, {self.precision}]: {precision}")
        return Geohash(self.code[:precision])

    def __str__(self) -> str:
        return self.code


def _bit_split(precision: int) -> tuple[int, int]:
    """(lat_bits, lon_bits) for a precision; longitude gets the extra bit."""
    total = 5 * precision
    return total // 2, (total + 1) // 2


def encode(point: GeoPoint, precision: int) -> Geohash:
    """Geohash of the cell containing ``point`` at the given precision.

    Boundary coordinates resolve to the upper half at every subdivision
    step, so the result is deterministic for points on cell edges.
    """
    if not isinstance(precision, int) or not 1 <= precision <= MAX_PRECISION:
        raise ValueError(f"precision must be an integer in [1, {MAX_PRECISION}]: {precision!r}")
    if not isinstance(point, GeoPoint):
        point = GeoPoint(*point)

    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    chars = []
    ch = 0
    bit = 0
    even = True  # longitude first
    while len(chars) < precision:
        if even:
            mid = (lon_lo + lon_hi) / 2.0
            if point.lon >= mid:
                ch |= 1 << (4 - bit)
                lon_lo = mid
            else:
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2.0
            if point.lat >= mid:
                ch |= 1 << (4 - bit)
                lat_lo = mid
            else:
                lat_hi = mid
        even = not even
        if bit < 4:
            bit += 1
        else:
            chars.append(ALPHABET[ch])
            ch = 0
            bit = 0
    return Geohash("".join(chars))


def decode_bbox(g: Geohash | str) -> BBox:
    """Exact lat/lon bounds of a geohash cell."""
    if not isinstance(g, Geohash):
        g = Geohash(g)
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    even = True
    for c in g.code:
        idx = _CHAR_INDEX[c]
        for bit in range(5):
            mask = 1 << (4 - bit)
            if even:
                mid = (lon_lo + lon_hi) / 2.0
                if idx & mask:
                    lon_lo = mid
                else:
                    lon_hi = mid
            else:
                mid = (lat_lo + lat_hi) / 2.0
                if idx & mask:
                    lat_lo = mid
                else:
                    lat_hi = mid
            even = not even
    return BBox(min_lat=lat_lo, max_lat=lat_hi, min_lon=lon_lo, max_lon=lon_hi)


def cell_center(g: Geohash | str) -> GeoPoint:
    """Geometric center of the cell's bounding box."""
    return decode_bbox(g).center


def _to_indices(g: Geohash) -> tuple[int, int]:
    """(lat_index, lon_index) of the cell in the global grid at its precision."""
    lat_idx = 0
    lon_idx = 0
    even = True
    for c in g.code:
        idx = _CHAR_INDEX[c]
        for bit in range(5):
            b = (idx >> (4 - bit)) & 1
            if even:
                lon_idx = (lon_idx << 1) | b
            else:
                lat_idx = (lat_idx << 1) | b
            even = not even
    return lat_idx, lon_idx


def _from_indices(lat_idx: int, lon_idx: int, precision: int) -> Geohash:
    """Inverse of :func:`_to_indices`."""
    lat_bits, lon_bits = _bit_split(precision)
    bits = []
    even = True
    li, lo = lat_bits, lon_bits
    for _ in range(5 * precision):
        if even:
            lo -= 1
            bits.append((lon_idx >> lo) & 1)
        else:
            li -= 1
            bits.append((lat_idx >> li) & 1)
        even = not even
    chars = []
    for i in range(0, len(bits), 5):
        ch = 0
        for b in bits[i : i + 5]:
            ch = (ch << 1) | b
        chars.append(ALPHABET[ch])
    return Geohash("".join(chars))


def cell_spans(precision: int) -> tuple[float, float]:
    """(lat_span, lon_span) of a cell in degrees; exact dyadic values."""
    lat_bits, lon_bits = _bit_split(precision)
    return 180.0 / (1 << lat_bits), 360.0 / (1 << lon_bits)


def cover(b: BBox, precision: int, cap: int = DEFAULT_CELL_CAP) -> list[Geohash]:
    """Every precision-``precision`` cell whose interior overlaps ``b``.

    Returned row-major by cell center: south to north, then west to east
    within each row. Cells that only touch the box along an edge are not
    included, so covering a cell's own bbox at the next precision yields
    exactly its 32 children.
    """
    if not isinstance(precision, int) or not 1 <= precision <= MAX_PRECISION:
        raise ValueError(f"precision must be an integer in [1, {MAX_PRECISION}]: {precision!r}")
    lat_span, lon_span = cell_spans(precision)

    i0, j0 = _to_indices(encode(GeoPoint(b.min_lat, b.min_lon), precision))
    i1, j1 = _to_indices(encode(GeoPoint(b.max_lat, b.max_lon), precision))
    # The corner cell of (max_lat, max_lon) is excluded when the box ends
    # exactly on its lower edge (interior-overlap semantics).
    if -90.0 + i1 * lat_span >= b.max_lat:
        i1 -= 1
    if -180.0 + j1 * lon_span >= b.max_lon:
        j1 -= 1

    count = (i1 - i0 + 1) * (j1 - j0 + 1)
    if count > cap:
        raise CellBudgetError(count, cap)
    return [_from_indices(i, j, precision) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)]


def cover_count(b: BBox, precision: int) -> int:
    """Number of cells :func:`cover` would return, without materializing them."""
    lat_span, lon_span = cell_spans(precision)
    i0, j0 = _to_indices(encode(GeoPoint(b.min_lat, b.min_lon), precision))
    i1, j1 = _to_indices(encode(GeoPoint(b.max_lat, b.max_lon), precision))
    if -90.0 + i1 * lat_span >= b.max_lat:
        i1 -= 1
    if -180.0 + j1 * lon_span >= b.max_lon:
        j1 -= 1
    return (i1 - i0 + 1) * (j1 - j0 + 1)


def neighbors(g: Geohash | str) -> dict[str, Geohash]:
    """The adjacent cells of ``g`` keyed by direction, in N..NW order.

    East/west wrap across the antimeridian. Cells in the top or bottom
    row of the globe have no northern resp. southern neighbors; those
    directions are simply absent from the result.
    """
    if not isinstance(g, Geohash):
        g = Geohash(g)
    lat_bits, lon_bits = _bit_split(g.precision)
    n_lat = 1 << lat_bits
    n_lon = 1 << lon_bits
    lat_idx, lon_idx = _to_indices(g)

    out: dict[str, Geohash] = {}
    for direction in DIRECTIONS:
        di, dj = _DIRECTION_OFFSETS[direction]
        i = lat_idx + di
        if not 0 <= i < n_lat:
            continue  # pole-adjacent: neighbor does not exist
        j = (lon_idx + dj) % n_lon
        out[direction] = _from_indices(i, j, g.precision)
    return out


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on the mean-radius sphere."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))
