"""Geocoding clients: HTTP with rate limiting, a static stub, and a
sqlite-backed cache wrapper.

HTTP contract: GET ``{base_url}?q=<address>``; the response is JSON —
either a top-level array or ``{"results": [...]}`` — whose first element
carries ``lat`` and ``lon`` decimal-string fields. Base URL comes from
the constructor or the ``RISKGRID_GEOCODER_URL`` environment variable.
"""

from __future__ import annotations

import os
import sqlite3
import time
from typing import Callable, Mapping, Protocol

import httpx

from riskgrid.errors import (
    GeocodeError,
    GeocodeNotFound,
    GeocodeProtocolError,
    GeocodeUnavailable,
)
from riskgrid.geogrid import GeoPoint

ENV_BASE_URL = "RISKGRID_GEOCODER_URL"


def normalize_address(address: str) -> str:
    """Cache key canonicalization: trim, collapse whitespace, lowercase."""
    return " ".join(address.split()).lower()


class Geocoder(Protocol):
    def geocode(self, address: str) -> GeoPoint: ...


class StaticGeocoder:
    """In-memory stub keyed by normalized address; network-free."""

    def __init__(self, table: Mapping[str, GeoPoint]):
        self._table = {normalize_address(k): v for k, v in table.items()}
        self.calls = 0

    def geocode(self, address: str) -> GeoPoint:
        self.calls += 1
        try:
            return self._table[normalize_address(address)]
        except KeyError:
            raise GeocodeNotFound(f"no match for {address!r}") from None


class HttpGeocoder:
    """Rate-limited client for the documented HTTP contract."""

    def __init__(
        self,
        base_url: str | None = None,
        client: httpx.Client | None = None,
        min_interval_s: float = 1.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url or os.environ.get(ENV_BASE_URL)
        if not self.base_url:
            raise GeocodeError(f"no geocoder base URL (set {ENV_BASE_URL} or pass base_url)")
        self._client = client or httpx.Client(timeout=10.0)
        self._min_interval = min_interval_s
        self._clock = clock
        self._sleep = sleep
        self._last_request: float | None = None

    def _throttle(self) -> None:
        if self._last_request is not None:
            wait = self._last_request + self._min_interval - self._clock()
            if wait > 0:
                self._sleep(wait)
        self._last_request = self._clock()

    def geocode(self, address: str) -> GeoPoint:
        if not address.strip():
            raise ValueError("address must be nonempty")
        self._throttle()
        try:
            resp = self._client.get(self.base_url, params={"q": address})
        except httpx.HTTPError as exc:
            raise GeocodeUnavailable(f"geocoder unreachable: {exc}") from exc
        if resp.status_code >= 500:
            raise GeocodeUnavailable(f"geocoder returned {resp.status_code}")
        if resp.status_code != 200:
            raise GeocodeProtocolError(f"geocoder returned {resp.status_code}")
        try:
            doc = resp.json()
        except ValueError as exc:
            raise GeocodeProtocolError(f"geocoder sent non-JSON response: {exc}") from exc
        results = doc.get("results") if isinstance(doc, dict) else doc
        if not isinstance(results, list):
            raise GeocodeProtocolError(f"unexpected response shape: {type(doc).__name__}")
        if not results:
            raise GeocodeNotFound(f"no match for {address!r}")
        first = results[0]
        try:
            return GeoPoint(float(first["lat"]), float(first["lon"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise GeocodeProtocolError(f"bad first result {first!r}: {exc}") from exc


class CachingGeocoder:
    """Single-file persistent cache; hits never touch the inner client.

    Only successful lookups are cached, so transient failures stay
    retryable. Safe for one writer and many readers.
    """

    def __init__(self, inner: Geocoder, path):
        self._inner = inner
        self._conn = sqlite3.connect(path)
        self._conn.execute(
            "CREATE TABLE IF NOT EXISTS geocode_cache ("
            " address TEXT PRIMARY KEY, lat REAL NOT NULL, lon REAL NOT NULL)"
        )
        self._conn.commit()

    def geocode(self, address: str) -> GeoPoint:
        key = normalize_address(address)
        row = self._conn.execute(
            "SELECT lat, lon FROM geocode_cache WHERE address = ?", (key,)
        ).fetchone()
        if row is not None:
            return GeoPoint(row[0], row[1])
        point = self._inner.geocode(address)
        self._conn.execute(
            "INSERT OR REPLACE INTO geocode_cache (address, lat, lon) VALUES (?, ?, ?)",
            (key, point.lat, point.lon),
        )
        self._conn.commit()
        return point

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "CachingGeocoder":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
