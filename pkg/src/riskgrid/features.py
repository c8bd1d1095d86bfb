"""Risk-terrain features: per-cell POI aggregates and incident labels.

For every POI category c three raw columns are computed per cell —
``count_<c>`` (POIs inside the cell), ``dist_<c>_m`` (meters from the
cell center to the nearest POI, capped at ``dist_cap_m``), ``kde_<c>``
(Gaussian kernel density over POIs within 3 sigma of the center) — plus
a ``nbr_``-prefixed neighbor mean of each. Neighbor means average over a
cell's topological neighbors on the globe, including cells just outside
the grid, so a cell's feature vector never depends on which bbox it was
computed under.

All aggregations are order-canonical (counts, minima, and sums over
value-sorted contributions), so shuffling POI input order reproduces the
matrix bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from riskgrid.errors import SchemaError
from riskgrid.geogrid import (
    EARTH_RADIUS_M,
    BBox,
    Geohash,
    GeoPoint,
    cell_center,
    cover,
    encode,
    neighbors,
)

if TYPE_CHECKING:  # structural use only; keeps data <-> features import-cycle-free
    from riskgrid.data.types import Incident, PoiSet, Taxonomy

METRICS = ("count", "dist", "kde")

# Cells processed per vectorized distance block.
_BLOCK = 1024


@dataclass(frozen=True)
class FeatureParams:
    kde_sigma_m: float = 1000.0
    dist_cap_m: float = 50_000.0

    def __post_init__(self):
        if self.kde_sigma_m <= 0 or self.dist_cap_m <= 0:
            raise ValueError("kde_sigma_m and dist_cap_m must be positive")


@dataclass
class CellGrid:
    """The cover of a bbox at one precision, cells in canonical row-major
    order (the training-row order for everything downstream)."""

    precision: int
    cells: tuple[Geohash, ...]
    bbox: BBox
    _row: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.cells = tuple(self.cells)
        if not self._row:
            self._row = {g.code: i for i, g in enumerate(self.cells)}

    def __len__(self) -> int:
        return len(self.cells)

    def row_of(self, g: Geohash | str) -> int | None:
        code = g.code if isinstance(g, Geohash) else g
        return self._row.get(code)


@dataclass
class FeatureMatrix:
    """Per-cell feature vectors; row i belongs to CellGrid.cells[i]."""

    column_names: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self):
        self.column_names = tuple(self.column_names)
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.column_names):
            raise ValueError("rows must be 2-D with one column per name")
        if not np.isfinite(self.rows).all():
            raise ValueError("feature matrix contains non-finite values")

    def column(self, name: str) -> np.ndarray:
        try:
            return self.rows[:, self.column_names.index(name)]
        except ValueError:
            raise KeyError(name) from None


@dataclass
class CellLabels:
    """Training labels per grid cell.

    ``log_fine`` holds log10(mean fine, clamped to >= 1 USD) where
    ``crime_present`` and NaN elsewhere; ``type_labels[i]`` is the set of
    crime types observed in cell i (empty iff no crime).
    """

    crime_present: np.ndarray
    log_fine: np.ndarray
    type_labels: tuple[frozenset[str], ...]
    outside_ids: tuple[str, ...]

    @property
    def n_outside(self) -> int:
        return len(self.outside_ids)


def build_grid(bbox: BBox, precision: int, cell_cap: int | None = None) -> CellGrid:
    """Grid over cover(bbox, precision) in canonical order."""
    cells = cover(bbox, precision) if cell_cap is None else cover(bbox, precision, cell_cap)
    return CellGrid(precision=precision, cells=tuple(cells), bbox=bbox)


def column_names_for(categories: Sequence[str]) -> tuple[str, ...]:
    """Column layout: categories in input order; per category the metrics
    count, dist, kde, each raw column directly followed by its nbr_ mean."""
    names: list[str] = []
    for c in categories:
        names += [f"count_{c}", f"nbr_count_{c}", f"dist_{c}_m", f"nbr_dist_{c}_m", f"kde_{c}", f"nbr_kde_{c}"]
    return tuple(names)


def _haversine_block(lat1: np.ndarray, lon1: np.ndarray, lat2: np.ndarray, lon2: np.ndarray) -> np.ndarray:
    """Pairwise great-circle meters, (n, 1) x (1, m) broadcast."""
    p1 = np.radians(lat1)[:, None]
    p2 = np.radians(lat2)[None, :]
    dphi = p2 - p1
    dlmb = np.radians(lon2)[None, :] - np.radians(lon1)[:, None]
    a = np.sin(dphi / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(a))


def _cell_universe(grid: CellGrid) -> tuple[list[str], dict[str, list[int]], np.ndarray]:
    """Grid cells plus a halo of out-of-grid neighbors.

    Returns (codes, neighbor rows per grid cell, centers array). Raw
    metrics get computed for the halo too so border cells average over
    all existing neighbors, not just in-grid ones.
    """
    codes = [g.code for g in grid.cells]
    index = {c: i for i, c in enumerate(codes)}
    nbr_rows: dict[str, list[int]] = {}
    halo: list[str] = []
    for g in grid.cells:
        rows = []
        for nb in neighbors(g).values():
            i = index.get(nb.code)
            if i is None:
                i = len(codes) + len(halo)
                index[nb.code] = i
                halo.append(nb.code)
            rows.append(i)
        nbr_rows[g.code] = rows
    all_codes = codes + halo
    centers = np.empty((len(all_codes), 2))
    for i, code in enumerate(all_codes):
        c = cell_center(Geohash(code))
        centers[i, 0] = c.lat
        centers[i, 1] = c.lon
    return all_codes, nbr_rows, centers


def featurize(grid: CellGrid, poi_sets: Sequence["PoiSet"], params: FeatureParams = FeatureParams()) -> FeatureMatrix:
    if len(grid) == 0:
        raise ValueError("grid has no cells")
    cats = [ps.category for ps in poi_sets]
    if len(set(cats)) != len(cats):
        raise SchemaError(f"duplicate POI categories: {cats}")

    all_codes, nbr_rows, centers = _cell_universe(grid)
    n_all = len(all_codes)
    n = len(grid)
    sigma = params.kde_sigma_m
    radius = 3.0 * sigma

    raw: dict[str, np.ndarray] = {}
    for ps in poi_sets:
        counts = np.zeros(n_all)
        dist = np.full(n_all, params.dist_cap_m)
        kde = np.zeros(n_all)
        if len(ps.points):
            per_cell: dict[str, int] = {}
            lats = np.array([p.lat for p in ps.points])
            lons = np.array([p.lon for p in ps.points])
            for p in ps.points:
                code = encode(p, grid.precision).code
                per_cell[code] = per_cell.get(code, 0) + 1
            for i, code in enumerate(all_codes):
                counts[i] = per_cell.get(code, 0)
            for lo in range(0, n_all, _BLOCK):
                hi = min(lo + _BLOCK, n_all)
                d = _haversine_block(centers[lo:hi, 0], centers[lo:hi, 1], lats, lons)
                dist[lo:hi] = np.minimum(d.min(axis=1), params.dist_cap_m)
                contrib = np.exp(-(d * d) / (2.0 * sigma * sigma))
                inside = d <= radius
                for r in range(hi - lo):
                    sel = contrib[r][inside[r]]
                    # canonical (value-sorted) reduction: POI order can't
                    # perturb the float sum
                    kde[lo + r] = float(np.sum(np.sort(sel))) if sel.size else 0.0
        raw[f"count_{ps.category}"] = counts
        raw[f"dist_{ps.category}_m"] = dist
        raw[f"kde_{ps.category}"] = kde

    names = column_names_for(cats)
    out = np.empty((n, len(names)))
    for j, name in enumerate(names):
        if name.startswith("nbr_"):
            base = raw[name[4:]]
            for i, g in enumerate(grid.cells):
                rows = nbr_rows[g.code]
                out[i, j] = float(np.mean(base[rows]))
        else:
            out[:, j] = raw[name][:n]
    return FeatureMatrix(column_names=names, rows=out)


def label_cells(grid: CellGrid, incidents: Sequence["Incident"], taxonomy: "Taxonomy") -> CellLabels:
    """Aggregate incidents into per-cell labels by geohash membership.

    An incident whose encoded cell is not part of the grid is reported in
    ``outside_ids`` rather than raised.
    """
    n = len(grid)
    fines: list[list[float]] = [[] for _ in range(n)]
    types: list[set[str]] = [set() for _ in range(n)]
    outside: list[str] = []
    for inc in incidents:
        if inc.crime_type not in taxonomy:
            raise SchemaError(f"incident {inc.id!r} has type outside taxonomy: {inc.crime_type!r}")
        if inc.point is None:
            raise ValueError(f"incident {inc.id!r} is not geocoded")
        row = grid.row_of(encode(inc.point, grid.precision))
        if row is None:
            outside.append(inc.id)
            continue
        fines[row].append(inc.fine_usd)
        types[row].add(inc.crime_type)
    crime_present = np.array([len(f) > 0 for f in fines])
    log_fine = np.full(n, np.nan)
    for i, f in enumerate(fines):
        if f:
            log_fine[i] = math.log10(max(sum(f) / len(f), 1.0))
    return CellLabels(
        crime_present=crime_present,
        log_fine=log_fine,
        type_labels=tuple(frozenset(t) for t in types),
        outside_ids=tuple(outside),
    )


def write_feature_csv(grid: CellGrid, fm: FeatureMatrix, path) -> None:
    """One row per cell, geohash first, full-precision floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("geohash," + ",".join(fm.column_names) + "\n")
        for g, row in zip(grid.cells, fm.rows):
            fh.write(g.code + "," + ",".join(repr(float(v)) for v in row) + "\n")
