"""Seeded synthetic data with a planted, fully-known generative model.

Per cell: crime probability = logistic(weight_vector . features);
positive cells receive ``1 + Poisson(incident_rate - 1)`` incidents
placed uniformly inside the cell; each incident's log10 fine is drawn
from Normal(fine_coefficients . features, fine_sigma) clamped >= 2, and
its type from the cell's normalized per-label logistic scores. Features
are computed through the real `features` pipeline, so ground truth and
training see identical vectors.

Every sampling phase owns an independent stream derived from
(cfg.seed, phase tag); identical configs reproduce output byte for byte.
"""

from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from riskgrid.data.types import Incident, PoiSet, SynthConfig
from riskgrid.errors import SchemaError
from riskgrid.features import CellGrid, FeatureMatrix, build_grid, featurize, write_feature_csv
from riskgrid.geogrid import GeoPoint, decode_bbox
from riskgrid.seeding import rng_for

_DATE_START = datetime.date(1964, 1, 1)
_DATE_END = datetime.date(2025, 12, 31)

_FIRST = ("Avery", "Blair", "Casey", "Dana", "Ellis", "Frankie", "Gray", "Harper",
          "Indigo", "Jordan", "Kerry", "Lane", "Morgan", "Noel", "Oakley", "Parker")
_LAST = ("Abbott", "Barnes", "Calloway", "Drummond", "Ellsworth", "Fairbanks",
         "Granger", "Holloway", "Irving", "Jennings", "Kensington", "Lockhart",
         "Mercer", "Northrop", "Osborne", "Pemberton")


@dataclass
class GroundTruth:
    """The planted model evaluated on the generated grid."""

    grid: CellGrid
    feature_matrix: FeatureMatrix
    p_crime: np.ndarray
    mu_log_fine: np.ndarray
    type_probs: np.ndarray
    crime_present: np.ndarray

    @property
    def bayes_accuracy(self) -> float:
        """Accuracy of the best possible 0/1 predictor of crime presence."""
        return float(np.mean(np.maximum(self.p_crime, 1.0 - self.p_crime)))


@dataclass
class SynthResult:
    incidents: list[Incident]
    poi_sets: list[PoiSet]
    ground_truth: GroundTruth


def coef_vector(named: dict[str, float], column_names) -> np.ndarray:
    """Dense coefficient vector from a name-keyed dict; unnamed columns
    get 0, unknown names are a schema error."""
    unknown = set(named) - set(column_names)
    if unknown:
        raise SchemaError(f"coefficient names not in feature columns: {sorted(unknown)}")
    return np.array([named.get(c, 0.0) for c in column_names], dtype=np.float64)


def _logistic(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def synth_generate(cfg: SynthConfig) -> SynthResult:
    if 0.0 < cfg.incident_rate < 1.0:
        raise ValueError(
            f"incident_rate must be 0 or >= 1 (positive cells carry at least one incident): {cfg.incident_rate}"
        )
    grid = build_grid(cfg.bbox, cfg.precision)
    n = len(grid)

    poi_sets: list[PoiSet] = []
    for k, (cat, count) in enumerate(cfg.poi_counts.items()):
        rng = rng_for(cfg.seed, 1, k)
        lats = rng.uniform(cfg.bbox.min_lat, cfg.bbox.max_lat, size=count)
        lons = rng.uniform(cfg.bbox.min_lon, cfg.bbox.max_lon, size=count)
        poi_sets.append(PoiSet(cat, tuple(GeoPoint(float(a), float(o)) for a, o in zip(lats, lons))))

    fm = featurize(grid, poi_sets)
    X = fm.rows
    w = coef_vector(cfg.weight_vector, fm.column_names)
    p_crime = _logistic(X @ w + cfg.intercept)
    mu_log_fine = X @ coef_vector(cfg.fine_coefficients, fm.column_names) + cfg.fine_intercept

    labels = cfg.taxonomy.labels
    scores = np.empty((n, len(labels)))
    for j, label in enumerate(labels):
        v = coef_vector(cfg.type_mixing.get(label, {}), fm.column_names)
        scores[:, j] = _logistic(X @ v + cfg.type_intercepts.get(label, 0.0))
    type_probs = scores / scores.sum(axis=1, keepdims=True)

    if cfg.incident_rate == 0.0:
        present = np.zeros(n, dtype=bool)
        per_cell = np.zeros(n, dtype=np.int64)
    else:
        present = rng_for(cfg.seed, 2).random(n) < p_crime
        per_cell = np.zeros(n, dtype=np.int64)
        n_pos = int(present.sum())
        per_cell[present] = 1 + rng_for(cfg.seed, 3).poisson(cfg.incident_rate - 1.0, size=n_pos)

    total = int(per_cell.sum())
    cell_of = np.repeat(np.arange(n), per_cell)

    loc_rng = rng_for(cfg.seed, 4)
    fine_rng = rng_for(cfg.seed, 5)
    type_rng = rng_for(cfg.seed, 6)
    meta_rng = rng_for(cfg.seed, 7)

    log_fines = np.maximum(fine_rng.normal(mu_log_fine[cell_of], cfg.fine_sigma), 2.0) if total else np.empty(0)
    type_u = type_rng.random(total)
    day_span = (_DATE_END - _DATE_START).days
    days = meta_rng.integers(0, day_span + 1, size=total)
    name_idx = meta_rng.integers(0, len(_FIRST) * len(_LAST), size=total)

    incidents: list[Incident] = []
    for i in range(total):
        row = int(cell_of[i])
        b = decode_bbox(grid.cells[row])
        lat = float(loc_rng.uniform(b.min_lat, b.max_lat))
        lon = float(loc_rng.uniform(b.min_lon, b.max_lon))
        cum = np.cumsum(type_probs[row])
        j = int(np.searchsorted(cum, type_u[i], side="right"))
        j = min(j, len(labels) - 1)
        ni = int(name_idx[i])
        incidents.append(Incident(
            id=f"INC-{i:06d}",
            date=_DATE_START + datetime.timedelta(days=int(days[i])),
            point=GeoPoint(lat, lon),
            crime_type=labels[j],
            fine_usd=float(10.0 ** log_fines[i]),
            respondent=f"{_FIRST[ni % len(_FIRST)]} {_LAST[ni // len(_FIRST)]}",
        ))

    gt = GroundTruth(
        grid=grid,
        feature_matrix=fm,
        p_crime=p_crime,
        mu_log_fine=mu_log_fine,
        type_probs=type_probs,
        crime_present=per_cell > 0,
    )
    return SynthResult(incidents=incidents, poi_sets=poi_sets, ground_truth=gt)


# ---------------------------------------------------------------------- CSV

def write_incidents_csv(incidents, path) -> None:
    """Loader-compatible incident CSV; floats use shortest round-trip repr."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "date", "lat", "lon", "address", "crime_type", "fine_usd", "respondent"])
        for inc in incidents:
            writer.writerow([
                inc.id,
                inc.date.isoformat(),
                repr(inc.point.lat) if inc.point else "",
                repr(inc.point.lon) if inc.point else "",
                inc.address or "",
                inc.crime_type,
                repr(inc.fine_usd),
                inc.respondent,
            ])


def write_poi_csv(poi_set: PoiSet, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("lat,lon\n")
        for p in poi_set.points:
            fh.write(f"{p.lat!r},{p.lon!r}\n")


def write_ground_truth_csv(gt: GroundTruth, path) -> None:
    labels = [f"p_type_{j}" for j in range(gt.type_probs.shape[1])]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("geohash,p_crime,mu_log_fine,crime_present," + ",".join(labels) + "\n")
        for i, g in enumerate(gt.grid.cells):
            probs = ",".join(repr(float(v)) for v in gt.type_probs[i])
            fh.write(
                f"{g.code},{gt.p_crime[i]!r},{gt.mu_log_fine[i]!r},"
                f"{int(gt.crime_present[i])},{probs}\n"
            )


def write_synth_csvs(result: SynthResult, out_dir) -> dict[str, Path]:
    """All artifacts of one generation run; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    paths["incidents"] = out / "incidents.csv"
    write_incidents_csv(result.incidents, paths["incidents"])
    for ps in result.poi_sets:
        key = f"poi_{ps.category}"
        paths[key] = out / f"{key}.csv"
        write_poi_csv(ps, paths[key])
    paths["ground_truth"] = out / "ground_truth.csv"
    write_ground_truth_csv(result.ground_truth, paths["ground_truth"])
    paths["features"] = out / "features.csv"
    write_feature_csv(result.ground_truth.grid, result.ground_truth.feature_matrix, paths["features"])
    return paths
