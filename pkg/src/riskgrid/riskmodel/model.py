"""Composite risk model: crime probability, conditional fine, and crime-type
likelihoods per grid cell.

Three sub-models share one feature schema:

* ``m_crime`` — random forest on all (downsampled) cells, crime present or not;
* ``m_fine`` — polynomial regression on positive cells only, target log10(fine),
  i.e. the expected fine *given* that a crime occurs;
* ``m_type`` — one-vs-rest forests over the taxonomy, on positive cells only.

``train_all`` fits all three, cross-validates each, and packs the results with
enough metadata to reproduce the run byte for byte.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from riskgrid.data.types import Taxonomy
from riskgrid.errors import SchemaError, TrainingError
from riskgrid.features import CellGrid, CellLabels, FeatureMatrix
from riskgrid.geogrid import Geohash
from riskgrid.learn import (
    EvalReport,
    ForestParams,
    LearnerSpec,
    LinearModel,
    OvRModel,
    RandomForest,
    accuracy_at_half,
    cross_validate,
    fit_forest,
    fit_linreg,
    fit_ovr,
    membership_matrix,
    predict_ovr,
    r_squared,
    subset_accuracy,
)
from riskgrid.seeding import child_seed, rng_for

# Fine brackets for the severity histogram, USD. Open-ended below the first
# and above the last edge.
DEFAULT_SEVERITY_EDGES_USD = (1e3, 1e4, 1e5, 1e6, 1e7)

_DOWNSAMPLE_KEY = 0xD5


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for train_all. Sub-model seeds are derived from ``seed``; the
    ``seed`` fields inside the two ForestParams are ignored."""

    seed: int = 0
    crime_params: ForestParams = field(default_factory=ForestParams)
    type_params: ForestParams = field(default_factory=ForestParams)
    fine_degree: int = 2
    # Max negatives kept per positive cell when fitting m_crime; None keeps all.
    neg_ratio: float | None = 3.0
    cv_folds: int = 10
    top_k: int = 5
    severity_edges_usd: tuple[float, ...] = DEFAULT_SEVERITY_EDGES_USD
    taxonomy: Taxonomy = field(default_factory=Taxonomy.default)
    n_jobs: int = 1
    # ISO-8601 UTC stamp recorded in metadata. None resolves to
    # $SOURCE_DATE_EPOCH when set (reproducible builds), else the wall clock.
    trained_at: str | None = None

    def __post_init__(self):
        if self.fine_degree < 1:
            raise ValueError(f"fine_degree must be >= 1: {self.fine_degree}")
        if self.neg_ratio is not None and self.neg_ratio <= 0:
            raise ValueError(f"neg_ratio must be positive or None: {self.neg_ratio}")
        if self.cv_folds < 2:
            raise ValueError(f"cv_folds must be >= 2: {self.cv_folds}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1: {self.top_k}")
        edges = tuple(float(e) for e in self.severity_edges_usd)
        if not edges or any(e <= 0 for e in edges) or list(edges) != sorted(set(edges)):
            raise ValueError("severity_edges_usd must be positive and strictly increasing")
        object.__setattr__(self, "severity_edges_usd", edges)
        if self.n_jobs < 1:
            raise ValueError(f"n_jobs must be >= 1: {self.n_jobs}")

    def knob_dict(self) -> dict:
        """The training knobs as a plain JSON-ready dict. Taxonomy and
        trained_at live elsewhere in the model; n_jobs is excluded because
        it must not influence the artifact (same model at any thread count).
        """
        return {
            "seed": self.seed,
            "crime_params": _params_dict(self.crime_params),
            "type_params": _params_dict(self.type_params),
            "fine_degree": self.fine_degree,
            "neg_ratio": self.neg_ratio,
            "cv_folds": self.cv_folds,
            "top_k": self.top_k,
            "severity_edges_usd": list(self.severity_edges_usd),
        }


def _params_dict(p: ForestParams) -> dict:
    d = asdict(p)
    d.pop("seed", None)  # derived, not a user knob here
    return d


@dataclass
class ModelMetadata:
    trained_at: str
    seed: int
    params: dict
    data_fingerprint: str
    eval_report: EvalReport
    fine_sigma: float
    severity_edges_usd: tuple[float, ...]
    top_k: int
    train_precision: int
    n_cells: int
    n_positive: int
    downsample: dict


@dataclass
class WccewsModel:
    """The trained composite; immutable once built, safe for concurrent
    readers."""

    m_crime: RandomForest
    m_fine: LinearModel
    m_type: OvRModel
    feature_schema: tuple[str, ...]
    taxonomy: Taxonomy
    metadata: ModelMetadata

    def __post_init__(self):
        self.feature_schema = tuple(self.feature_schema)
        d = len(self.feature_schema)
        if not (self.m_crime.n_features == self.m_fine.n_features == self.m_type.n_features == d):
            raise ValueError(
                "sub-models disagree on feature count: "
                f"crime={self.m_crime.n_features} fine={self.m_fine.n_features} "
                f"type={self.m_type.n_features} schema={d}"
            )
        if self.m_type.taxonomy.labels != self.taxonomy.labels:
            raise ValueError("m_type taxonomy does not match the model taxonomy")

    @property
    def n_features(self) -> int:
        return len(self.feature_schema)

    @property
    def fingerprint(self) -> str:
        return self.metadata.data_fingerprint


@dataclass(frozen=True)
class SeverityBin:
    """Probability mass assigned to fines in [lo_usd, hi_usd); the last
    bin is open (hi_usd == inf)."""

    lo_usd: float
    hi_usd: float
    mass: float


@dataclass(frozen=True)
class CellPrediction:
    geohash: Geohash
    p_crime: float
    # Point estimate of the fine given that a crime occurs (10**predicted log-fine).
    expected_fine_usd: float
    # Derived convenience: p_crime * expected_fine_usd, the expectation
    # before conditioning on crime occurrence.
    unconditional_fine_usd: float
    type_probs: tuple[tuple[str, float], ...]
    severity_histogram: tuple[SeverityBin, ...]
    top_risks: tuple[tuple[str, float], ...]

    def to_dict(self) -> dict:
        """JSON-ready payload; the open bracket's hi_usd becomes None."""
        return {
            "geohash": self.geohash.code,
            "p_crime": self.p_crime,
            "expected_fine_usd": self.expected_fine_usd,
            "unconditional_fine_usd": self.unconditional_fine_usd,
            "type_probs": {lab: p for lab, p in self.type_probs},
            "severity_histogram": [
                {
                    "lo_usd": b.lo_usd,
                    "hi_usd": None if math.isinf(b.hi_usd) else b.hi_usd,
                    "mass": b.mass,
                }
                for b in self.severity_histogram
            ],
            "top_risks": [[lab, p] for lab, p in self.top_risks],
        }


def data_fingerprint(grid: CellGrid, features: FeatureMatrix, labels: CellLabels) -> str:
    """SHA-256 over the training inputs, so a model file can say exactly
    which data built it."""
    h = hashlib.sha256()
    h.update(f"precision={grid.precision}\n".encode())
    h.update(",".join(g.code for g in grid.cells).encode())
    h.update(b"\n")
    h.update(",".join(features.column_names).encode())
    h.update(b"\n")
    h.update(np.ascontiguousarray(features.rows, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(labels.crime_present).astype(np.int8).tobytes())
    h.update(np.ascontiguousarray(labels.log_fine, dtype=np.float64).tobytes())
    for s in labels.type_labels:
        h.update(("|".join(sorted(s)) + ";").encode())
    return h.hexdigest()


def downsample_indices(
    crime_present: np.ndarray, neg_ratio: float | None, seed: int
) -> np.ndarray:
    """Row indices for m_crime training: every positive plus at most
    ``neg_ratio`` seeded-random negatives per positive, in original row
    order. ``None`` disables the cap."""
    y = np.asarray(crime_present).astype(bool)
    pos = np.flatnonzero(y)
    neg = np.flatnonzero(~y)
    if neg_ratio is not None:
        cap = int(neg_ratio * pos.size)
        if neg.size > cap:
            pick = rng_for(seed, _DOWNSAMPLE_KEY).permutation(neg.size)[:cap]
            neg = neg[pick]
    return np.sort(np.concatenate([pos, neg]))


def _cv(spec: LearnerSpec, X: np.ndarray, y: np.ndarray, k: int, seed: int):
    try:
        return cross_validate(spec, X, y, k=k, seed=seed)
    except ValueError as exc:
        raise TrainingError(f"cross-validation of {spec.name} failed: {exc}") from exc


def train_all(
    grid: CellGrid,
    features: FeatureMatrix,
    labels: CellLabels,
    config: TrainConfig = TrainConfig(),
    backend: str | None = None,
) -> WccewsModel:
    """Fit m_crime, m_fine, and m_type on one grid's features and labels.

    Each sub-model is cross-validated (k = config.cv_folds) and the scores
    are embedded in the metadata; the final fits use the full (for m_crime,
    downsampled) data. Identical inputs, config, and trained_at produce an
    identical model regardless of n_jobs.

    Seed derivation is part of the contract, so every embedded result can
    be recomputed externally: the final m_crime/m_type fits use
    child_seed(seed, 1) / child_seed(seed, 2), the three cross-validations
    use child_seed(seed, 3|4|5) for crime|fine|type, and negative
    downsampling draws from rng_for(seed, 0xD5).
    """
    n = len(grid)
    if not (features.rows.shape[0] == n == len(labels.crime_present) == len(labels.type_labels)):
        raise ValueError("grid, features, and labels are not aligned")
    X = np.ascontiguousarray(features.rows, dtype=np.float64)
    y = np.ascontiguousarray(labels.crime_present).astype(np.int64)
    pos_idx = np.flatnonzero(y == 1)
    if pos_idx.size == 0:
        raise TrainingError("no positive cells: every cell is crime-free, nothing to fit m_fine/m_type on")

    keep = downsample_indices(y, config.neg_ratio, config.seed)
    n_neg_total = int(n - pos_idx.size)
    downsample_record = {
        "neg_ratio": config.neg_ratio,
        "n_neg_total": n_neg_total,
        "n_neg_kept": int(keep.size - pos_idx.size),
    }

    crime_spec = LearnerSpec(
        name="m_crime",
        metric="accuracy",
        fit=lambda Xt, yt, s: fit_forest(
            Xt, yt, replace(config.crime_params, seed=s), n_jobs=config.n_jobs, backend=backend
        ),
        predict=lambda m, Xt: m.prob_of(Xt, 1, backend=backend),
        score=accuracy_at_half,
    )
    crime_entry = _cv(crime_spec, X[keep], y[keep], config.cv_folds, child_seed(config.seed, 3))
    m_crime = fit_forest(
        X[keep],
        y[keep],
        replace(config.crime_params, seed=child_seed(config.seed, 1)),
        n_jobs=config.n_jobs,
        backend=backend,
    )

    Xp = X[pos_idx]
    y_fine = np.ascontiguousarray(labels.log_fine, dtype=np.float64)[pos_idx]
    if not np.isfinite(y_fine).all():
        raise TrainingError("log_fine is not finite on some positive cell")
    fine_spec = LearnerSpec(
        name="m_fine",
        metric="r_squared",
        fit=lambda Xt, yt, s: fit_linreg(Xt, yt, degree=config.fine_degree),
        predict=lambda m, Xt: m.predict(Xt),
        score=r_squared,
    )
    fine_entry = _cv(fine_spec, Xp, y_fine, config.cv_folds, child_seed(config.seed, 4))
    m_fine = fit_linreg(Xp, y_fine, degree=config.fine_degree)
    fine_sigma = float(np.std(y_fine - m_fine.predict(Xp)))

    M = membership_matrix([labels.type_labels[i] for i in pos_idx], config.taxonomy)
    type_spec = LearnerSpec(
        name="m_type",
        metric="subset_accuracy",
        fit=lambda Xt, Yt, s: fit_ovr(
            Xt, Yt, config.taxonomy, replace(config.type_params, seed=s), n_jobs=config.n_jobs, backend=backend
        ),
        predict=lambda m, Xt: predict_ovr(m, Xt, backend=backend),
        score=subset_accuracy,
    )
    type_entry = _cv(type_spec, Xp, M, config.cv_folds, child_seed(config.seed, 5))
    m_type = fit_ovr(
        Xp,
        M,
        config.taxonomy,
        replace(config.type_params, seed=child_seed(config.seed, 2)),
        n_jobs=config.n_jobs,
        backend=backend,
    )

    metadata = ModelMetadata(
        trained_at=_resolve_trained_at(config.trained_at),
        seed=config.seed,
        params=config.knob_dict(),
        data_fingerprint=data_fingerprint(grid, features, labels),
        eval_report=EvalReport(k=config.cv_folds, entries=[crime_entry, fine_entry, type_entry]),
        fine_sigma=fine_sigma,
        severity_edges_usd=config.severity_edges_usd,
        top_k=config.top_k,
        train_precision=grid.precision,
        n_cells=n,
        n_positive=int(pos_idx.size),
        downsample=downsample_record,
    )
    return WccewsModel(
        m_crime=m_crime,
        m_fine=m_fine,
        m_type=m_type,
        feature_schema=features.column_names,
        taxonomy=config.taxonomy,
        metadata=metadata,
    )


def _resolve_trained_at(explicit: str | None) -> str:
    if explicit is not None:
        return explicit
    sde = os.environ.get("SOURCE_DATE_EPOCH")
    ts = datetime.fromtimestamp(int(sde), tz=timezone.utc) if sde else datetime.now(timezone.utc)
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def _phi(z: float) -> float:
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def severity_histogram(
    mu_log10: float, sigma_log10: float, edges_usd: Sequence[float]
) -> tuple[SeverityBin, ...]:
    """Mass of a log-normal fine (log10 mean mu, std sigma) in each USD
    bracket [lo, hi). sigma == 0 degenerates to a point mass in the
    bracket containing 10**mu. Masses always sum to 1: the first bracket
    starts at 0 and the last is open above."""
    edges = [float(e) for e in edges_usd]
    los = [0.0] + edges
    his = edges + [math.inf]
    if sigma_log10 < 0:
        raise ValueError(f"sigma must be >= 0: {sigma_log10}")
    if sigma_log10 == 0.0:
        hit = sum(1 for e in edges if mu_log10 >= math.log10(e))
        masses = [0.0] * len(los)
        masses[hit] = 1.0
    else:
        cdf = [_phi((math.log10(e) - mu_log10) / sigma_log10) for e in edges]
        masses = [cdf[0]]
        masses += [b - a for a, b in zip(cdf, cdf[1:])]
        masses.append(1.0 - cdf[-1])
    return tuple(SeverityBin(lo, hi, m) for lo, hi, m in zip(los, his, masses))


def top_risks(
    probs: Sequence[float], taxonomy: Taxonomy, k: int
) -> tuple[tuple[str, float], ...]:
    """Top-k (label, probability), descending; equal probabilities keep
    taxonomy order."""
    order = sorted(range(len(taxonomy)), key=lambda j: (-float(probs[j]), j))
    return tuple((taxonomy.labels[j], float(probs[j])) for j in order[: min(k, len(order))])


def predict_cell(
    model: WccewsModel,
    features_row: np.ndarray,
    geohash: Geohash | str,
    backend: str | None = None,
) -> CellPrediction:
    """All per-cell outputs for one feature row (ordered per
    model.feature_schema)."""
    gh = geohash if isinstance(geohash, Geohash) else Geohash(geohash)
    row = np.ascontiguousarray(features_row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != model.n_features:
        got = "x".join(str(s) for s in row.shape)
        raise SchemaError(f"feature row must have shape ({model.n_features},) to match the schema, got ({got})")
    p_crime = float(model.m_crime.prob_of(row[None, :], 1, backend=backend)[0])
    mu = float(model.m_fine.predict(row))
    expected_fine = 10.0**mu
    probs = predict_ovr(model.m_type, row, backend=backend)
    return CellPrediction(
        geohash=gh,
        p_crime=p_crime,
        expected_fine_usd=expected_fine,
        unconditional_fine_usd=p_crime * expected_fine,
        type_probs=tuple(zip(model.taxonomy.labels, (float(p) for p in probs))),
        severity_histogram=severity_histogram(mu, model.metadata.fine_sigma, model.metadata.severity_edges_usd),
        top_risks=top_risks(probs, model.taxonomy, model.metadata.top_k),
    )
