"""Shared fixtures: a small synthetic training set, a model fitted on it, and
a miniature end-to-end pipeline (CSVs on disk + trained model) for the
service and CLI tests."""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest
import yaml

from riskgrid.data.types import Taxonomy
from riskgrid.features import CellGrid, CellLabels, FeatureMatrix
from riskgrid.geogrid import BBox, cover
from riskgrid.learn import ForestParams
from riskgrid.riskmodel import TrainConfig, train_all


def _logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


def make_training(seed: int = 0):
    """A 48-cell grid with planted, learnable structure: crime driven by
    f0/f1, fines linear in f0, types decided by feature signs."""
    from riskgrid.seeding import rng_for

    taxonomy = Taxonomy(("fraud", "bribery", "forgery"))
    bbox = BBox(min_lat=40.70, max_lat=40.74, min_lon=-74.02, max_lon=-73.97)
    cells = cover(bbox, 6)
    grid = CellGrid(precision=6, cells=tuple(cells), bbox=bbox)
    n = len(grid)
    rng = rng_for(seed, 0x7E57)
    X = rng.normal(size=(n, 5))
    present = (rng.random(n) < _logistic(2.0 * X[:, 0] - X[:, 1])).astype(np.int64)
    if present.sum() < 8:  # keep every seed usable for 3-fold CV
        present[np.argsort(X[:, 0])[-8:]] = 1
    log_fine = np.where(present == 1, 4.0 + 0.3 * X[:, 0] + 0.1 * rng.normal(size=n), np.nan)
    types = []
    for i in range(n):
        if present[i] != 1:
            types.append(frozenset())
            continue
        s = {"fraud"} if X[i, 0] > 0 else {"bribery"}
        if X[i, 2] > 1.0:
            s.add("forgery")
        types.append(frozenset(s))
    fm = FeatureMatrix(column_names=("f0", "f1", "f2", "f3", "f4"), rows=X)
    labels = CellLabels(
        crime_present=present,
        log_fine=log_fine,
        type_labels=tuple(types),
        outside_ids=(),
    )
    return grid, fm, labels, taxonomy


def make_config(taxonomy: Taxonomy, **overrides) -> TrainConfig:
    base = dict(
        seed=11,
        crime_params=ForestParams(n_trees=15, max_depth=8, min_leaf=2),
        type_params=ForestParams(n_trees=8, max_depth=6, min_leaf=2),
        fine_degree=1,
        cv_folds=3,
        taxonomy=taxonomy,
        trained_at="2026-01-02T03:04:05Z",
    )
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="session")
def toy_training():
    return make_training()


@pytest.fixture(scope="session")
def toy_model(toy_training):
    grid, fm, labels, taxonomy = toy_training
    return train_all(grid, fm, labels, make_config(taxonomy))


# ---------------------------------------------------- end-to-end pipeline

# Small enough to train in well under a second, rich enough that every
# taxonomy label occurs on some cell. The CLI tests point --config at the
# same file, so library-built and CLI-built artifacts must agree bit for bit.
PIPELINE_RAW = {
    "seed": 5150,
    "region": {
        "bbox": {"min_lat": 40.70, "max_lat": 40.76, "min_lon": -74.02, "max_lon": -73.92},
        "precision": 6,
    },
    "taxonomy": ["fraud", "money_laundering", "tax_evasion", "bribery", "forgery"],
    "synth": {
        "poi_counts": {"investment_advisers": 120, "liquor_licenses": 90, "tax_exempt_orgs": 100},
        "weights": {"kde_investment_advisers": 1.0, "kde_liquor_licenses": -0.9},
        "intercept": -4.5,
        "fine_coefficients": {"count_investment_advisers": 0.3, "count_liquor_licenses": -0.2},
        "fine_intercept": 4.0,
        "fine_sigma": 0.25,
        "incident_rate": 1.2,
        "type_mixing": {
            "fraud": {"kde_investment_advisers": 1.5},
            "money_laundering": {"kde_liquor_licenses": 1.5},
            "tax_evasion": {"kde_tax_exempt_orgs": 1.5},
            "bribery": {"kde_investment_advisers": -1.5},
            "forgery": {},
        },
        "type_intercepts": {
            "fraud": -18.2,
            "money_laundering": -14.9,
            "tax_evasion": -16.4,
            "bribery": 10.5,
            "forgery": -1.5,
        },
    },
    "train": {
        "crime_forest": {"n_trees": 12, "max_depth": 8, "min_leaf": 2},
        "type_forest": {"n_trees": 8, "max_depth": 6, "min_leaf": 2},
        "fine_degree": 1,
        "cv_folds": 3,
        "trained_at": "2026-03-04T05:06:07Z",
    },
    "service": {"port": 8321, "max_cells": 50000},
}


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    """Synthesize a ~120-cell dataset, write its CSVs and config to disk,
    and train a model from the CSVs the same way `riskgrid train` does."""
    from riskgrid.data.loaders import load_incidents, load_poi
    from riskgrid.data.synth import synth_generate, write_synth_csvs
    from riskgrid.features import build_grid, featurize, label_cells
    from riskgrid.riskmodel import save
    from riskgrid.service.config import load_config

    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    config_path = root / "config.yaml"
    config_path.write_text(yaml.safe_dump(PIPELINE_RAW, sort_keys=False))
    cfg = load_config(config_path)

    result = synth_generate(cfg.synth_config())
    write_synth_csvs(result, data)

    poi_sets = [load_poi(p, p.stem[len("poi_") :]).poi_set for p in sorted(data.glob("poi_*.csv"))]
    incidents = list(load_incidents(data / "incidents.csv", cfg.taxonomy).incidents)
    grid = build_grid(cfg.bbox, cfg.precision)
    fm = featurize(grid, poi_sets, cfg.features)
    labels = label_cells(grid, incidents, cfg.taxonomy)
    model = train_all(grid, fm, labels, cfg.train_config())
    model_path = root / "model.wccews"
    save(model, model_path)

    return SimpleNamespace(
        root=root,
        data=data,
        config_path=config_path,
        cfg=cfg,
        result=result,
        grid=grid,
        fm=fm,
        labels=labels,
        poi_sets=poi_sets,
        model=model,
        model_path=model_path,
    )
