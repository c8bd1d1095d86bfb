"""Command-line driver for the whole pipeline.

    riskgrid synth    --config F --out DIR [--seed N] [--set k=v]
    riskgrid train    --data DIR --out model.wccews [--config F] [--seed N] [--jobs N]
    riskgrid evaluate --model M
    riskgrid predict  --model M --geohash G --data DIR [--config F]
    riskgrid surface  --model M --data DIR --bbox minLon,minLat,maxLon,maxLat
                      [--precision P] [--out surface.geojson] [--config F]
    riskgrid serve    --model M --data DIR [--config F] [--port N]

Machine-readable one-line JSON goes to stdout on success and to stderr on
failure; exit status is 0/1, or 2 for bad flags. All randomness flows from
--seed (or the config's seed).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from riskgrid import errors
from riskgrid.data.geocode import ENV_BASE_URL, CachingGeocoder, HttpGeocoder
from riskgrid.data.loaders import load_incidents, load_poi
from riskgrid.data.synth import synth_generate, write_synth_csvs
from riskgrid.data.types import Incident, PoiSet, Taxonomy
from riskgrid.features import CellGrid, FeatureParams, build_grid, featurize, label_cells
from riskgrid.geogrid import BBox, Geohash, decode_bbox
from riskgrid.riskmodel import TrainConfig, WccewsModel, load, predict_cell, save, train_all
from riskgrid.service.app import create_app, order_poi_sets
from riskgrid.service.config import AppConfig, demo_config_path, load_config
from riskgrid.service.surface import render_surface, surface_to_geojson

_ERROR_CODES = {
    errors.GeohashParseError: "invalid_geohash",
    errors.CellBudgetError: "cell_budget_exceeded",
    errors.UnsupportedVersionError: "unsupported_version",
    errors.IntegrityError: "integrity_error",
    errors.ModelFormatError: "model_format_error",
    errors.TrainingError: "training_error",
    errors.LoadError: "load_error",
    errors.SchemaError: "schema_error",
    errors.GeocodeError: "geocode_error",
}


def _error_code(exc: Exception) -> str:
    for klass, code in _ERROR_CODES.items():
        if isinstance(exc, klass):
            return code
    return "error"


def _emit(doc: dict, stream=None) -> None:
    print(json.dumps(doc), file=stream or sys.stdout)


def _load_app_config(args) -> AppConfig:
    path = getattr(args, "config", None) or demo_config_path()
    return load_config(path, getattr(args, "set", None))


def _load_poi_dir(data_dir: str | Path) -> list[PoiSet]:
    data = Path(data_dir)
    paths = sorted(data.glob("poi_*.csv"))
    if not paths:
        raise errors.LoadError(f"no poi_*.csv files in {data}")
    sets = []
    for p in paths:
        category = p.stem[len("poi_") :]
        sets.append(load_poi(p, category).poi_set)
    return sets


def _load_incidents_dir(data_dir: str | Path, taxonomy: Taxonomy) -> list[Incident]:
    data = Path(data_dir)
    path = data / "incidents.csv"
    if not path.exists():
        raise errors.LoadError(f"{path} does not exist")
    result = load_incidents(path, taxonomy)
    incidents = list(result.incidents)
    if result.needs_geocoding:
        incidents += _geocode_pending(result.needs_geocoding, data)
    return incidents


def _geocode_pending(pending: list[Incident], data_dir: Path) -> list[Incident]:
    import dataclasses

    if not os.environ.get(ENV_BASE_URL):
        raise errors.GeocodeError(
            f"{len(pending)} incident rows have only an address; set {ENV_BASE_URL} to resolve them"
        )
    out = []
    with CachingGeocoder(HttpGeocoder(), data_dir / "geocode_cache.sqlite") as geocoder:
        for inc in pending:
            out.append(dataclasses.replace(inc, point=geocoder.geocode(inc.address)))
    return out


def _parse_bbox(text: str) -> BBox:
    parts = text.split(",")
    if len(parts) != 4:
        raise errors.SchemaError(f"bbox must be minLon,minLat,maxLon,maxLat: {text!r}")
    try:
        min_lon, min_lat, max_lon, max_lat = (float(p) for p in parts)
    except ValueError:
        raise errors.SchemaError(f"bbox values must be numbers: {text!r}") from None
    return BBox(min_lat=min_lat, max_lat=max_lat, min_lon=min_lon, max_lon=max_lon)


def _featurize_one(model: WccewsModel, poi_sets: list[PoiSet], gh: Geohash, params: FeatureParams):
    grid = CellGrid(precision=gh.precision, cells=(gh,), bbox=decode_bbox(gh))
    return featurize(grid, order_poi_sets(poi_sets, model.feature_schema), params).rows[0]


# ------------------------------------------------------------------ commands


def _cmd_synth(args) -> int:
    cfg = _load_app_config(args)
    result = synth_generate(cfg.synth_config(seed=args.seed))
    paths = write_synth_csvs(result, args.out)
    _emit(
        {
            "out": str(Path(args.out)),
            "cells": len(result.ground_truth.grid),
            "incidents": len(result.incidents),
            "positive_cells": int(result.ground_truth.crime_present.sum()),
            "bayes_accuracy": result.ground_truth.bayes_accuracy,
            "files": {k: str(v) for k, v in sorted(paths.items())},
        }
    )
    return 0


def _cmd_train(args) -> int:
    cfg = _load_app_config(args)
    incidents = _load_incidents_dir(args.data, cfg.taxonomy)
    poi_sets = _load_poi_dir(args.data)
    grid = build_grid(cfg.bbox, cfg.precision)
    fm = featurize(grid, poi_sets, cfg.features)
    labels = label_cells(grid, incidents, cfg.taxonomy)
    tc = cfg.train_config(seed=args.seed, n_jobs=args.jobs)
    model = train_all(grid, fm, labels, tc)
    save(model, args.out)
    _emit(
        {
            "model": str(args.out),
            "fingerprint": model.fingerprint,
            "cells": len(grid),
            "positive_cells": model.metadata.n_positive,
            "outside_incident_cells": labels.n_outside,
            "eval": {
                e.model: {"metric": e.metric, "mean": e.mean, "std": e.std}
                for e in model.metadata.eval_report.entries
            },
        }
    )
    return 0


def _cmd_evaluate(args) -> int:
    model = load(args.model)
    print(model.metadata.eval_report.to_text())
    return 0


def _cmd_predict(args) -> int:
    model = load(args.model)
    cfg = _load_app_config(args)
    poi_sets = _load_poi_dir(args.data)
    gh = Geohash(args.geohash)
    row = _featurize_one(model, poi_sets, gh, cfg.features)
    _emit(predict_cell(model, row, gh).to_dict())
    return 0


def _cmd_surface(args) -> int:
    model = load(args.model)
    cfg = _load_app_config(args)
    poi_sets = order_poi_sets(_load_poi_dir(args.data), model.feature_schema)
    bbox = _parse_bbox(args.bbox)
    precision = args.precision if args.precision is not None else model.metadata.train_precision
    surf = render_surface(
        model, poi_sets, bbox, precision, cfg.features, cell_cap=cfg.service.max_cells
    )
    doc = surface_to_geojson(surf)
    if args.out:
        Path(args.out).write_text(json.dumps(doc))
        _emit({"out": str(args.out), "cells": len(surf.cells), "precision": precision})
    else:
        _emit(doc)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    model = load(args.model)
    cfg = _load_app_config(args)
    poi_sets = _load_poi_dir(args.data)
    app = create_app(
        model,
        poi_sets,
        region=cfg.bbox,
        feature_params=cfg.features,
        max_cells=cfg.service.max_cells,
    )
    port = args.port if args.port is not None else cfg.service.port
    uvicorn.run(app, host=args.host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskgrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="YAML config path (bundled demo config when omitted)")
            p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                           help="override any config value, e.g. --set train.cv_folds=5")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p)
    p.add_argument("--out", required=True, help="output directory for the CSVs")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="fit the three sub-models and write a model file")
    common(p)
    p.add_argument("--data", required=True, help="directory with incidents.csv and poi_*.csv")
    p.add_argument("--out", required=True, help="model file path (.wccews)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--jobs", type=int, default=1, help="training threads (does not change the result)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="print the cross-validation report of a model")
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="predict a single cell")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--geohash", required=True)
    p.add_argument("--data", required=True, help="directory with poi_*.csv")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("surface", help="render a GeoJSON risk surface")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="directory with poi_*.csv")
    p.add_argument("--bbox", required=True, help="minLon,minLat,maxLon,maxLat (GeoJSON order)")
    p.add_argument("--precision", type=int, default=None, help="geohash precision (model's training precision when omitted)")
    p.add_argument("--out", default=None, help="write GeoJSON here instead of stdout")
    p.set_defaults(func=_cmd_surface)

    p = sub.add_parser("serve", help="serve predictions over HTTP")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True, help="directory with poi_*.csv")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.RiskgridError as exc:
        _emit({"error": {"code": _error_code(exc), "message": str(exc)}}, stream=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        _emit({"error": {"code": "invalid_argument", "message": str(exc)}}, stream=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
