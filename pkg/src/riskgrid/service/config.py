"""YAML configuration shared by the CLI and the HTTP service.

Top-level keys (all optional unless noted):

    seed: int                       master seed for synth + train
    region:                         required
      bbox: {min_lat, max_lat, min_lon, max_lon}
      precision: int                geohash precision of the training grid
    taxonomy: [label, ...]          defaults to the built-in taxonomy
    features: {kde_sigma_m, dist_cap_m}
    synth:                          generator knobs (see SynthConfig)
      poi_counts: {category: n}
      weights: {column: w}          crime-presence logistic weights
      intercept: float
      fine_coefficients: {column: w}
      fine_intercept: float
      fine_sigma: float
      incident_rate: float
      type_mixing: {label: {column: w}}
      type_intercepts: {label: b}
    train:                          fitting knobs (see TrainConfig)
      crime_forest / type_forest: {n_trees, max_depth, min_leaf, m_try}
      fine_degree, neg_ratio, cv_folds, top_k, severity_edges_usd
    service: {port, max_cells}

Any value can be overridden on the command line with
``--set dotted.path=value`` (values parsed as YAML scalars).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from riskgrid.data.types import SynthConfig, Taxonomy
from riskgrid.errors import SchemaError
from riskgrid.features import FeatureParams
from riskgrid.geogrid import BBox
from riskgrid.learn import ForestParams
from riskgrid.riskmodel import TrainConfig


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8321
    max_cells: int = 50_000


@dataclass
class AppConfig:
    """Parsed configuration; builders produce the typed configs the
    pipeline stages consume."""

    seed: int
    bbox: BBox
    precision: int
    taxonomy: Taxonomy
    features: FeatureParams
    synth: dict
    train: dict
    service: ServiceConfig
    raw: dict

    def synth_config(self, seed: int | None = None) -> SynthConfig:
        s = self.synth
        if not s:
            raise SchemaError("config has no synth section")
        return SynthConfig(
            bbox=self.bbox,
            precision=self.precision,
            poi_counts=dict(s["poi_counts"]),
            weight_vector=dict(s.get("weights", {})),
            intercept=float(s.get("intercept", 0.0)),
            fine_coefficients=dict(s.get("fine_coefficients", {})),
            fine_intercept=float(s.get("fine_intercept", 4.0)),
            fine_sigma=float(s.get("fine_sigma", 0.25)),
            type_mixing={k: dict(v) for k, v in s.get("type_mixing", {}).items()},
            type_intercepts=dict(s.get("type_intercepts", {})),
            incident_rate=float(s.get("incident_rate", 1.0)),
            seed=self.seed if seed is None else seed,
            taxonomy=self.taxonomy,
        )

    def train_config(self, seed: int | None = None, n_jobs: int = 1) -> TrainConfig:
        t = self.train

        def forest(key: str) -> ForestParams:
            d = dict(t.get(key, {}))
            d.pop("seed", None)  # derived from the master seed
            return ForestParams(**d)

        kwargs = dict(
            seed=self.seed if seed is None else seed,
            crime_params=forest("crime_forest"),
            type_params=forest("type_forest"),
            taxonomy=self.taxonomy,
            n_jobs=n_jobs,
        )
        for key in ("fine_degree", "neg_ratio", "cv_folds", "top_k", "trained_at"):
            if key in t:
                kwargs[key] = t[key]
        if "severity_edges_usd" in t:
            kwargs["severity_edges_usd"] = tuple(float(e) for e in t["severity_edges_usd"])
        return TrainConfig(**kwargs)


def _require(d: dict, key: str, where: str):
    if key not in d:
        raise SchemaError(f"config is missing {where}.{key}" if where else f"config is missing {key}")
    return d[key]


def parse_config(raw: dict) -> AppConfig:
    if not isinstance(raw, dict):
        raise SchemaError("config root must be a mapping")
    region = _require(raw, "region", "")
    bb = _require(region, "bbox", "region")
    try:
        bbox = BBox(
            min_lat=float(bb["min_lat"]),
            max_lat=float(bb["max_lat"]),
            min_lon=float(bb["min_lon"]),
            max_lon=float(bb["max_lon"]),
        )
    except KeyError as exc:
        raise SchemaError(f"region.bbox is missing {exc}") from None
    precision = int(_require(region, "precision", "region"))
    labels = raw.get("taxonomy")
    taxonomy = Taxonomy(tuple(labels)) if labels else Taxonomy.default()
    feat = raw.get("features", {})
    features = FeatureParams(
        kde_sigma_m=float(feat.get("kde_sigma_m", 1000.0)),
        dist_cap_m=float(feat.get("dist_cap_m", 50_000.0)),
    )
    svc = raw.get("service", {})
    service = ServiceConfig(
        port=int(svc.get("port", 8321)),
        max_cells=int(svc.get("max_cells", 50_000)),
    )
    return AppConfig(
        seed=int(raw.get("seed", 0)),
        bbox=bbox,
        precision=precision,
        taxonomy=taxonomy,
        features=features,
        synth=dict(raw.get("synth", {})),
        train=dict(raw.get("train", {})),
        service=service,
        raw=raw,
    )


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply ``dotted.path=value`` strings; values are parsed as YAML so
    numbers, booleans, lists, and null come out typed."""
    out = copy.deepcopy(raw)
    for item in overrides:
        path, sep, value = item.partition("=")
        if not sep or not path:
            raise SchemaError(f"override must look like section.key=value: {item!r}")
        node = out
        keys = path.split(".")
        for key in keys[:-1]:
            nxt = node.setdefault(key, {})
            if not isinstance(nxt, dict):
                raise SchemaError(f"override path {path!r} crosses the non-mapping key {key!r}")
            node = nxt
        node[keys[-1]] = yaml.safe_load(value)
    return out


def load_config(path: str | Path, overrides: list[str] | None = None) -> AppConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if overrides:
        raw = apply_overrides(raw or {}, overrides)
    return parse_config(raw or {})


def demo_config_path() -> Path:
    """The bundled end-to-end demo configuration."""
    return Path(str(resources.files("riskgrid") / "configs" / "demo.yaml"))
