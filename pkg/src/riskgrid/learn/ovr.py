"""One-vs-rest multi-label classification: one binary forest per label."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from riskgrid.data.types import Taxonomy
from riskgrid.errors import SchemaError, TrainingError
from riskgrid.learn.forest import RandomForest, fit_forest
from riskgrid.learn.tree import ForestParams
from riskgrid.seeding import child_seed


@dataclass
class OvRModel:
    taxonomy: Taxonomy
    # One forest per label, in taxonomy order. None marks a label that was
    # absent from every training row; its probability is the stored prior.
    per_label: list[RandomForest | None]
    priors: np.ndarray
    n_features: int

    @property
    def degenerate_labels(self) -> list[str]:
        return [lab for lab, f in zip(self.taxonomy.labels, self.per_label) if f is None]


def membership_matrix(type_labels, taxonomy: Taxonomy) -> np.ndarray:
    """(n, L) 0/1 matrix from per-row label collections; unknown labels are
    a schema error."""
    index = {lab: j for j, lab in enumerate(taxonomy.labels)}
    Y = np.zeros((len(type_labels), len(taxonomy)), dtype=np.int64)
    for i, row in enumerate(type_labels):
        for lab in row:
            j = index.get(lab)
            if j is None:
                raise SchemaError(f"label not in taxonomy: {lab!r}")
            Y[i, j] = 1
    return Y


def fit_ovr(
    X: np.ndarray,
    type_labels,
    taxonomy: Taxonomy,
    params: ForestParams,
    n_jobs: int = 1,
    backend: str | None = None,
) -> OvRModel:
    """type_labels is either an (n, L) 0/1 matrix aligned with the taxonomy
    or a sequence of per-row label collections. Each label's forest gets a
    seed derived from (params.seed, label index), so training one label or
    all of them yields identical forests.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.asarray(type_labels)
    if Y.dtype == object or Y.ndim != 2:
        Y = membership_matrix(type_labels, taxonomy)
    if Y.shape != (X.shape[0], len(taxonomy)):
        raise SchemaError(
            f"label matrix shape {Y.shape} does not match {X.shape[0]} rows x {len(taxonomy)} labels"
        )
    if X.shape[0] == 0:
        raise TrainingError("cannot fit on an empty dataset")

    per_label: list[RandomForest | None] = []
    priors = np.zeros(len(taxonomy), dtype=np.float64)
    for j in range(len(taxonomy)):
        y = np.asarray(Y[:, j] != 0, dtype=np.int64)
        if not y.any():
            # Never-seen label: no signal to fit; predict the empirical prior.
            per_label.append(None)
            priors[j] = 0.0
            continue
        p = replace(params, seed=child_seed(params.seed, j))
        per_label.append(fit_forest(X, y, p, n_jobs=n_jobs, backend=backend))
        priors[j] = float(y.mean())
    return OvRModel(taxonomy=taxonomy, per_label=per_label, priors=priors, n_features=X.shape[1])


def predict_ovr(model: OvRModel, x: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Per-label positive-class probabilities; independent components, no
    sum constraint. Accepts a single vector (returns (L,)) or a matrix
    (returns (n, L))."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != model.n_features:
        raise SchemaError(f"feature vector has {X.shape[1]} columns, model expects {model.n_features}")
    out = np.empty((X.shape[0], len(model.taxonomy)), dtype=np.float64)
    for j, forest in enumerate(model.per_label):
        if forest is None:
            out[:, j] = model.priors[j]
        else:
            out[:, j] = forest.prob_of(X, 1, backend=backend)
    return out[0] if single else out
