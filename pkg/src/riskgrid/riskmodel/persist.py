"""Single-file model serialization.

Layout (all integers little-endian):

    magic      6 bytes   b"WCCEWS"
    version    u32       format version, currently 1
    n_sections u32
    section*   repeated n_sections times:
        name_len    u16
        name        utf-8 bytes
        payload_len u64
        payload     bytes

One section, ``meta``, holds a canonical JSON document (sorted keys, no
whitespace) with every scalar field; each numpy array gets its own section
framed as

    dtype_len  u16
    dtype      ascii numpy dtype string, e.g. "<f8"
    ndim       u8
    shape      u64 per dimension
    data       raw C-order bytes

Forests are stored per tree-array, concatenated over trees with a
``node_counts`` section giving each tree's length. Section payloads are
length-prefixed precisely so that a truncated file is detected as such
(IntegrityError) instead of misparsed; an unknown version raises
UnsupportedVersionError before anything else is read.

Writing is deterministic: the same model always produces the same bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from riskgrid.data.types import Taxonomy
from riskgrid.errors import IntegrityError, ModelFormatError, UnsupportedVersionError
from riskgrid.learn import DecisionTree, EvalReport, ForestParams, LinearModel, OvRModel, RandomForest
from riskgrid.riskmodel.model import ModelMetadata, WccewsModel

MAGIC = b"WCCEWS"
FORMAT_VERSION = 1


def _pack_array(a: np.ndarray) -> bytes:
    a = np.ascontiguousarray(a)
    dt = a.dtype.str.encode("ascii")
    out = [struct.pack("<H", len(dt)), dt, struct.pack("<B", a.ndim)]
    out += [struct.pack("<Q", s) for s in a.shape]
    out.append(a.tobytes())
    return b"".join(out)


def _unpack_array(payload: bytes, name: str) -> np.ndarray:
    view = memoryview(payload)

    def take(n: int) -> memoryview:
        nonlocal view
        if len(view) < n:
            raise IntegrityError(f"array section {name!r} is truncated")
        head, view = view[:n], view[n:]
        return head

    (dt_len,) = struct.unpack("<H", take(2))
    dtype = np.dtype(bytes(take(dt_len)).decode("ascii"))
    (ndim,) = struct.unpack("<B", take(1))
    shape = tuple(struct.unpack("<Q", take(8))[0] for _ in range(ndim))
    expect = dtype.itemsize * int(np.prod(shape, dtype=np.int64)) if shape else dtype.itemsize
    if len(view) != expect:
        raise IntegrityError(
            f"array section {name!r}: {len(view)} data bytes, shape/dtype require {expect}"
        )
    # copy() -> owned, writable, contiguous: the compiled kernels reject
    # read-only buffers.
    return np.frombuffer(view, dtype=dtype).reshape(shape).copy()


def _forest_arrays(prefix: str, f: RandomForest) -> list[tuple[str, np.ndarray]]:
    counts = np.asarray([t.n_nodes for t in f.trees], dtype=np.int64)
    return [
        (f"{prefix}node_counts", counts),
        (f"{prefix}feature", np.concatenate([t.feature for t in f.trees])),
        (f"{prefix}threshold", np.concatenate([t.threshold for t in f.trees])),
        (f"{prefix}left", np.concatenate([t.left for t in f.trees])),
        (f"{prefix}right", np.concatenate([t.right for t in f.trees])),
        (f"{prefix}dist", np.concatenate([t.dist for t in f.trees], axis=0)),
        (f"{prefix}classes", f.classes),
    ]


def _forest_meta(f: RandomForest) -> dict:
    p = f.params
    return {
        "params": {
            "n_trees": p.n_trees,
            "max_depth": p.max_depth,
            "min_leaf": p.min_leaf,
            "m_try": p.m_try,
            "seed": p.seed,
        },
        "n_features": f.n_features,
    }


def _restore_forest(meta: dict, arrays: dict[str, np.ndarray], prefix: str) -> RandomForest:
    params = ForestParams(**meta["params"])
    counts = arrays[f"{prefix}node_counts"]
    classes = arrays[f"{prefix}classes"]
    trees: list[DecisionTree] = []
    offsets = np.concatenate([[0], np.cumsum(counts)])
    total = int(offsets[-1])
    for key in ("feature", "threshold", "left", "right", "dist"):
        if arrays[f"{prefix}{key}"].shape[0] != total:
            raise ModelFormatError(f"forest section {prefix}{key} does not match node_counts")
    for i in range(len(counts)):
        lo, hi = int(offsets[i]), int(offsets[i + 1])
        trees.append(
            DecisionTree(
                feature=arrays[f"{prefix}feature"][lo:hi],
                threshold=arrays[f"{prefix}threshold"][lo:hi],
                left=arrays[f"{prefix}left"][lo:hi],
                right=arrays[f"{prefix}right"][lo:hi],
                dist=arrays[f"{prefix}dist"][lo:hi],
                classes=classes,
            )
        )
    return RandomForest(trees=trees, params=params, classes=classes, n_features=int(meta["n_features"]))


def save(model: WccewsModel, path: str | Path) -> None:
    md = model.metadata
    meta = {
        "feature_schema": list(model.feature_schema),
        "taxonomy": list(model.taxonomy.labels),
        "metadata": {
            "trained_at": md.trained_at,
            "seed": md.seed,
            "params": md.params,
            "data_fingerprint": md.data_fingerprint,
            "eval_report": md.eval_report.to_dict(),
            "fine_sigma": md.fine_sigma,
            "severity_edges_usd": list(md.severity_edges_usd),
            "top_k": md.top_k,
            "train_precision": md.train_precision,
            "n_cells": md.n_cells,
            "n_positive": md.n_positive,
            "downsample": md.downsample,
        },
        "m_crime": _forest_meta(model.m_crime),
        "m_fine": {
            "degree": model.m_fine.degree,
            "n_features": model.m_fine.n_features,
            "intercept": model.m_fine.intercept,
        },
        "m_type": {
            "present": [f is not None for f in model.m_type.per_label],
            "forests": [None if f is None else _forest_meta(f) for f in model.m_type.per_label],
            "n_features": model.m_type.n_features,
        },
    }

    sections: list[tuple[str, bytes]] = [
        ("meta", json.dumps(meta, sort_keys=True, separators=(",", ":")).encode())
    ]
    for name, arr in _forest_arrays("crime/", model.m_crime):
        sections.append((name, _pack_array(arr)))
    for name, arr in (
        ("fine/coefficients", model.m_fine.coefficients),
        ("fine/col_mean", model.m_fine.col_mean),
        ("fine/col_scale", model.m_fine.col_scale),
        ("type/priors", model.m_type.priors),
    ):
        sections.append((name, _pack_array(arr)))
    for j, f in enumerate(model.m_type.per_label):
        if f is not None:
            for name, arr in _forest_arrays(f"type/{j}/", f):
                sections.append((name, _pack_array(arr)))

    blob = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<I", len(sections))]
    for name, payload in sections:
        nb = name.encode()
        blob += [struct.pack("<H", len(nb)), nb, struct.pack("<Q", len(payload)), payload]
    Path(path).write_bytes(b"".join(blob))


def _read_sections(data: bytes) -> dict[str, bytes]:
    if len(data) < len(MAGIC):
        raise IntegrityError("file is shorter than the magic string")
    if data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a WCCEWS model file (bad magic)")
    off = len(MAGIC)

    def need(n: int, what: str):
        if off + n > len(data):
            raise IntegrityError(f"truncated file: {what} extends past the end")

    need(4, "version")
    (version,) = struct.unpack_from("<I", data, off)
    off += 4
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model format version {version}; this build reads version {FORMAT_VERSION}"
        )
    need(4, "section count")
    (n_sections,) = struct.unpack_from("<I", data, off)
    off += 4
    sections: dict[str, bytes] = {}
    for _ in range(n_sections):
        need(2, "section name length")
        (name_len,) = struct.unpack_from("<H", data, off)
        off += 2
        need(name_len, "section name")
        name = data[off : off + name_len].decode()
        off += name_len
        need(8, f"length of section {name!r}")
        (payload_len,) = struct.unpack_from("<Q", data, off)
        off += 8
        need(payload_len, f"payload of section {name!r}")
        if name in sections:
            raise ModelFormatError(f"duplicate section {name!r}")
        sections[name] = data[off : off + payload_len]
        off += payload_len
    if off != len(data):
        raise IntegrityError(f"{len(data) - off} trailing bytes after the last section")
    return sections


def load(path: str | Path) -> WccewsModel:
    sections = _read_sections(Path(path).read_bytes())
    try:
        meta = json.loads(sections["meta"].decode())
    except KeyError:
        raise ModelFormatError("missing meta section") from None
    except ValueError as exc:
        raise ModelFormatError(f"meta section is not valid JSON: {exc}") from None

    arrays = {name: _unpack_array(payload, name) for name, payload in sections.items() if name != "meta"}
    try:
        taxonomy = Taxonomy(tuple(meta["taxonomy"]))
        m_crime = _restore_forest(meta["m_crime"], arrays, "crime/")
        fm = meta["m_fine"]
        m_fine = LinearModel(
            degree=int(fm["degree"]),
            n_features=int(fm["n_features"]),
            coefficients=arrays["fine/coefficients"],
            intercept=float(fm["intercept"]),
            col_mean=arrays["fine/col_mean"],
            col_scale=arrays["fine/col_scale"],
        )
        tm = meta["m_type"]
        per_label: list[RandomForest | None] = []
        for j, present in enumerate(tm["present"]):
            per_label.append(_restore_forest(tm["forests"][j], arrays, f"type/{j}/") if present else None)
        m_type = OvRModel(
            taxonomy=taxonomy,
            per_label=per_label,
            priors=arrays["type/priors"],
            n_features=int(tm["n_features"]),
        )
        md = meta["metadata"]
        metadata = ModelMetadata(
            trained_at=md["trained_at"],
            seed=int(md["seed"]),
            params=md["params"],
            data_fingerprint=md["data_fingerprint"],
            eval_report=EvalReport.from_dict(md["eval_report"]),
            fine_sigma=float(md["fine_sigma"]),
            severity_edges_usd=tuple(float(e) for e in md["severity_edges_usd"]),
            top_k=int(md["top_k"]),
            train_precision=int(md["train_precision"]),
            n_cells=int(md["n_cells"]),
            n_positive=int(md["n_positive"]),
            downsample=md["downsample"],
        )
        return WccewsModel(
            m_crime=m_crime,
            m_fine=m_fine,
            m_type=m_type,
            feature_schema=tuple(meta["feature_schema"]),
            taxonomy=taxonomy,
            metadata=metadata,
        )
    except (KeyError, IndexError) as exc:
        raise ModelFormatError(f"model file is missing field {exc}") from exc
