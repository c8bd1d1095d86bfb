from riskgrid.riskmodel.model import (
    DEFAULT_SEVERITY_EDGES_USD,
    CellPrediction,
    ModelMetadata,
    SeverityBin,
    TrainConfig,
    WccewsModel,
    data_fingerprint,
    downsample_indices,
    predict_cell,
    severity_histogram,
    top_risks,
    train_all,
)
from riskgrid.riskmodel.persist import FORMAT_VERSION, MAGIC, load, save

__all__ = [
    "DEFAULT_SEVERITY_EDGES_USD",
    "FORMAT_VERSION",
    "MAGIC",
    "CellPrediction",
    "ModelMetadata",
    "SeverityBin",
    "TrainConfig",
    "WccewsModel",
    "data_fingerprint",
    "downsample_indices",
    "load",
    "predict_cell",
    "save",
    "severity_histogram",
    "top_risks",
    "train_all",
]
