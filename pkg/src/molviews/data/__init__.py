"""Dataset loading, scaffold splitting and evaluation."""

from molviews.data.dataset import (
    AllRowsRejected,
    DatasetSpec,
    FileUnreadable,
    LoadedDataset,
    MissingColumn,
    Record,
    Reject,
    load_dataset,
    write_rejects,
)
from molviews.data.evaluate import aggregate_seeds, dumps_report, evaluate, evaluate_predictions, rmse_metric
from molviews.data.split import DatasetSplit, TooFewScaffolds, leaked_keys, scaffold_key, scaffold_split
from molviews.data.synthetic import synthetic_smiles
from molviews.metrics import SingleClass, roc_auc

__all__ = [
    "DatasetSpec", "Record", "Reject", "LoadedDataset", "load_dataset", "write_rejects",
    "DatasetSplit", "scaffold_split", "scaffold_key", "leaked_keys",
    "roc_auc", "rmse_metric", "evaluate", "evaluate_predictions", "aggregate_seeds", "dumps_report",
    "synthetic_smiles",
    "MissingColumn", "FileUnreadable", "AllRowsRejected", "TooFewScaffolds", "SingleClass",
]
