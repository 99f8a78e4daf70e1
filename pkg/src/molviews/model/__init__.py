"""Gated view fusion, MLP predictor, losses, training and contribution analysis."""

from molviews.metrics import EmptyBatch
from molviews.model.checkpoint import CheckpointError, checkpoint_bytes, load_checkpoint, save_checkpoint
from molviews.model.fusion import (
    HEADS,
    VIEW_NAMES,
    FusionModel,
    Predictions,
    ShapeMismatch,
    backward,
    forward,
    fuse,
    gate,
    gate_logits,
    init_model,
    loss_classification,
    loss_regression,
    masked_softmax,
    mlp_forward,
    predict,
    project_views,
)
from molviews.model.train import (
    ContributionReport,
    DivergedLoss,
    EmptyDataset,
    TrainConfig,
    TrainResult,
    ViewData,
    component_contributions,
    train,
    validation_metric,
)

__all__ = [
    "FusionModel", "init_model", "HEADS", "VIEW_NAMES", "Predictions",
    "project_views", "gate", "gate_logits", "masked_softmax", "fuse", "mlp_forward",
    "forward", "backward", "predict", "loss_classification", "loss_regression",
    "TrainConfig", "TrainResult", "ViewData", "train", "validation_metric",
    "ContributionReport", "component_contributions",
    "save_checkpoint", "load_checkpoint", "checkpoint_bytes",
    "ShapeMismatch", "DivergedLoss", "EmptyDataset", "EmptyBatch", "CheckpointError",
]
