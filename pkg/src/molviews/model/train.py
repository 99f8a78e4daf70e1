"""Adam training with early stopping on a validation metric."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from molviews.metrics import SingleClass, roc_auc, rmse
from molviews.model.fusion import FusionModel, ShapeMismatch, VIEW_NAMES, backward, forward, predict


class DivergedLoss(RuntimeError):
    def __init__(self, epoch, batch, last_finite):
        super().__init__(f"loss became NaN at epoch {epoch}, batch {batch} "
                         f"(last finite loss {last_finite})")
        self.epoch, self.batch, self.last_finite = epoch, batch, last_finite


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 20
    init_scale: float = 1.0
    hidden_dim: int = 256
    mlp_widths: tuple = (128,)
    gate_init: str = "zero"

    def __post_init__(self):
        object.__setattr__(self, "mlp_widths", tuple(int(w) for w in self.mlp_widths))
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("adam betas must lie in [0, 1)")
        for name in ("adam_eps", "batch_size", "max_epochs", "patience", "init_scale", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if any(w <= 0 for w in self.mlp_widths):
            raise ValueError("mlp widths must be positive")
        if self.patience > self.max_epochs:
            raise ValueError("patience cannot exceed max_epochs")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mlp_widths"] = list(self.mlp_widths)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown train config keys {sorted(unknown)}")
        return cls(**data)


@dataclass
class ViewData:
    """Aligned view matrices and labels (NaN marks a missing label)."""

    x_struct: np.ndarray | None
    x_task: np.ndarray | None
    x_rule: np.ndarray | None
    y: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.y.ndim == 1:
            self.y = self.y[:, None]
        for name in ("x_struct", "x_task", "x_rule"):
            x = getattr(self, name)
            if x is not None:
                x = np.asarray(x, dtype=np.float64)
                if x.ndim != 2 or len(x) != len(self.y):
                    raise ShapeMismatch(f"{name} has shape {x.shape}, expected ({len(self.y)}, k)")
                setattr(self, name, x)

    def __len__(self):
        return len(self.y)

    @property
    def xs(self):
        return (self.x_struct, self.x_task, self.x_rule)

    def take(self, idx) -> "ViewData":
        return ViewData(*(None if x is None else x[idx] for x in self.xs), self.y[idx])

    def for_model(self, model: FusionModel):
        """Inputs with disabled views blanked out."""
        return tuple(x if v in model.view_dims else None for v, x in zip(VIEW_NAMES, self.xs))


def validation_metric(model: FusionModel, data: ViewData) -> float:
    """Mean ROC-AUC over evaluable tasks, or RMSE for regression."""
    y_hat = predict(model, *data.for_model(model)).y_hat
    if not model.is_classifier:
        m = ~np.isnan(data.y)
        return rmse(y_hat[m], data.y[m])
    aucs = []
    for t in range(data.y.shape[1]):
        m = ~np.isnan(data.y[:, t])
        try:
            aucs.append(roc_auc(y_hat[m, t], data.y[m, t]))
        except SingleClass:
            continue
    return float(np.mean(aucs)) if aucs else float("nan")


def full_loss(model: FusionModel, data: ViewData) -> float:
    cache = forward(model, *data.for_model(model))
    from molviews.model.fusion import loss

    return loss(model, cache, data.y)


@dataclass
class TrainResult:
    model: FusionModel
    log: list = field(default_factory=list)
    best_epoch: int = 0
    wall_times: list = field(default_factory=list)

    def log_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.log)


class Adam:
    def __init__(self, params, lr, beta1, beta2, eps):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k in sorted(params):
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def train(model: FusionModel, train_data: ViewData, valid_data: ViewData, config: TrainConfig) -> TrainResult:
    """Fit ``model`` in place and return it with one log record per epoch.

    Validation drives early stopping: higher AUC or lower RMSE is better,
    and an exact tie on the metric counts as progress only if the validation
    loss drops (AUC saturates at 1.0 on small splits). The best weights are
    restored at the end. The shuffle stream depends only on ``config.seed``.
    """
    if len(train_data) == 0:
        raise EmptyDataset("training split is empty")
    if len(valid_data) == 0:
        raise EmptyDataset("validation split is empty")
    rng = np.random.default_rng([config.seed, 1])
    opt = Adam(model.params, config.learning_rate, config.beta1, config.beta2, config.adam_eps)
    maximize = model.is_classifier
    best_score, best_loss, best_params, best_epoch = None, None, None, 0
    stale = 0
    last_finite = None
    result = TrainResult(model)
    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(len(train_data))
        for b, s in enumerate(range(0, len(order), config.batch_size)):
            batch = train_data.take(order[s:s + config.batch_size])
            if np.isnan(batch.y).all():
                continue
            cache = forward(model, *batch.for_model(model))
            value, grads = backward(model, cache, batch.y)
            if not math.isfinite(value):
                raise DivergedLoss(epoch, b, last_finite)
            last_finite = value
            opt.step(model.params, grads)
        train_loss = full_loss(model, train_data)
        valid_loss = full_loss(model, valid_data)
        if not (math.isfinite(train_loss) and math.isfinite(valid_loss)):
            raise DivergedLoss(epoch, -1, last_finite)
        score = validation_metric(model, valid_data)
        if math.isnan(score):
            score = -valid_loss if maximize else valid_loss
        if best_score is None:
            improved = True
        elif score == best_score:
            improved = valid_loss < best_loss
        else:
            improved = score > best_score if maximize else score < best_score
        if improved:
            best_score, best_loss, best_epoch, stale = score, valid_loss, epoch, 0
            best_params = {k: v.copy() for k, v in model.params.items()}
        else:
            stale += 1
        result.log.append({
            "epoch": epoch,
            "train_loss": train_loss,
            "valid_loss": valid_loss,
            "valid_metric": score,
            "best": improved,
        })
        result.wall_times.append(time.perf_counter() - started)
        if stale >= config.patience:
            break
    model.params.update(best_params)
    result.best_epoch = best_epoch
    return result


@dataclass
class ContributionReport:
    means: dict  # view name -> mean alpha
    per_molecule: np.ndarray  # (N, 3), columns in VIEW_NAMES order
    ids: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "means": {v: float(self.means[v]) for v in VIEW_NAMES},
            "n_molecules": int(len(self.per_molecule)),
        }

    def rows(self):
        """Yield ``(id, a_struct, a_task, a_rule)`` for plotting."""
        ids = self.ids or [str(i) for i in range(len(self.per_molecule))]
        for i, a in zip(ids, self.per_molecule):
            yield (i, *(float(x) for x in a))


def component_contributions(model: FusionModel, data: ViewData, ids=None) -> ContributionReport:
    """Average each view's gate weight over a dataset."""
    if len(data) == 0:
        raise EmptyDataset("no molecules to analyse")
    alpha = predict(model, *data.for_model(model)).alpha
    means = alpha.mean(axis=0)
    return ContributionReport(dict(zip(VIEW_NAMES, means.tolist())), alpha, list(ids or []))
