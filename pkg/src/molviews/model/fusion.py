"""Gated multi-view fusion followed by an MLP predictor, with exact gradients.

Shapes for a batch of B molecules, hidden width d and T tasks::

    p_v    = x_v @ W_v.T + b_v                 (B, d)    per view v
    logits = concat(p_struct, p_task, p_rule) @ G.T + g    (B, 3)
    alpha  = softmax(logits) over active views  (B, 3)    on the simplex
    z      = sum_v alpha_v * p_v                (B, d)
    y_hat  = head(MLP(z))                       (B, T)

Disabled views have no projection parameters; their logit is masked so their
weight is exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from molviews.metrics import EmptyBatch

VIEW_NAMES = ("struct", "task", "rule")
HEADS = ("sigmoid_scalar", "linear_scalar", "sigmoid_multitask")
EPS_PROB = 1e-7


class ShapeMismatch(ValueError):
    pass


@dataclass
class FusionModel:
    view_dims: dict  # active view name -> input width
    hidden_dim: int
    mlp_widths: tuple
    head: str
    n_tasks: int
    params: dict = field(repr=False)

    def __post_init__(self):
        if self.head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}")
        if not self.view_dims:
            raise ValueError("at least one view must be active")
        if self.head != "sigmoid_multitask" and self.n_tasks != 1:
            raise ValueError(f"{self.head} head has exactly one output")
        for name, shape in self.expected_shapes().items():
            if name not in self.params:
                raise ShapeMismatch(f"missing parameter {name}")
            if self.params[name].shape != shape:
                raise ShapeMismatch(f"{name}: shape {self.params[name].shape} != {shape}")
        extra = set(self.params) - set(self.expected_shapes())
        if extra:
            raise ShapeMismatch(f"unexpected parameters {sorted(extra)}")

    @property
    def active(self) -> tuple[bool, bool, bool]:
        return tuple(v in self.view_dims for v in VIEW_NAMES)

    @property
    def is_classifier(self) -> bool:
        return self.head.startswith("sigmoid")

    @property
    def n_layers(self) -> int:
        return len(self.mlp_widths) + 1

    def layer_activations(self) -> tuple[str, ...]:
        return ("relu",) * len(self.mlp_widths) + ("identity",)

    def expected_shapes(self) -> dict:
        d = self.hidden_dim
        shapes = {}
        for v in VIEW_NAMES:
            if v in self.view_dims:
                shapes[f"proj.{v}.W"] = (d, self.view_dims[v])
                shapes[f"proj.{v}.b"] = (d,)
        shapes["gate.W"] = (3, 3 * d)
        shapes["gate.b"] = (3,)
        widths = (d,) + tuple(self.mlp_widths) + (self.n_tasks,)
        for k in range(len(widths) - 1):
            shapes[f"mlp.{k}.W"] = (widths[k + 1], widths[k])
            shapes[f"mlp.{k}.b"] = (widths[k + 1],)
        return shapes

    def architecture(self) -> dict:
        return {
            "view_dims": {v: int(self.view_dims[v]) for v in VIEW_NAMES if v in self.view_dims},
            "hidden_dim": int(self.hidden_dim),
            "mlp_widths": [int(w) for w in self.mlp_widths],
            "head": self.head,
            "n_tasks": int(self.n_tasks),
        }

    def copy(self) -> "FusionModel":
        return FusionModel(dict(self.view_dims), self.hidden_dim, tuple(self.mlp_widths), self.head,
                           self.n_tasks, {k: v.copy() for k, v in self.params.items()})


def init_model(view_dims, hidden_dim=256, mlp_widths=(128,), head="sigmoid_scalar", n_tasks=1,
               seed=0, init_scale=1.0, gate_init="zero") -> FusionModel:
    """Glorot-uniform weights, zero biases.

    ``gate_init="zero"`` starts every molecule at equal view weights (1/3 each
    with three views); ``"glorot"`` randomizes the gate like other layers.
    """
    view_dims = {v: int(view_dims[v]) for v in VIEW_NAMES if view_dims.get(v)}
    if gate_init not in ("zero", "glorot"):
        raise ValueError("gate_init must be 'zero' or 'glorot'")
    rng = np.random.default_rng(seed)
    shell = FusionModel.__new__(FusionModel)
    shell.view_dims, shell.hidden_dim, shell.mlp_widths = view_dims, hidden_dim, tuple(mlp_widths)
    shell.head, shell.n_tasks = head, n_tasks
    params = {}
    for name, shape in shell.expected_shapes().items():
        if name.endswith(".b") or (name == "gate.W" and gate_init == "zero"):
            params[name] = np.zeros(shape)
        else:
            fan_out, fan_in = shape
            bound = init_scale * np.sqrt(6.0 / (fan_in + fan_out))
            params[name] = rng.uniform(-bound, bound, size=shape)
    return FusionModel(view_dims, hidden_dim, tuple(mlp_widths), head, n_tasks, params)


# --- the individual stages ---------------------------------------------------


def _as_batch(x):
    x = np.asarray(x, dtype=np.float64)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def project_views(model: FusionModel, z_struct, z_task, z_rule):
    """``W_v @ z_v + b_v`` per view; a disabled view must be given as ``None``."""
    out = []
    single = False
    batch = None
    for v, z in zip(VIEW_NAMES, (z_struct, z_task, z_rule)):
        if v not in model.view_dims:
            out.append(None)
            continue
        if z is None:
            raise ShapeMismatch(f"view {v} is active but no input was given")
        x, single = _as_batch(z)
        W, b = model.params[f"proj.{v}.W"], model.params[f"proj.{v}.b"]
        if x.shape[1] != W.shape[1]:
            raise ShapeMismatch(f"view {v}: input width {x.shape[1]} != {W.shape[1]}")
        if batch is not None and x.shape[0] != batch:
            raise ShapeMismatch("views have different batch sizes")
        batch = x.shape[0]
        out.append(x @ W.T + b)
    zeros = np.zeros((batch, model.hidden_dim))
    out = [zeros if p is None else p for p in out]
    if single:
        out = [p[0] for p in out]
    return tuple(out)


def masked_softmax(logits, active):
    logits = np.asarray(logits, dtype=np.float64)
    mask = np.asarray(active, dtype=bool)
    shifted = np.where(mask, logits, -np.inf)
    shifted = shifted - shifted.max(axis=-1, keepdims=True)
    e = np.where(mask, np.exp(shifted), 0.0)
    return e / e.sum(axis=-1, keepdims=True)


def gate_logits(model: FusionModel, p_struct, p_task, p_rule):
    h = np.concatenate([p_struct, p_task, p_rule], axis=-1)
    return h @ model.params["gate.W"].T + model.params["gate.b"]


def gate(model: FusionModel, p_struct, p_task, p_rule):
    """Per-molecule view weights: softmax of a linear map of the projections."""
    return masked_softmax(gate_logits(model, p_struct, p_task, p_rule), model.active)


def fuse(alpha, p_struct, p_task, p_rule):
    alpha = np.asarray(alpha, dtype=np.float64)
    a = alpha[..., :, None] if alpha.ndim > 1 else alpha[:, None]
    return a[..., 0, :] * p_struct + a[..., 1, :] * p_task + a[..., 2, :] * p_rule


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _mlp(model, z):
    """Returns (pre-activations, layer inputs, head output)."""
    h = z
    pre, inputs = [], []
    acts = model.layer_activations()
    for k in range(model.n_layers):
        W, b = model.params[f"mlp.{k}.W"], model.params[f"mlp.{k}.b"]
        if h.shape[-1] != W.shape[1]:
            raise ShapeMismatch(f"layer {k}: input width {h.shape[-1]} != {W.shape[1]}")
        inputs.append(h)
        a = h @ W.T + b
        pre.append(a)
        h = np.maximum(a, 0.0) if acts[k] == "relu" else a
    y = sigmoid(h) if model.is_classifier else h
    return pre, inputs, y


def mlp_forward(model: FusionModel, z_fused):
    z, single = _as_batch(z_fused)
    y = _mlp(model, z)[2]
    return y[0] if single else y


# --- full pass ---------------------------------------------------------------


@dataclass
class ForwardCache:
    xs: tuple
    projections: tuple
    alpha: np.ndarray
    z: np.ndarray
    pre: list
    inputs: list
    y_hat: np.ndarray


def forward(model: FusionModel, x_struct=None, x_task=None, x_rule=None) -> ForwardCache:
    ps = project_views(model, *(np.atleast_2d(x) if x is not None else None
                                for x in (x_struct, x_task, x_rule)))
    alpha = gate(model, *ps)
    z = fuse(alpha, *ps)
    pre, inputs, y = _mlp(model, z)
    return ForwardCache((x_struct, x_task, x_rule), ps, alpha, z, pre, inputs, y)


def _mask_of(y):
    y = np.asarray(y, dtype=np.float64)
    return ~np.isnan(y)


def loss_classification(y_hat, y, mask=None) -> float:
    """Mean binary cross-entropy over unmasked entries, probabilities clamped to [1e-7, 1-1e-7]."""
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise ShapeMismatch("predictions and labels differ in shape")
    m = _mask_of(y) if mask is None else (np.asarray(mask, dtype=bool) & _mask_of(y))
    n = int(m.sum())
    if n == 0:
        raise EmptyBatch("no labelled entries")
    p = np.clip(y_hat[m], EPS_PROB, 1.0 - EPS_PROB)
    t = y[m]
    return float(-np.sum(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)) / n)


def loss_regression(y_hat, y, mask=None) -> float:
    """Root mean squared error over unmasked entries."""
    from molviews.metrics import rmse

    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape:
        raise ShapeMismatch("predictions and targets differ in shape")
    m = _mask_of(y) if mask is None else (np.asarray(mask, dtype=bool) & _mask_of(y))
    if not m.any():
        raise EmptyBatch("no labelled entries")
    return rmse(y_hat[m], y[m])


def loss(model: FusionModel, cache: ForwardCache, y, mask=None) -> float:
    if model.is_classifier:
        return loss_classification(cache.y_hat, y, mask)
    return loss_regression(cache.y_hat, y, mask)


def backward(model: FusionModel, cache: ForwardCache, y, mask=None):
    """Exact gradient of the batch loss w.r.t. every parameter.

    Returns ``(loss, grads)`` with ``grads`` keyed like ``model.params``. The
    RMSE gradient is defined as 0 when the RMSE is exactly 0.
    """
    y = np.asarray(y, dtype=np.float64).reshape(cache.y_hat.shape)
    m = _mask_of(y) if mask is None else (np.asarray(mask, dtype=bool) & _mask_of(y))
    n = int(m.sum())
    if n == 0:
        raise EmptyBatch("no labelled entries")
    y0 = np.where(m, y, 0.0)
    y_hat = cache.y_hat
    if model.is_classifier:
        value = loss_classification(y_hat, y, m)
        inside = (y_hat > EPS_PROB) & (y_hat < 1.0 - EPS_PROB)
        pc = np.clip(y_hat, EPS_PROB, 1.0 - EPS_PROB)
        d_yhat = -(y0 / pc - (1.0 - y0) / (1.0 - pc)) / n
        d_yhat = np.where(m & inside, d_yhat, 0.0)
        d_out = d_yhat * y_hat * (1.0 - y_hat)
    else:
        value = loss_regression(y_hat, y, m)
        if value == 0.0:
            d_out = np.zeros_like(y_hat)
        else:
            d_out = np.where(m, y_hat - y0, 0.0) / (n * value)

    grads = {}
    acts = model.layer_activations()
    delta = d_out
    for k in reversed(range(model.n_layers)):
        if acts[k] == "relu":
            delta = delta * (cache.pre[k] > 0)
        grads[f"mlp.{k}.W"] = delta.T @ cache.inputs[k]
        grads[f"mlp.{k}.b"] = delta.sum(axis=0)
        delta = delta @ model.params[f"mlp.{k}.W"]
    dz = delta

    alpha = cache.alpha
    ps = cache.projections
    d_alpha = np.stack([np.sum(dz * p, axis=1) for p in ps], axis=1)
    d_logits = alpha * (d_alpha - np.sum(alpha * d_alpha, axis=1, keepdims=True))
    h = np.concatenate(ps, axis=1)
    grads["gate.W"] = d_logits.T @ h
    grads["gate.b"] = d_logits.sum(axis=0)
    d_h = d_logits @ model.params["gate.W"]
    d = model.hidden_dim
    for j, v in enumerate(VIEW_NAMES):
        if v not in model.view_dims:
            continue
        dp = alpha[:, j:j + 1] * dz + d_h[:, j * d:(j + 1) * d]
        x = np.atleast_2d(np.asarray(cache.xs[j], dtype=np.float64))
        grads[f"proj.{v}.W"] = dp.T @ x
        grads[f"proj.{v}.b"] = dp.sum(axis=0)
    return value, grads


@dataclass
class Predictions:
    y_hat: np.ndarray  # (N, T)
    alpha: np.ndarray  # (N, 3) struct, task, rule

    def __len__(self):
        return len(self.y_hat)


def predict(model: FusionModel, x_struct=None, x_task=None, x_rule=None, batch_size=1024) -> Predictions:
    n = next(len(x) for x in (x_struct, x_task, x_rule) if x is not None)
    ys, alphas = [], []
    for s in range(0, n, batch_size):
        sl = slice(s, s + batch_size)
        c = forward(model, *(x[sl] if x is not None else None for x in (x_struct, x_task, x_rule)))
        ys.append(c.y_hat)
        alphas.append(c.alpha)
    return Predictions(np.concatenate(ys), np.concatenate(alphas))
