"""Test-split metrics and seed aggregation."""

from __future__ import annotations

import json

import numpy as np

from molviews.metrics import EmptyBatch, SingleClass, rmse, roc_auc

rmse_metric = rmse


def task_metrics(y_hat, y, task_kind, task_names):
    """One entry per task; a task that cannot be scored is flagged, not dropped."""
    y_hat = np.asarray(y_hat, dtype=np.float64).reshape(len(y), -1)
    y = np.asarray(y, dtype=np.float64).reshape(len(y), -1)
    rows = []
    for t, name in enumerate(task_names):
        m = ~np.isnan(y[:, t])
        entry = {"task": name, "n": int(m.sum()), "value": None, "evaluable": True, "reason": None}
        try:
            if task_kind == "classification":
                entry["value"] = roc_auc(y_hat[m, t], y[m, t])
            else:
                entry["value"] = rmse(y_hat[m, t], y[m, t])
        except (SingleClass, EmptyBatch) as exc:
            entry["evaluable"] = False
            entry["reason"] = type(exc).__name__
        rows.append(entry)
    return rows


def evaluate_predictions(y_hat, y, spec, seed=None) -> dict:
    tasks = task_metrics(y_hat, y, spec.task_kind, spec.label_columns)
    values = [t["value"] for t in tasks if t["evaluable"]]
    return {
        "dataset": spec.name,
        "task_kind": spec.task_kind,
        "metric": "roc_auc" if spec.task_kind == "classification" else "rmse",
        "seed": seed,
        "n_molecules": int(len(y)),
        "mean": float(np.mean(values)) if values else None,
        "n_evaluable": len(values),
        "not_evaluable": [t["task"] for t in tasks if not t["evaluable"]],
        "tasks": tasks,
    }


def evaluate(model, data, spec, seed=None) -> dict:
    """Score ``model`` on a :class:`~molviews.model.ViewData` split."""
    from molviews.model import predict

    y_hat = predict(model, *data.for_model(model)).y_hat
    return evaluate_predictions(y_hat, data.y, spec, seed)


def aggregate_seeds(reports) -> dict:
    """Mean and population standard deviation of per-seed task means."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    means = [r["mean"] for r in reports if r["mean"] is not None]
    out = {
        "dataset": reports[0]["dataset"],
        "metric": reports[0]["metric"],
        "seeds": [r["seed"] for r in reports],
        "per_seed": [r["mean"] for r in reports],
        "mean": float(np.mean(means)) if means else None,
        "std": float(np.std(means)) if means else None,
        "runs": reports,
    }
    return out


def dumps_report(report: dict) -> str:
    """Serialized form with the field order fixed by construction."""
    return json.dumps(report, indent=2) + "\n"
