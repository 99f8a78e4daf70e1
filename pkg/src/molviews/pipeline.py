"""Glue between the stages: rule features, view matrices and model inputs."""

from __future__ import annotations

import numpy as np

from molviews.data.split import DatasetSplit
from molviews.model import ViewData
from molviews.rules import RuleError, evaluate_rules, fit_normalization, normalize_matrix
from molviews.views import embed_molecules

PARTS = ("train", "valid", "test")


class FeaturizeError(ValueError):
    def __init__(self, smiles, error):
        super().__init__(f"{smiles}: {type(error).__name__}: {error}")
        self.smiles, self.error = smiles, error


def rule_matrix(ruleset, records) -> np.ndarray:
    """Raw (unnormalized) rule features, one row per record."""
    rows = []
    for r in records:
        try:
            rows.append(evaluate_rules(ruleset, r.mol, r.externals).values)
        except RuleError as exc:
            raise FeaturizeError(r.smiles, exc) from exc
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(ruleset))


def featurize_split(split: DatasetSplit, ruleset):
    """Raw matrices per part and normalization stats fitted on train only."""
    raw = {name: rule_matrix(ruleset, part) for name, part in split.parts()}
    stats = fit_normalization(ruleset, raw["train"])
    return raw, stats


def label_matrix(records, n_tasks) -> np.ndarray:
    y = np.full((len(records), n_tasks), np.nan)
    for i, r in enumerate(records):
        for t, v in enumerate(r.labels):
            if v is not None:
                y[i, t] = v
    return y


def embed_split(provider, split: DatasetSplit, task_question, cache=None, wrapper_style="galactica_smiles_tags",
                stats=None, max_in_flight=1):
    """Structure and task matrices per part."""
    out = {}
    for name, part in split.parts():
        out[name] = embed_molecules(provider, [r.smiles for r in part], task_question, cache,
                                    wrapper_style=wrapper_style, stats=stats, max_in_flight=max_in_flight)
    return out


def view_data(split: DatasetSplit, n_tasks, rules=None, stats=None, embeddings=None, views=("struct", "task", "rule")):
    """:class:`ViewData` per part; ``rules`` holds raw matrices, normalized here with ``stats``."""
    data = {}
    for name, part in split.parts():
        xs = {"struct": None, "task": None, "rule": None}
        if "rule" in views:
            xs["rule"] = normalize_matrix(stats, rules[name])
        if embeddings is not None:
            if "struct" in views:
                xs["struct"] = embeddings[name][0]
            if "task" in views:
                xs["task"] = embeddings[name][1]
        data[name] = ViewData(xs["struct"], xs["task"], xs["rule"], label_matrix(part, n_tasks))
    return data


def view_dims(data) -> dict:
    train = data["train"]
    return {v: x.shape[1] for v, x in zip(("struct", "task", "rule"), train.xs) if x is not None}
