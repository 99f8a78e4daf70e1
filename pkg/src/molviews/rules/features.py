"""Rule-view feature vectors and train-split normalization."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, is_dataclass

import numpy as np

from molviews.chem import Molecule, compute_descriptors
from molviews.rules.dsl import MissingExternal, NonFiniteResult, RuleSet, Var, evaluate_expression


class StatsMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RuleFeatureVector:
    values: np.ndarray
    normalization_applied: bool = False

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.values)


def evaluate_rules(ruleset: RuleSet, mol: Molecule, externals=None) -> RuleFeatureVector:
    """Feature vector in rule order: predicates give 0.0/1.0, numeric rules their value."""
    externals = externals or {}
    for ext in ruleset.external_ids:
        if ext not in externals or externals[ext] is None:
            users = [r.id for r in ruleset.rules if _uses(r.expression, ext)]
            raise MissingExternal(ext, users[0] if users else None)
    descriptors = compute_descriptors(mol) if len(ruleset) else None
    values = []
    for rule in ruleset.rules:
        value = evaluate_expression(rule.expression, descriptors, externals, mol, rule.id)
        value = float(value)
        if not math.isfinite(value):
            raise NonFiniteResult(rule.id)
        values.append(value)
    return RuleFeatureVector(np.array(values, dtype=np.float64))


def _uses(node, name):
    if isinstance(node, Var):
        return node.external and node.name == name
    for f in fields(node):
        child = getattr(node, f.name)
        children = child if isinstance(child, tuple) else (child,)
        if any(is_dataclass(c) and not isinstance(c, Molecule) and _uses(c, name) for c in children):
            return True
    return False


@dataclass(frozen=True)
class NormalizationStats:
    """Per numeric rule mean/std (population) from the training rows only."""

    rule_ids: tuple[str, ...]
    columns: tuple[int, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def to_dict(self):
        return {
            "rule_ids": list(self.rule_ids),
            "columns": list(self.columns),
            "mean": list(self.mean),
            "std": list(self.std),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["rule_ids"]), tuple(d["columns"]), tuple(d["mean"]), tuple(d["std"]))


def fit_normalization(ruleset: RuleSet, train_features) -> NormalizationStats:
    if len(train_features) == 0:
        raise ValueError("need at least one training feature vector")
    matrix = np.array([np.asarray(getattr(f, "values", f), dtype=np.float64) for f in train_features])
    if matrix.ndim != 2 or matrix.shape[1] != len(ruleset):
        raise StatsMismatch("feature width does not match the rule set")
    cols = tuple(i for i, r in enumerate(ruleset.rules) if r.kind == "numeric")
    mean = tuple(float(matrix[:, c].mean()) for c in cols)
    std = tuple(float(matrix[:, c].std()) for c in cols)
    return NormalizationStats(ruleset.rule_ids, cols, mean, std)


def _check(stats, vec):
    if len(vec) != len(stats.rule_ids):
        raise StatsMismatch(f"vector has {len(vec)} values, stats expect {len(stats.rule_ids)}")


def apply_normalization(stats: NormalizationStats, vector, ruleset: RuleSet | None = None) -> RuleFeatureVector:
    """Z-score numeric columns; zero-variance columns map to 0."""
    if ruleset is not None and ruleset.rule_ids != stats.rule_ids:
        raise StatsMismatch("stats were fitted on a different rule set")
    if isinstance(vector, RuleFeatureVector):
        if vector.normalization_applied:
            raise StatsMismatch("vector is already normalized")
        values = vector.values
    else:
        values = np.asarray(vector, dtype=np.float64)
    _check(stats, values)
    out = np.array(values, dtype=np.float64)
    for c, mu, sd in zip(stats.columns, stats.mean, stats.std):
        out[c] = (out[c] - mu) / sd if sd > 0 else 0.0
    return RuleFeatureVector(out, normalization_applied=True)


def invert_normalization(stats: NormalizationStats, vector: RuleFeatureVector) -> RuleFeatureVector:
    """Undo :func:`apply_normalization` (zero-variance columns come back as the mean)."""
    _check(stats, vector.values)
    out = np.array(vector.values, dtype=np.float64)
    for c, mu, sd in zip(stats.columns, stats.mean, stats.std):
        out[c] = out[c] * sd + mu
    return RuleFeatureVector(out, normalization_applied=False)


def normalize_matrix(stats: NormalizationStats, matrix: np.ndarray) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != len(stats.rule_ids):
        raise StatsMismatch("matrix width does not match the stats")
    out = matrix.copy()
    for c, mu, sd in zip(stats.columns, stats.mean, stats.std):
        out[:, c] = (out[:, c] - mu) / sd if sd > 0 else 0.0
    return out
