"""Prompts that ask an LLM for rules, and the training subsets fed to it."""

from __future__ import annotations

import numpy as np

DEFAULT_SUBSET_COUNT = 5
DEFAULT_SUBSET_SIZE = 20

SCIENTIFIC_TEMPLATE = (
    "Assume you are an experienced Chemist. "
    "Please come up with {count} {noun} that are important to {task}."
)

DATA_TEMPLATE = (
    "Assume you are a very experienced Chemist. "
    "In the following data, with label 1, it means the smiles string is {meaning}. "
    "With label 0, it means the smiles string is not {meaning}. "
    "Please infer step-by-step to come up with {count} {noun} that directly relate "
    "the properties/structures of a molecule to predict if it can be {meaning}."
)

DATA_LINE = "{smiles} {label}"


class SubsetTooLarge(ValueError):
    pass


def _noun(count):
    return "rule" if count == 1 else "rules"


def _check_count(rule_count):
    if int(rule_count) != rule_count or rule_count < 1:
        raise ValueError("rule_count must be a positive integer")


def build_scientific_rule_prompt(task_description: str, rule_count: int = 20) -> str:
    task = (task_description or "").strip()
    if not task:
        raise ValueError("task_description must be non-empty")
    _check_count(rule_count)
    return SCIENTIFIC_TEMPLATE.format(count=rule_count, noun=_noun(rule_count), task=task.rstrip("."))


def _label_text(label):
    value = float(label)
    return str(int(value)) if value.is_integer() else repr(value)


def build_data_rule_prompt(subset, task_label_meaning: str, rule_count: int = 3) -> str:
    """Persona paragraph followed by one ``SMILES label`` line per pair."""
    subset = list(subset)
    if not subset:
        raise ValueError("subset must be non-empty")
    meaning = (task_label_meaning or "").strip()
    if not meaning:
        raise ValueError("task_label_meaning must be non-empty")
    _check_count(rule_count)
    head = DATA_TEMPLATE.format(meaning=meaning, count=rule_count, noun=_noun(rule_count))
    lines = [DATA_LINE.format(smiles=s, label=_label_text(y)) for s, y in subset]
    return head + "\n" + "\n".join(lines)


def sample_data_subsets(records, k: int = DEFAULT_SUBSET_COUNT, m: int = DEFAULT_SUBSET_SIZE, seed: int = 0):
    """``k`` subsets of ``m`` (smiles, label) pairs, each drawn without replacement.

    ``records`` is a sequence of (smiles, label) pairs. Subsets are
    independent draws from one seeded generator, so they may overlap.
    """
    records = list(records)
    if k < 1 or m < 1:
        raise ValueError("k and m must be positive")
    if m > len(records):
        raise SubsetTooLarge(f"subset size {m} exceeds dataset size {len(records)}")
    rng = np.random.default_rng(seed)
    return [[records[i] for i in rng.choice(len(records), size=m, replace=False)] for _ in range(k)]
