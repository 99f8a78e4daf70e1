"""Deterministic Bemis-Murcko scaffold split."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from molviews.chem import canonical_key, murcko_scaffold, parse_smiles


class TooFewScaffolds(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSplit:
    train: list
    valid: list
    test: list
    fractions: tuple
    seed: int | None = None  # the split is seed-free; kept for reporting

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.valid), len(self.test)

    def parts(self):
        return (("train", self.train), ("valid", self.valid), ("test", self.test))


def scaffold_key(record) -> str:
    mol = record.mol if record.mol is not None else parse_smiles(record.smiles)
    return canonical_key(murcko_scaffold(mol))


def scaffold_split(records, fractions=(0.8, 0.1, 0.1)) -> DatasetSplit:
    """Assign whole scaffold groups to train, then valid, then test.

    Groups are visited largest first (ties by key). Train takes groups while
    it holds fewer than ``f_train * N`` records, valid while train + valid
    holds fewer than ``(f_train + f_valid) * N``; the rest is test. While
    filling train at least two groups are held back, and while filling valid
    at least one, so no split ends up empty. Returned records are copies with
    ``scaffold_key`` filled in; acyclic molecules share the empty key.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f <= 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must be three positive numbers summing to 1")
    keyed = [dataclasses.replace(r, scaffold_key=scaffold_key(r)) for r in records]
    groups: dict[str, list] = {}
    for r in keyed:
        groups.setdefault(r.scaffold_key, []).append(r)
    if len(groups) < 3:
        raise TooFewScaffolds(f"{len(groups)} scaffold groups; need at least 3")
    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    n = len(keyed)
    train_cut = fractions[0] * n
    valid_cut = (fractions[0] + fractions[1]) * n
    train, valid, test = [], [], []
    i = 0
    while i < len(ordered) - 2 and (len(train) < train_cut or not train):
        train.extend(ordered[i][1])
        i += 1
    while i < len(ordered) - 1 and (len(train) + len(valid) < valid_cut or not valid):
        valid.extend(ordered[i][1])
        i += 1
    for _, members in ordered[i:]:
        test.extend(members)
    return DatasetSplit(train, valid, test, fractions)


def leaked_keys(split: DatasetSplit) -> set:
    """Scaffold keys present in more than one split; empty for a sound split."""
    sets = [{r.scaffold_key for r in part} for _, part in split.parts()]
    return (sets[0] & sets[1]) | (sets[0] & sets[2]) | (sets[1] & sets[2])

