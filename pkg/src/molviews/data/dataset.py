"""MoleculeNet-style CSV ingestion with a rejects report."""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from molviews.chem import Molecule, SmilesError, parse_smiles

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

TASK_KINDS = ("classification", "regression")


class MissingColumn(KeyError):
    def __str__(self):
        return str(self.args[0])


class FileUnreadable(OSError):
    pass


class AllRowsRejected(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    task_kind: str
    smiles_column: str
    label_columns: tuple
    external_descriptor_columns: tuple = ()
    missing_label_token: str = ""
    delimiter: str = ","

    def __post_init__(self):
        object.__setattr__(self, "label_columns", tuple(self.label_columns))
        object.__setattr__(self, "external_descriptor_columns", tuple(self.external_descriptor_columns))
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"task_kind must be one of {TASK_KINDS}")
        if not self.label_columns:
            raise ValueError("at least one label column is required")

    @property
    def task_count(self) -> int:
        return len(self.label_columns)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "task_kind": self.task_kind,
            "smiles_column": self.smiles_column,
            "label_columns": list(self.label_columns),
            "external_descriptor_columns": list(self.external_descriptor_columns),
            "missing_label_token": self.missing_label_token,
            "delimiter": self.delimiter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetSpec":
        data = dict(data)
        data.pop("task_count", None)
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "DatasetSpec":
        """Read a spec from JSON or TOML; a TOML file may nest it under ``[dataset]``."""
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
        return cls.from_dict(data.get("dataset", data))


@dataclass
class Record:
    smiles: str
    labels: tuple  # float or None per task
    externals: dict = field(default_factory=dict)
    scaffold_key: str | None = None
    mol: Molecule | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Reject:
    row: int  # 1-based data row, header excluded
    smiles: str
    error: str


@dataclass
class LoadedDataset:
    spec: DatasetSpec
    records: list
    rejects: list
    n_rows: int

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]


def _parse_label(text, spec, row):
    text = text.strip()
    if text == spec.missing_label_token or text == "":
        return None
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite label {text!r}")
    if spec.task_kind == "classification" and value not in (0.0, 1.0):
        raise ValueError(f"classification label must be 0 or 1, got {text!r}")
    return value


def load_dataset(path, spec: DatasetSpec) -> LoadedDataset:
    """Parse every row; rows whose SMILES or labels fail are quarantined, not dropped."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise FileUnreadable(f"{path}: {exc.strerror or exc}") from exc
    with fh:
        try:
            reader = csv.DictReader(fh, delimiter=spec.delimiter)
            header = reader.fieldnames or []
            needed = [spec.smiles_column, *spec.label_columns, *spec.external_descriptor_columns]
            for col in needed:
                if col not in header:
                    raise MissingColumn(f"{path}: column {col!r} not in header")
            records, rejects = [], []
            n_rows = 0
            for n_rows, row in enumerate(reader, start=1):
                smiles = (row.get(spec.smiles_column) or "").strip()
                try:
                    mol = parse_smiles(smiles)
                    labels = tuple(_parse_label(row[c] or "", spec, n_rows) for c in spec.label_columns)
                    externals = {}
                    for c in spec.external_descriptor_columns:
                        cell = (row[c] or "").strip()
                        externals[c] = float(cell) if cell else None
                except (SmilesError, ValueError) as exc:
                    rejects.append(Reject(n_rows, smiles, f"{type(exc).__name__}: {exc}"))
                    continue
                records.append(Record(smiles, labels, externals, None, mol))
        except UnicodeDecodeError as exc:
            raise FileUnreadable(f"{path}: not UTF-8 ({exc.reason})") from exc
    if n_rows and not records:
        raise AllRowsRejected(f"{path}: all {n_rows} rows rejected")
    return LoadedDataset(spec, records, rejects, n_rows)


def write_rejects(rejects, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "smiles", "error"])
        for r in rejects:
            w.writerow([r.row, r.smiles, r.error])
    return path
