"""Binary checkpoint format.

Layout::

    b"MVFM"                       magic
    uint16 little-endian          format version (1)
    uint32 little-endian          header length L
    L bytes UTF-8 JSON            {"architecture": ..., "params": [[name, shape], ...]}
    float64 little-endian         each parameter, row-major, in header order

A JSON sidecar (same path, ``.json`` suffix) repeats the shapes and carries
the training config. Loading validates both against the architecture.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from molviews.model.fusion import FusionModel, ShapeMismatch

MAGIC = b"MVFM"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _header(model: FusionModel) -> dict:
    names = sorted(model.params)
    return {
        "architecture": model.architecture(),
        "params": [[n, list(model.params[n].shape)] for n in names],
    }


def checkpoint_bytes(model: FusionModel) -> bytes:
    header = _header(model)
    raw = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<HI", VERSION, len(raw)), raw]
    for name, _ in header["params"]:
        parts.append(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())
    return b"".join(parts)


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_checkpoint(model: FusionModel, path, config: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(model))
    side = _header(model)
    side["format_version"] = VERSION
    side["config"] = config or {}
    sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path) -> FusionModel:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a model checkpoint")
    version, length = struct.unpack_from("<HI", data, 4)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    start = 10
    header = json.loads(data[start:start + length].decode("utf-8"))
    offset = start + length
    params = {}
    for name, shape in header["params"]:
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(data):
            raise CheckpointError(f"{path}: truncated at parameter {name}")
        params[name] = np.frombuffer(data[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
        offset = end
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    arch = header["architecture"]
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
        if meta.get("params") != header["params"]:
            raise ShapeMismatch(f"{side}: shapes disagree with the checkpoint header")
    return FusionModel(dict(arch["view_dims"]), arch["hidden_dim"], tuple(arch["mlp_widths"]),
                       arch["head"], arch["n_tasks"], params)
