"""Content-addressed on-disk embedding cache.

Layout under the cache root::

    <sha256 hex of "provider\\nmodel\\nprompt_sha256">   raw little-endian float64 vector
    index.json                                        {"version": 1, "entries": {hex: meta}}

Entry files are written atomically (temp file + rename) and never modified,
so readers need no lock. Index updates are serialized with a file lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from filelock import FileLock

INDEX_NAME = "index.json"


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def entry_name(provider_id: str, model_id: str, prompt_hash: str) -> str:
    return hashlib.sha256(f"{provider_id}\n{model_id}\n{prompt_hash}".encode("utf-8")).hexdigest()


class EmbeddingCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._file_lock = FileLock(str(self.root / (INDEX_NAME + ".lock")))

    def path_for(self, provider_id, model_id, prompt_hash) -> Path:
        return self.root / entry_name(provider_id, model_id, prompt_hash)

    def get(self, provider_id, model_id, prompt_hash):
        path = self.path_for(provider_id, model_id, prompt_hash)
        try:
            raw = path.read_bytes()
        except FileNotFoundError:
            return None
        return np.frombuffer(raw, dtype="<f8").copy()

    def put_many(self, items):
        """Store ``(provider_id, model_id, prompt_hash, vector)`` tuples."""
        items = list(items)
        if not items:
            return
        meta = {}
        for provider_id, model_id, prompt_hash, vector in items:
            vec = np.ascontiguousarray(vector, dtype="<f8")
            name = entry_name(provider_id, model_id, prompt_hash)
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
            with os.fdopen(fd, "wb") as fh:
                fh.write(vec.tobytes())
            os.replace(tmp, self.root / name)
            meta[name] = {
                "provider_id": provider_id,
                "model_id": model_id,
                "prompt_hash": prompt_hash,
                "dim": int(vec.size),
                "created_at": datetime.now(timezone.utc).isoformat(),
            }
        with self._lock, self._file_lock:
            index = self.read_index()
            index["entries"].update(meta)
            fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(index, fh, indent=1, sort_keys=True)
            os.replace(tmp, self.root / INDEX_NAME)

    def put(self, provider_id, model_id, prompt_hash, vector):
        self.put_many([(provider_id, model_id, prompt_hash, vector)])

    def read_index(self) -> dict:
        path = self.root / INDEX_NAME
        if not path.exists():
            return {"version": 1, "entries": {}}
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def dim_for(self, provider_id, model_id):
        for meta in self.read_index()["entries"].values():
            if meta["provider_id"] == provider_id and meta["model_id"] == model_id:
                return meta["dim"]
        return None

    def __len__(self):
        return sum(1 for p in self.root.iterdir() if len(p.name) == 64 and not p.suffix)
