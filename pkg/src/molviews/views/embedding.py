"""Embedding retrieval through the cache, and per-molecule view vectors."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from molviews.views.cache import EmbeddingCache, prompt_digest
from molviews.views.prompts import STRUCTURE_QUESTIONS, build_structure_prompts, build_task_prompt
from molviews.views.providers import DimMismatch

log = logging.getLogger(__name__)

VIEWS = ("structure", "task")
DEFAULT_BATCH_SIZE = 32


class WrongCount(ValueError):
    pass


@dataclass(frozen=True)
class ViewEmbedding:
    vector: np.ndarray
    dim: int
    provider_id: str
    model_id: str
    prompt_hash: str
    view: str

    def __post_init__(self):
        if self.vector.shape != (self.dim,):
            raise DimMismatch(f"vector length {self.vector.shape} != dim {self.dim}")


@dataclass(frozen=True)
class StructureViewVector:
    vector: np.ndarray
    segment_dim: int

    def segment(self, j: int) -> np.ndarray:
        return self.vector[j * self.segment_dim:(j + 1) * self.segment_dim]


def embed(provider, prompts, view="structure", cache: EmbeddingCache | None = None,
          batch_size=DEFAULT_BATCH_SIZE, max_in_flight=1, stats=None) -> list[ViewEmbedding]:
    """One :class:`ViewEmbedding` per prompt, in order.

    The cache is consulted first; only misses reach the provider (deduplicated,
    in batches, up to ``max_in_flight`` concurrent requests) and every response
    is written through. ``stats``, if given, receives ``hits`` and ``misses``.
    """
    prompts = list(prompts)
    if not prompts:
        raise ValueError("no prompts to embed")
    if view not in VIEWS:
        raise ValueError(f"view must be one of {VIEWS}")
    pid, mid = provider.provider_id, provider.model_id
    hashes = [prompt_digest(p) for p in prompts]
    found: dict[str, np.ndarray] = {}
    if cache is not None:
        for h in dict.fromkeys(hashes):
            vec = cache.get(pid, mid, h)
            if vec is not None:
                found[h] = vec
    todo = [(h, p) for h, p in dict(zip(hashes, prompts)).items() if h not in found]
    if stats is not None:
        stats["hits"] = stats.get("hits", 0) + sum(1 for h in hashes if h in found)
        stats["misses"] = stats.get("misses", 0) + len(todo)

    if todo:
        batches = [todo[i:i + batch_size] for i in range(0, len(todo), batch_size)]

        def run(batch):
            return provider.embed_batch([p for _, p in batch])

        if max_in_flight > 1 and len(batches) > 1:
            with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
                results = list(pool.map(run, batches))
        else:
            results = [run(b) for b in batches]
        fresh = []
        for batch, vectors in zip(batches, results):
            for (h, _), vec in zip(batch, vectors):
                vec = np.asarray(vec, dtype=np.float64)
                found[h] = vec
                fresh.append((pid, mid, h, vec))
        expected = cache.dim_for(pid, mid) if cache is not None else None
        _check_dims([v for *_, v in fresh], expected, mid)
        if cache is not None:
            cache.put_many(fresh)

    vectors = [found[h] for h in hashes]
    _check_dims(vectors, None, mid)
    return [
        ViewEmbedding(np.array(v, dtype=np.float64), v.size, pid, mid, h, view)
        for v, h in zip(vectors, hashes)
    ]


def _check_dims(vectors, expected, model_id):
    dims = {v.size for v in vectors}
    if expected is not None:
        dims.add(expected)
    if len(dims) > 1:
        raise DimMismatch(f"{model_id}: inconsistent embedding dims {sorted(dims)}")


def assemble_structure_view(embeddings) -> StructureViewVector:
    """Concatenate the three insight embeddings in question order."""
    embeddings = list(embeddings)
    if len(embeddings) != len(STRUCTURE_QUESTIONS):
        raise WrongCount(f"expected {len(STRUCTURE_QUESTIONS)} embeddings, got {len(embeddings)}")
    dims = {e.dim for e in embeddings}
    if len(dims) != 1:
        raise DimMismatch(f"structure embeddings have mixed dims {sorted(dims)}")
    if len({(e.provider_id, e.model_id) for e in embeddings}) != 1:
        raise DimMismatch("structure embeddings come from different providers/models")
    return StructureViewVector(np.concatenate([e.vector for e in embeddings]), dims.pop())


def embed_molecules(provider, smiles_list, task_question, cache=None, wrapper_style="galactica_smiles_tags",
                    questions=STRUCTURE_QUESTIONS, batch_size=DEFAULT_BATCH_SIZE, max_in_flight=1, stats=None):
    """Structure (N x 3D) and task (N x D) view matrices for a list of SMILES."""
    smiles_list = list(smiles_list)
    struct_prompts = [p for s in smiles_list for p in build_structure_prompts(s, questions)]
    task_prompts = [build_task_prompt(s, task_question, wrapper_style) for s in smiles_list]
    k = len(questions)
    struct = embed(provider, struct_prompts, "structure", cache, batch_size, max_in_flight, stats)
    task = embed(provider, task_prompts, "task", cache, batch_size, max_in_flight, stats)
    if k == len(STRUCTURE_QUESTIONS):
        rows = [assemble_structure_view(struct[i * k:(i + 1) * k]).vector for i in range(len(smiles_list))]
    else:
        rows = [np.concatenate([e.vector for e in struct[i * k:(i + 1) * k]]) for i in range(len(smiles_list))]
    return np.array(rows), np.array([e.vector for e in task])
