"""Embedding providers: a seeded mock and an embeddings-over-HTTP client."""

from __future__ import annotations

import hashlib
import logging
import os
import time
from typing import Protocol

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_MAX_RETRIES = 5
DEFAULT_BACKOFF_BASE = 0.5  # seconds
DEFAULT_BACKOFF_CAP = 30.0


class ProviderFailure(RuntimeError):
    pass


class ProviderUnreachable(ProviderFailure):
    pass


class ProviderError(ProviderFailure):
    def __init__(self, status, body_excerpt):
        super().__init__(f"provider returned HTTP {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class RateLimited(ProviderFailure):
    def __init__(self, retry_after, attempts):
        super().__init__(f"rate limited after {attempts} attempts (last retry-after {retry_after})")
        self.retry_after = retry_after
        self.attempts = attempts


class DimMismatch(ValueError):
    pass


class EmbeddingProvider(Protocol):
    provider_id: str
    model_id: str

    def embed_batch(self, prompts: list[str]) -> list[np.ndarray]: ...


def mock_embed(prompt: str, dim: int, seed: int = 0) -> np.ndarray:
    """Unit-norm vector expanded from SHAKE-256 of ``(seed, prompt)``."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    digest = hashlib.shake_256(f"{seed}\x00".encode() + prompt.encode("utf-8")).digest(8 * dim)
    raw = np.frombuffer(digest, dtype="<u8").astype(np.float64)
    vec = raw / 2.0**64 * 2.0 - 1.0
    return vec / np.linalg.norm(vec)


class MockProvider:
    """Deterministic offline provider; counts calls so tests can assert cache use."""

    def __init__(self, dim: int = 32, seed: int = 0, provider_id: str = "mock", model_id: str | None = None):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed
        self.provider_id = provider_id
        self.model_id = model_id or f"mock-d{dim}-s{seed}"
        self.calls = 0
        self.prompts_seen = 0

    def embed_batch(self, prompts):
        self.calls += 1
        self.prompts_seen += len(prompts)
        return [mock_embed(p, self.dim, self.seed) for p in prompts]


def _retry_after_seconds(value):
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        from email.utils import parsedate_to_datetime

        try:
            when = parsedate_to_datetime(value)
        except (TypeError, ValueError):
            return None
        return max(0.0, when.timestamp() - time.time())


class HttpEmbeddingProvider:
    """POST ``{"model", "input": [...]}`` and read ``{"data": [{"index", "embedding"}]}``.

    Rate limits (429) and server errors (5xx) are retried with capped
    exponential backoff; ``Retry-After`` wins when the server sends it.
    """

    def __init__(
        self,
        url: str,
        model: str,
        api_key_env: str | None = None,
        provider_id: str = "http",
        timeout: float = 60.0,
        max_retries: int = DEFAULT_MAX_RETRIES,
        backoff_base: float = DEFAULT_BACKOFF_BASE,
        backoff_cap: float = DEFAULT_BACKOFF_CAP,
        transport=None,
        sleep=time.sleep,
    ):
        import httpx

        self.url = url
        self.model_id = model
        self.provider_id = provider_id
        self.api_key_env = api_key_env
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self._dim = None
        self.calls = 0

    def close(self):
        self._client.close()

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env)
            if not key:
                raise ProviderFailure(f"environment variable {self.api_key_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _backoff(self, attempt):
        return min(self.backoff_cap, self.backoff_base * 2**attempt)

    def embed_batch(self, prompts):
        import httpx

        body = {"model": self.model_id, "input": list(prompts)}
        headers = self._headers()
        retry_after = None
        for attempt in range(self.max_retries + 1):
            last = attempt == self.max_retries
            self.calls += 1
            try:
                resp = self._client.post(self.url, json=body, headers=headers)
            except httpx.TransportError as exc:
                if last:
                    raise ProviderUnreachable(f"{self.url}: {exc}") from exc
                log.warning("embedding request failed (%s); retrying", exc)
                self._sleep(self._backoff(attempt))
                continue
            if resp.status_code == 429:
                retry_after = _retry_after_seconds(resp.headers.get("Retry-After"))
                if last:
                    raise RateLimited(retry_after, attempt + 1)
                wait = self._backoff(attempt) if retry_after is None else min(retry_after, self.backoff_cap)
                self._sleep(wait)
                continue
            if resp.status_code >= 500 and not last:
                self._sleep(self._backoff(attempt))
                continue
            if resp.status_code >= 400:
                raise ProviderError(resp.status_code, resp.text[:200])
            return self._decode(resp, len(prompts))
        raise AssertionError("unreachable")

    def _decode(self, resp, expected):
        try:
            data = resp.json()["data"]
            items = sorted(data, key=lambda d: d["index"])
            vectors = [np.asarray(d["embedding"], dtype=np.float64) for d in items]
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderError(resp.status_code, f"malformed response: {exc}") from exc
        if len(vectors) != expected or [d["index"] for d in items] != list(range(expected)):
            raise ProviderError(resp.status_code, f"expected {expected} embeddings, got {len(vectors)}")
        for v in vectors:
            if v.ndim != 1 or v.size == 0:
                raise ProviderError(resp.status_code, "embedding is not a flat vector")
            if self._dim is None:
                self._dim = v.size
            elif v.size != self._dim:
                raise DimMismatch(f"{self.model_id}: got dim {v.size}, expected {self._dim}")
        return vectors
