"""Embedding backends: local sentence-transformer or remote REST API.

A backend maps a batch of texts to a float32 matrix. Rate limiting and
credential handling live here; retry policy lives in the pipeline so
every backend gets the same backoff behaviour.
"""
from __future__ import annotations

import os
import threading
import time

import numpy as np

from .config import BackendConfig


class BackendError(RuntimeError):
    """Transient or permanent backend failure (the pipeline retries it)."""


class AuthError(BackendError):
    """Missing or rejected credentials; not retried."""


class _RateLimiter:
    """Paces requests to at most one per interval; safe across threads."""

    def __init__(self, per_minute: int | None):
        self._interval = 60.0 / per_minute if per_minute else 0.0
        self._next_slot = 0.0
        self._lock = threading.Lock()

    def wait(self) -> None:
        if not self._interval:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next_slot)
            self._next_slot = slot + self._interval
        delay = slot - now
        if delay > 0:
            time.sleep(delay)


class LocalModelBackend:
    """Wraps a sentence-transformers model loaded from a name or path."""

    def __init__(self, config: BackendConfig):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise BackendError(
                "sentence-transformers is not installed; install paraembed[local]"
            ) from exc
        try:
            self._model = SentenceTransformer(config.model)
        except Exception as exc:
            raise BackendError(f"could not load model {config.model!r}: {exc}") from exc
        self._limiter = _RateLimiter(config.rate_limit_per_minute)

    def embed(self, texts: list[str]) -> np.ndarray:
        self._limiter.wait()
        matrix = self._model.encode(
            texts, convert_to_numpy=True, show_progress_bar=False, batch_size=len(texts)
        )
        return np.asarray(matrix, dtype=np.float32)


class RemoteApiBackend:
    """Client for an embeddings endpoint with the common JSON shape.

    POST {api_base}/embeddings with ``{"model": .., "input": [..]}``;
    the response carries ``data: [{"index": i, "embedding": [..]}]``.
    The key is read from the configured environment variable and sent
    as a bearer token.
    """

    def __init__(self, config: BackendConfig, transport=None):
        import httpx

        key = os.environ.get(config.api_key_env, "")
        if not key:
            raise AuthError(
                f"environment variable {config.api_key_env} is empty; "
                "remote embedding needs a credential"
            )
        if not config.api_base:
            raise BackendError("remote-api backend needs --api-base")
        self._model = config.model
        self._limiter = _RateLimiter(config.rate_limit_per_minute)
        self._client = httpx.Client(
            base_url=config.api_base.rstrip("/"),
            headers={"Authorization": f"Bearer {key}"},
            timeout=60.0,
            transport=transport,
        )

    def embed(self, texts: list[str]) -> np.ndarray:
        import httpx

        self._limiter.wait()
        try:
            response = self._client.post(
                "/embeddings", json={"model": self._model, "input": texts}
            )
        except httpx.HTTPError as exc:
            raise BackendError(f"request failed: {exc}") from exc
        if response.status_code in (401, 403):
            raise AuthError(f"credential rejected (HTTP {response.status_code})")
        if response.status_code != 200:
            raise BackendError(f"HTTP {response.status_code}: {response.text[:200]}")
        body = response.json()
        rows = sorted(body.get("data", []), key=lambda r: r.get("index", 0))
        if len(rows) != len(texts):
            raise BackendError(f"expected {len(texts)} embeddings, got {len(rows)}")
        return np.asarray([r["embedding"] for r in rows], dtype=np.float32)

    def close(self) -> None:
        self._client.close()


def make_backend(config: BackendConfig, transport=None):
    if config.kind == "local-model":
        return LocalModelBackend(config)
    return RemoteApiBackend(config, transport=transport)
