"""Backend configuration."""
from __future__ import annotations

from dataclasses import dataclass

BACKEND_KINDS = ("local-model", "remote-api")
TEMPLATES = ("text", "full-record")


@dataclass(frozen=True)
class BackendConfig:
    """How embeddings are produced.

    ``model`` is recorded verbatim as the output's model tag. Vectors
    are always written at 32-bit precision.
    """

    kind: str
    model: str
    batch_size: int = 32
    max_retries: int = 3
    rate_limit_per_minute: int | None = None
    api_base: str = ""
    api_key_env: str = "PARAEMBED_API_KEY"

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"backend kind must be one of {BACKEND_KINDS}, got {self.kind!r}")
        if not self.model:
            raise ValueError("a model identifier is required")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")
        if self.max_retries < 0:
            raise ValueError(f"max retries must be >= 0, got {self.max_retries}")
        if self.rate_limit_per_minute is not None and self.rate_limit_per_minute < 1:
            raise ValueError("rate limit must be >= 1 request/minute")
