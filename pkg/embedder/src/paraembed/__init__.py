"""paraembed: batch embedding files for paragraph corpora."""

__version__ = "0.1.0"

from .backends import AuthError, BackendError, LocalModelBackend, RemoteApiBackend, make_backend
from .config import BackendConfig
from .pipeline import EmbedReport, PipelineError, embed_corpus, render_record

__all__ = [
    "AuthError",
    "BackendConfig",
    "BackendError",
    "EmbedReport",
    "LocalModelBackend",
    "PipelineError",
    "RemoteApiBackend",
    "embed_corpus",
    "make_backend",
    "render_record",
]
