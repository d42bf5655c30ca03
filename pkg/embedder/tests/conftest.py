"""Shared helpers: corpus writer and a deterministic in-process backend."""
import json

import numpy as np

from paraembed.backends import BackendError


def write_paragraphs(path, n=5, prefix="case"):
    records = []
    for i in range(1, n + 1):
        records.append(
            {
                "id": f"{prefix}:{i}",
                "celex": prefix,
                "number": i,
                "title": f"case {i}",
                "date": "2015-01-01",
                "text": f"paragraph number {i} about union law topic {i % 3}",
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(json.dumps(r) + "\n" for r in records)
    return records


class FakeBackend:
    """Deterministic text-hash embeddings with programmable failures.

    ``fail_texts`` maps a substring to how many times batches containing
    it should fail before succeeding (-1 = always fail).
    """

    def __init__(self, dim=6, fail_texts=None):
        self.dim = dim
        self.calls = 0
        self.batches: list[list[str]] = []
        self._fail = dict(fail_texts or {})

    def embed(self, texts):
        self.calls += 1
        self.batches.append(list(texts))
        for needle, remaining in list(self._fail.items()):
            if any(needle in t for t in texts):
                if remaining == -1:
                    raise BackendError(f"permanent failure on {needle!r}")
                if remaining > 0:
                    self._fail[needle] = remaining - 1
                    raise BackendError(f"transient failure on {needle!r}")
        out = np.zeros((len(texts), self.dim), dtype=np.float32)
        for row, text in enumerate(texts):
            seed = sum(text.encode()) % (2**32)
            out[row] = np.random.default_rng(seed).standard_normal(self.dim)
        return out
