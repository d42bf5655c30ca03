"""Reproducibility manifests written beside every CLI output.

A manifest records the command line, SHA-256 digests of every input
file, the tokenizer rule id, and the parameter values that shaped the
output. Outputs themselves carry no timestamps, so reruns with the same
inputs are byte-identical; the manifest carries the timestamp.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import os

from . import __version__
from .tokens import TOKENIZER_ID


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(output_path: str) -> str:
    return output_path + ".manifest.json"


def write_manifest(
    output_path: str,
    command: list[str],
    inputs: list[str],
    params: dict,
    tokenizer_id: str = TOKENIZER_ID,
) -> None:
    body = {
        "command": command,
        "inputs": {path: sha256_file(path) for path in inputs},
        "tokenizer": tokenizer_id,
        "params": params,
        "version": __version__,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }
    with open(manifest_path(output_path), "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(output_path: str) -> dict | None:
    path = manifest_path(output_path)
    if not os.path.exists(path):
        return None
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
