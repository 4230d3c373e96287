"""Parameter checkpoints: flat little-endian float64 stream + JSON manifest.

The manifest records array names, shapes, the training precision, and the
seed, so a checkpoint is self-describing and byte-reproducible.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

PARAMS_FILE = "params.bin"
MANIFEST_FILE = "params.json"


def save_params(directory: str | Path,
                named_arrays: list[tuple[str, np.ndarray]],
                precision: str = "float64",
                seed: int | None = None,
                extra: dict | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    blob = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes()
        for _, arr in named_arrays
    )
    manifest = {
        "arrays": [{"name": name, "shape": list(arr.shape)}
                   for name, arr in named_arrays],
        "precision": precision,
        "seed": seed,
    }
    if extra:
        manifest.update(extra)
    (directory / PARAMS_FILE).write_bytes(blob)
    (directory / MANIFEST_FILE).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_params(directory: str | Path):
    """Read a checkpoint back as ([(name, array)], manifest)."""
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST_FILE).read_text())
    blob = (directory / PARAMS_FILE).read_bytes()
    dtype = np.dtype(manifest["precision"])
    out: list[tuple[str, np.ndarray]] = []
    offset = 0
    for entry in manifest["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        flat = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        out.append((entry["name"], flat.reshape(shape).astype(dtype)))
    return out, manifest
