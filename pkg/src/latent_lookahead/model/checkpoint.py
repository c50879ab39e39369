"""Checkpoint container: magic, version, JSON header, raw float32 blocks."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .. import numcore as nc
from .config import ModelConfig
from .transformer import ModelWeights, parameter_shapes

MAGIC = b"LLKC"
VERSION = 1


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str | Path, weights: ModelWeights, meta: dict | None = None) -> None:
    """Write config, metadata, and all named parameters as little-endian float32."""
    names = sorted(weights.params)
    header = {
        "config": weights.config.to_dict(),
        "meta": meta or {},
        "params": [{"name": n, "shape": list(weights.params[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for n in names:
            f.write(np.ascontiguousarray(weights.params[n].data, dtype="<f4").tobytes())


def load_checkpoint(path: str | Path) -> tuple[ModelWeights, dict]:
    """Read and shape-validate a checkpoint; returns (weights, meta)."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {raw[:4]!r}")
    (version,) = struct.unpack("<I", raw[4:8])
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    try:
        header = json.loads(raw[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt header: {e}") from e
    config = ModelConfig.from_dict(header["config"])
    expected = parameter_shapes(config)
    listed = {entry["name"]: tuple(entry["shape"]) for entry in header["params"]}
    if listed != expected:
        missing = sorted(set(expected) - set(listed))
        extra = sorted(set(listed) - set(expected))
        wrong = sorted(n for n in set(listed) & set(expected) if listed[n] != expected[n])
        raise CheckpointError(
            f"{path}: parameter table mismatch (missing={missing}, extra={extra}, wrong_shape={wrong})"
        )
    params: dict[str, nc.Tensor] = {}
    offset = 16 + hlen
    for entry in header["params"]:
        n = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
        nbytes = n * 4
        if offset + nbytes > len(raw):
            raise CheckpointError(f"{path}: truncated at parameter {entry['name']!r}")
        arr = np.frombuffer(raw[offset : offset + nbytes], dtype="<f4").reshape(entry["shape"])
        params[entry["name"]] = nc.Tensor(arr.astype(np.float32), requires_grad=True)
        offset += nbytes
    if offset != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - offset} trailing bytes")
    return ModelWeights(config, params), header["meta"]
