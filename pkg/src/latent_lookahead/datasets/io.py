"""Dataset persistence: newline-delimited JSON records plus a manifest.

The manifest records the generator version, seed, per-split counts, and a
sha256 over each split's serialized records, so regeneration can be checked
byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .base import Sample

DATA_FORMAT_VERSION = 1


def _record_line(sample: Sample) -> str:
    return json.dumps(sample.to_record(), sort_keys=True, separators=(",", ":"))


def write_dataset(samples: list[Sample], out_dir: str | Path, *, task: str, seed: int) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [_record_line(s) for s in samples]
    (out / "data.jsonl").write_text("\n".join(lines) + "\n")

    counts: dict[str, int] = {}
    hashers: dict[str, hashlib._hashlib.HASH] = {}
    for s, line in zip(samples, lines):
        counts[s.split] = counts.get(s.split, 0) + 1
        hashers.setdefault(s.split, hashlib.sha256()).update(line.encode() + b"\n")
    manifest = {
        "version": DATA_FORMAT_VERSION,
        "task": task,
        "seed": seed,
        "counts": counts,
        "split_hashes": {k: h.hexdigest() for k, h in sorted(hashers.items())},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def read_dataset(data_dir: str | Path) -> tuple[list[Sample], dict]:
    data_dir = Path(data_dir)
    manifest = json.loads((data_dir / "manifest.json").read_text())
    samples = [
        Sample.from_record(json.loads(line))
        for line in (data_dir / "data.jsonl").read_text().splitlines()
        if line
    ]
    return samples, manifest
