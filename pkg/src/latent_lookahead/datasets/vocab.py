"""Minimal per-task vocabularies over space-separated symbol strings.

A vocabulary holds exactly the symbols its corpus uses, sorted, with the
special tokens appended at the end. Training sequences are built as
question ++ [";"] ++ answer ++ [<eoa>]; the answer therefore starts at
len(question) + 1 and the separator is the natural anchor for the first
thought.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .base import Sample


@lru_cache(maxsize=64)
def _symbol_ids(symbols: tuple[str, ...]) -> dict[str, int]:
    return {s: i for i, s in enumerate(symbols)}

PAD = "<pad>"
PAUSE = "<pause>"
EOA = "<eoa>"
SPECIALS = (PAD, PAUSE, EOA)
QA_SEP = ";"


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in vocabulary")
        for sp in SPECIALS:
            if sp not in self.symbols:
                raise ValueError(f"vocabulary missing special {sp}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def _ids(self) -> dict[str, int]:
        return _symbol_ids(self.symbols)

    def id_of(self, symbol: str) -> int:
        try:
            return self._ids()[symbol]
        except KeyError:
            raise ValueError(f"unknown symbol {symbol!r}") from None

    @property
    def pad_id(self) -> int:
        return self.id_of(PAD)

    @property
    def pause_id(self) -> int:
        return self.id_of(PAUSE)

    @property
    def eoa_id(self) -> int:
        return self.id_of(EOA)

    def encode(self, text: str) -> np.ndarray:
        ids = self._ids()
        try:
            return np.array([ids[s] for s in text.split()], dtype=np.int64)
        except KeyError as e:
            raise ValueError(f"unknown symbol {e.args[0]!r}") from None

    def decode(self, ids: Iterable[int]) -> str:
        return " ".join(self.symbols[int(i)] for i in ids)

    def to_dict(self) -> dict:
        return {"symbols": list(self.symbols)}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(symbols=tuple(d["symbols"]))


def build_vocabulary(samples: Iterable[Sample]) -> Vocabulary:
    """Sorted symbol inventory of the corpus (plus ';'), specials appended."""
    seen: set[str] = {QA_SEP}
    n = 0
    for s in samples:
        seen.update(s.question.split())
        seen.update(s.answer.split())
        n += 1
    if n == 0:
        raise ValueError("empty corpus")
    return Vocabulary(symbols=tuple(sorted(seen)) + SPECIALS)


def sample_token_ids(sample: Sample, vocab: Vocabulary) -> tuple[np.ndarray, int]:
    """(token ids, answer_start) for question ; answer <eoa>."""
    q = vocab.encode(sample.question)
    a = vocab.encode(sample.answer)
    sep = np.array([vocab.id_of(QA_SEP)], dtype=np.int64)
    eoa = np.array([vocab.eoa_id], dtype=np.int64)
    return np.concatenate([q, sep, a, eoa]), len(q) + 1
