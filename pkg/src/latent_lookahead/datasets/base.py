"""Shared sample container for the procedural task generators."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Sample:
    """One question/answer pair, both space-separated symbol strings."""

    question: str
    answer: str
    split: str = "train"
    metadata: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "split": self.split,
            "metadata": self.metadata,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Sample":
        return cls(
            question=rec["question"],
            answer=rec["answer"],
            split=rec.get("split", "train"),
            metadata=rec.get("metadata", {}),
        )


def assign_splits(samples: list[Sample], fractions: dict[str, float]) -> None:
    """Label samples with splits in order, by cumulative fraction (sums to 1)."""
    total = sum(fractions.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"split fractions sum to {total}, expected 1")
    n = len(samples)
    start = 0
    names = list(fractions)
    cum = 0.0
    for i, name in enumerate(names):
        cum += fractions[name]
        stop = n if i == len(names) - 1 else int(round(cum * n))
        for s in samples[start:stop]:
            s.split = name
        start = stop
