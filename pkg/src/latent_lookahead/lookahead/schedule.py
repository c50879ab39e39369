"""Thought schedules: where thoughts anchor and how long they run."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SEQUENTIAL = "sequential"
RANDOM = "random"
STRATEGIES = (SEQUENTIAL, RANDOM)


@dataclass(frozen=True)
class ThoughtSchedule:
    """Anchors are visible indices whose slots a thought follows; tau is the
    lookahead horizon (latent steps per thought)."""

    anchors: tuple[int, ...]
    tau: int

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if len(self.anchors) == 0:
            raise ValueError("schedule needs at least one anchor")
        if any(a < 0 for a in self.anchors):
            raise ValueError(f"negative anchor in {self.anchors}")
        if any(b <= a for a, b in zip(self.anchors, self.anchors[1:])):
            raise ValueError(f"anchors must be strictly increasing, got {self.anchors}")

    @property
    def n(self) -> int:
        return len(self.anchors)

    def validate_for(self, T: int) -> None:
        # every anchor must leave at least one future token to supervise
        if self.anchors[-1] > T - 2:
            raise ValueError(f"anchor {self.anchors[-1]} has no successor in a {T}-token sequence")


def select_positions(
    T: int,
    answer_start: int,
    n: int,
    strategy: str = SEQUENTIAL,
    rng: np.random.Generator | None = None,
) -> tuple[int, ...]:
    """Choose n anchor positions for a T-token sequence whose answer begins at
    answer_start. The first anchor always sits at the answer boundary (the last
    question token) so planning can begin before any answer token is emitted.

    sequential: the boundary anchor plus the next n-1 consecutive positions.
    random: the boundary anchor plus n-1 positions drawn uniformly without
    replacement from the answer region.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= answer_start <= T - 1:
        raise ValueError(f"answer_start {answer_start} outside [1, {T - 1}]")
    first = answer_start - 1
    if strategy == SEQUENTIAL:
        anchors = tuple(range(first, first + n))
        if anchors[-1] > T - 2:
            raise ValueError(f"{n} sequential thoughts do not fit before position {T - 1}")
        return anchors
    if strategy == RANDOM:
        pool = np.arange(answer_start, T - 1)
        if len(pool) < n - 1:
            raise ValueError(f"answer region too short for {n} random thoughts")
        if rng is None:
            raise ValueError("random strategy needs an rng")
        extra = rng.choice(pool, size=n - 1, replace=False)
        return tuple(sorted([first, *extra.tolist()]))
    raise ValueError(f"unknown strategy {strategy!r}")
