"""Bridges datasets to the trainer: vocabulary, token grids, batch layouts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datasets import GENERATORS, Sample, build_vocabulary, read_dataset, sample_token_ids
from ..datasets.vocab import Vocabulary
from ..lookahead import (
    BatchedLayout,
    PLAIN_VARIANTS,
    NTP_BASELINE,
    ThoughtSchedule,
    build_layout,
    pad_layout,
    select_positions,
    stack_layouts,
)
from .config import RunConfig


@dataclass(frozen=True)
class EncodedSample:
    ids: np.ndarray
    answer_start: int
    sample: Sample


@dataclass
class TaskData:
    task: str
    vocab: Vocabulary
    train: list[EncodedSample]
    eval_split: str
    evals: list[EncodedSample]


def load_task_data(config: RunConfig) -> TaskData:
    """Generate (or read) the configured dataset and encode every sample."""
    if config.data_dir:
        samples, manifest = read_dataset(config.data_dir)
        task = manifest["task"]
    else:
        rng = np.random.default_rng(config.dataset_seed)
        samples = GENERATORS[config.task](rng, config.dataset_count)
        task = config.task
    vocab = build_vocabulary(samples)
    splits = {s.split for s in samples}
    eval_split = "test" if "test" in splits else "val"

    def encode(s: Sample) -> EncodedSample:
        ids, answer_start = sample_token_ids(s, vocab)
        return EncodedSample(ids=ids, answer_start=answer_start, sample=s)

    return TaskData(
        task=task,
        vocab=vocab,
        train=[encode(s) for s in samples if s.split == "train"],
        eval_split=eval_split,
        evals=[encode(s) for s in samples if s.split == eval_split],
    )


def expanded_length(enc: EncodedSample, config: RunConfig) -> int:
    extra = config.n_thoughts * config.tau if config.variant not in PLAIN_VARIANTS else 0
    return len(enc.ids) + extra


def required_positions(data: TaskData, config: RunConfig) -> int:
    return max(expanded_length(e, config) for e in data.train + data.evals)


def make_schedule(enc: EncodedSample, config: RunConfig, rng: np.random.Generator | None) -> ThoughtSchedule | None:
    if config.variant == NTP_BASELINE:
        return None
    anchors = select_positions(
        len(enc.ids), enc.answer_start, config.n_thoughts, config.strategy, rng
    )
    return ThoughtSchedule(anchors=anchors, tau=config.tau)


def batch_layouts(
    encs: list[EncodedSample],
    config: RunConfig,
    vocab: Vocabulary,
    rng: np.random.Generator | None,
) -> BatchedLayout:
    """Per-sample layouts padded to a common width and stacked."""
    layouts = [
        build_layout(
            e.ids,
            e.answer_start,
            config.variant,
            make_schedule(e, config, rng),
            pause_id=vocab.pause_id,
            loss_on_question=config.loss_on_question,
            looped_target_last=config.looped_target_last,
        )
        for e in encs
    ]
    width = max(lay.length for lay in layouts)
    layouts = [
        lay if lay.length == width else pad_layout(lay, width, vocab.pad_id) for lay in layouts
    ]
    return stack_layouts(layouts)
