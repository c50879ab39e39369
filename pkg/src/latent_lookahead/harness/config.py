"""Run configuration: one JSON-serializable object fixes a whole run.

Everything a training run depends on lives here (model shape, variant,
thought schedule, optimizer, data recipe, seeds), so (config, seed) is
sufficient to reproduce a run bit-for-bit in deterministic mode.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..datasets import GENERATORS
from ..lookahead import (
    DECODE_MODES,
    LATENT_LOOKAHEAD,
    LATENT_VARIANTS,
    MTP_AUX_HEADS,
    PAUSE_TOKENS,
    SEQUENTIAL,
    SINGLE,
    STRATEGIES,
    VARIANTS,
)
from ..model import ModelConfig

CONFIG_SCHEMA_VERSION = 1

THOUGHT_VARIANTS = tuple(LATENT_VARIANTS) + (PAUSE_TOKENS,)


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    variant: str = LATENT_LOOKAHEAD
    tau: int = 0
    n_thoughts: int = 1
    strategy: str = SEQUENTIAL
    trigger_prob: float = 0.1
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    clip_norm: float = 1.0
    batch_size: int = 128
    microbatch: int = 0
    max_steps: int = 10000
    eval_every: int = 500
    eval_samples: int = 0
    task: str = "mini_sudoku"
    dataset_count: int = 2000
    dataset_seed: int = 0
    data_dir: str = ""
    loss_on_question: bool = False
    looped_target_last: bool = False
    causal_within_thought: bool = False
    decode_mode: str = SINGLE
    deterministic: bool = False
    seed: int = 0
    out_dir: str = "runs/run"
    schema_version: int = CONFIG_SCHEMA_VERSION

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.decode_mode not in DECODE_MODES:
            raise ValueError(f"unknown decode mode {self.decode_mode!r}")
        if self.task not in GENERATORS and not self.data_dir:
            raise ValueError(f"unknown task {self.task!r} and no data_dir given")
        needs_tau = self.variant in THOUGHT_VARIANTS or self.variant == MTP_AUX_HEADS
        if needs_tau and self.tau < 1:
            raise ValueError(f"variant {self.variant} needs tau >= 1")
        if self.variant in THOUGHT_VARIANTS and self.n_thoughts < 1:
            raise ValueError("n_thoughts must be >= 1")
        if self.variant == MTP_AUX_HEADS and self.model.aux_heads != self.tau:
            raise ValueError(
                f"mtp variant needs model.aux_heads == tau, got {self.model.aux_heads} != {self.tau}"
            )
        if not 0 <= self.microbatch <= self.batch_size:
            raise ValueError("microbatch must be in [0, batch_size]")
        if self.schema_version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema {self.schema_version}")

    def with_overrides(self, **kw) -> "RunConfig":
        model_kw = kw.pop("model", None)
        cfg = self
        if model_kw is not None:
            model = model_kw if isinstance(model_kw, ModelConfig) else replace(cfg.model, **model_kw)
            cfg = replace(cfg, model=model)
        return replace(cfg, **kw) if kw else cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k in names}
        kw["model"] = ModelConfig.from_dict(d["model"])
        return cls(**kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())
