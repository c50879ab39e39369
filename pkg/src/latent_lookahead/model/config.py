"""Model hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class ModelConfig:
    """Decoder-only transformer shape and switches.

    aux_heads > 0 allocates that many independent (d_model x vocab) linear
    heads used only by the multi-token-prediction training variant; they are
    ignored at decode time.
    feedback_pre_norm re-injects pre-final-norm hidden states instead of the
    default post-norm ones when latents are fed back as inputs.
    """

    vocab_size: int
    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 8
    max_positions: int = 512
    dropout: float = 0.1
    tie_embeddings: bool = False
    feedback_pre_norm: bool = False
    aux_heads: int = 0

    def __post_init__(self):
        if self.vocab_size < 2:
            raise ValueError("vocab_size must be at least 2")
        if self.d_model % self.n_heads != 0:
            raise ValueError(f"d_model {self.d_model} not divisible by n_heads {self.n_heads}")
        if min(self.d_model, self.n_layers, self.n_heads, self.max_positions) < 1:
            raise ValueError("model dimensions must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout {self.dropout} outside [0, 1)")

    @property
    def head_dim(self) -> int:
        return self.d_model // self.n_heads

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})
