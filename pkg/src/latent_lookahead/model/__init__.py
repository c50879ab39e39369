"""GPT-2-style decoder over mixed discrete/injected slot inputs."""

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import ModelConfig
from .transformer import (
    BatchedInput,
    ForwardCounter,
    MixedInput,
    ModelWeights,
    count_forwards,
    feedback_hidden,
    forward,
    init_weights,
    parameter_shapes,
    unembed,
)

__all__ = [
    "BatchedInput",
    "CheckpointError",
    "ForwardCounter",
    "MixedInput",
    "ModelConfig",
    "ModelWeights",
    "count_forwards",
    "feedback_hidden",
    "forward",
    "init_weights",
    "load_checkpoint",
    "parameter_shapes",
    "save_checkpoint",
    "unembed",
]
