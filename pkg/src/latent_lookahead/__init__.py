"""Latent-lookahead training and inference for small autoregressive transformers.

Subpackages:
    numcore   tape autodiff over numpy arrays, kernels, Adam
    model     GPT-2-style decoder over mixed discrete/injected inputs
    lookahead thought schedules, expanded layouts, masks, unroll, decoding
    datasets  synthetic planning tasks with exact oracles
    harness   run configs, training/eval loops, experiment suites, CLI
"""

__version__ = "0.1.0"
