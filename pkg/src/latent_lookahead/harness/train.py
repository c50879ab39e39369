"""The training loop: Adam over the selected variant with periodic evaluation.

One step draws a batch, builds per-sample layouts under the run's thought
schedule, runs the variant's forward (tau rollout rounds plus the final pass
for latent variants, one pass otherwise), backpropagates the summed
NTP + latent objective, clips the global gradient norm, and applies Adam.
Microbatching splits the batch while keeping the exact full-batch mean via
shared loss denominators. Greedy-decoding evaluation runs every eval_every
steps; the best-accuracy and final checkpoints are kept, and one CSV row is
appended per step.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import numcore as nc
from ..datasets.vocab import Vocabulary
from ..lookahead import channel_counts, compute_losses, unroll_train
from ..model import ModelWeights, init_weights, save_checkpoint
from .config import RunConfig
from .data import TaskData, batch_layouts, load_task_data, required_positions
from .evaluation import evaluate

METRICS_HEADER = "step,train_loss,ntp_loss,latent_loss,eval_accuracy,wall_time"


@dataclass
class RunResult:
    config: RunConfig
    weights: ModelWeights
    vocab: Vocabulary
    data: TaskData
    out_dir: Path
    metrics_path: Path
    best_path: Path
    last_path: Path
    best_accuracy: float
    final_accuracy: float


def _resolve_model_config(config: RunConfig, data: TaskData):
    """Pin vocab_size to the dataset and check the context budget."""
    model = config.model
    if model.vocab_size != data.vocab.size:
        model = replace(model, vocab_size=data.vocab.size)
    need = required_positions(data, config)
    if need > model.max_positions:
        raise ValueError(
            f"expanded sequences need {need} positions, model has {model.max_positions}"
        )
    return model


def _run_eval(weights, config: RunConfig, data: TaskData, rng) -> float:
    encs = data.evals
    if config.eval_samples and config.eval_samples < len(encs):
        encs = encs[: config.eval_samples]
    result = evaluate(
        weights,
        data.vocab,
        encs,
        variant=config.variant,
        task=data.task,
        tau=config.tau,
        n_thoughts=config.n_thoughts,
        strategy=config.strategy,
        trigger_prob=config.trigger_prob,
        decode_mode=config.decode_mode,
        causal_within_thought=config.causal_within_thought,
        rng=rng,
        keep_records=False,
    )
    return result.accuracy


def train(config: RunConfig, *, log=None) -> RunResult:
    """Run the configured training job; returns weights and artifact paths."""
    if config.deterministic:
        nc.set_deterministic(True)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config.save(out / "config.json")
    metrics_path = out / "metrics.csv"
    best_path = out / "best.ckpt"
    last_path = out / "last.ckpt"

    rng = np.random.default_rng(config.seed)
    data = load_task_data(config)
    model_cfg = _resolve_model_config(config, data)
    weights = init_weights(model_cfg, rng)
    opt = nc.adam_state(weights.params, lr=config.lr, beta1=config.beta1, beta2=config.beta2)

    micro = config.microbatch or config.batch_size
    n_train = len(data.train)
    best_acc = -1.0
    final_acc = 0.0
    t0 = time.monotonic()
    meta = {"task": data.task, "vocab": data.vocab.to_dict(), "run": config.to_dict()}

    with open(metrics_path, "w") as mf:
        mf.write(METRICS_HEADER + "\n")
        for step in range(1, config.max_steps + 1):
            take = min(config.batch_size, n_train)
            idx = rng.choice(n_train, size=take, replace=config.batch_size > n_train)
            encs = [data.train[int(i)] for i in idx]

            micro_encs = [encs[lo : lo + micro] for lo in range(0, len(encs), micro)]
            micro_layouts = [batch_layouts(me, config, data.vocab, rng) for me in micro_encs]
            aux = weights.config.aux_heads
            ntp_n = sum(channel_counts(bl, aux)[0] for bl in micro_layouts)
            lat_n = sum(channel_counts(bl, aux)[1] for bl in micro_layouts)

            nc.zero_grads(weights.params)
            tot = ntp = lat = 0.0
            try:
                for bl in micro_layouts:
                    with nc.Tape() as tape:
                        result = unroll_train(
                            weights,
                            bl,
                            training=True,
                            rng=rng,
                            causal_within_thought=config.causal_within_thought,
                        )
                        bundle = compute_losses(
                            weights, bl, result, ntp_denom=ntp_n, latent_denom=lat_n or None
                        )
                        nc.backward(bundle.total, tape)
                    s_tot, s_ntp, s_lat = bundle.scalars()
                    tot += s_tot
                    ntp += s_ntp
                    lat += s_lat
                if not np.isfinite(tot):
                    raise nc.NonFiniteError(f"loss at step {step} is {tot}")
                nc.clip_global_norm(weights.params, config.clip_norm)
                nc.adam_step(weights.params, opt)
            except nc.NonFiniteError as e:
                crash = out / "crash.ckpt"
                save_checkpoint(crash, weights, meta={**meta, "crash_step": step})
                mf.flush()
                raise RuntimeError(f"aborted at step {step}: {e}; state dumped to {crash}") from e

            acc_cell = ""
            if step % config.eval_every == 0 or step == config.max_steps:
                acc = _run_eval(weights, config, data, rng)
                final_acc = acc
                acc_cell = f"{acc:.6f}"
                if acc > best_acc:
                    best_acc = acc
                    save_checkpoint(best_path, weights, meta={**meta, "step": step, "accuracy": acc})
                if log:
                    log(f"step {step}: loss {tot:.4f} accuracy {acc:.4f}")
            wall = "" if config.deterministic else f"{time.monotonic() - t0:.3f}"
            mf.write(f"{step},{tot:.10g},{ntp:.10g},{lat:.10g},{acc_cell},{wall}\n")

    save_checkpoint(last_path, weights, meta={**meta, "step": config.max_steps})
    if config.max_steps == 0:
        save_checkpoint(best_path, weights, meta={**meta, "step": 0})
    (out / "summary.json").write_text(
        json.dumps(
            {
                "best_accuracy": best_acc if best_acc >= 0 else None,
                "final_accuracy": final_acc,
                "steps": config.max_steps,
                "task": data.task,
                "variant": config.variant,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return RunResult(
        config=config,
        weights=weights,
        vocab=data.vocab,
        data=data,
        out_dir=out,
        metrics_path=metrics_path,
        best_path=best_path,
        last_path=last_path,
        best_accuracy=best_acc,
        final_accuracy=final_acc,
    )
