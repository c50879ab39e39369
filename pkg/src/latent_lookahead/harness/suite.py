"""Experiment presets: grids of runs with a merged results table and figures.

Each preset expands to a list of named runs over the desk-scale base config;
results land in <out>/<preset>/<run>/ with a suite_results.csv and comparison
figures at the preset root. Scale overrides (steps, widths, dataset size)
apply to every run, so the same grids double as smoke tests.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..lookahead import (
    LATENT_LOOKAHEAD,
    LOOPED_UNSUPERVISED,
    MTP_AUX_HEADS,
    MULTI,
    NTP_BASELINE,
    PAUSE_TOKENS,
    RANDOM,
    SEQUENTIAL,
)
from ..model import ModelConfig, load_checkpoint
from .config import RunConfig
from .evaluation import evaluate
from .plots import comparison_bars, scaling_curve
from .train import train

SUITE_HEADER = (
    "preset,run,variant,tau,n_thoughts,strategy,decode_mode,"
    "causal_within_thought,n_layers,final_accuracy,best_accuracy"
)

DESK_TAU = 19


def desk_config(**overrides) -> RunConfig:
    """Mini-Sudoku desk scale: 2 layers, d_model 128, batch 128, 10k steps."""
    base = RunConfig(
        model=ModelConfig(vocab_size=10, d_model=128, n_layers=2, n_heads=8, max_positions=64, dropout=0.1),
        variant=LATENT_LOOKAHEAD,
        tau=DESK_TAU,
        n_thoughts=1,
        lr=1e-4,
        batch_size=128,
        max_steps=10000,
        eval_every=500,
        task="mini_sudoku",
        dataset_count=2000,
        out_dir="runs/desk",
    )
    return base.with_overrides(**overrides)


@dataclass
class SuiteRun:
    name: str
    config: RunConfig


def _positions_for(base: RunConfig, tau: int, n: int) -> int:
    need = 40 + n * tau + 2
    return max(base.model.max_positions, need)


def _grid(base: RunConfig, preset: str) -> list[SuiteRun]:
    def cfg(name, **kw):
        model_kw = kw.pop("model", {})
        tau = kw.get("tau", base.tau)
        n = kw.get("n_thoughts", base.n_thoughts)
        model_kw.setdefault("max_positions", _positions_for(base, tau, n))
        return SuiteRun(name, base.with_overrides(model=model_kw, **kw))

    if preset == "table1_desk":
        return [
            cfg("lookahead", variant=LATENT_LOOKAHEAD),
            cfg("pause", variant=PAUSE_TOKENS),
            cfg("ntp", variant=NTP_BASELINE, tau=0),
        ]
    if preset == "tau_sweep":
        return [cfg(f"tau{t}", variant=LATENT_LOOKAHEAD, tau=t) for t in (2, 5, 10, DESK_TAU)]
    if preset == "position_strategies":
        runs = []
        for strategy in (SEQUENTIAL, RANDOM):
            for n in (1, 2, 4):
                runs.append(cfg(f"{strategy}_n{n}", variant=LATENT_LOOKAHEAD, tau=5, n_thoughts=n, strategy=strategy))
        return runs
    if preset == "supervision_ablation":
        return [
            cfg("lookahead", variant=LATENT_LOOKAHEAD),
            cfg("looped_next", variant=LOOPED_UNSUPERVISED),
            cfg("looped_last", variant=LOOPED_UNSUPERVISED, looped_target_last=True),
        ]
    if preset == "mask_and_mtp_ablation":
        return [
            cfg("bidirectional", variant=LATENT_LOOKAHEAD),
            cfg("causal_within", variant=LATENT_LOOKAHEAD, causal_within_thought=True),
            cfg("mtp", variant=MTP_AUX_HEADS, model={"aux_heads": base.tau}),
        ]
    if preset == "depth_control":
        return [
            cfg(f"depth{k}", variant=NTP_BASELINE, tau=0, model={"n_layers": k})
            for k in (2, 4, 8, 16)
        ]
    raise ValueError(f"unknown preset {preset!r}")


PRESETS = (
    "table1_desk",
    "tau_sweep",
    "position_strategies",
    "supervision_ablation",
    "mask_and_mtp_ablation",
    "depth_control",
)


def _row(preset, name, config: RunConfig, final_acc, best_acc) -> dict:
    return {
        "preset": preset,
        "run": name,
        "variant": config.variant,
        "tau": config.tau,
        "n_thoughts": config.n_thoughts,
        "strategy": config.strategy,
        "decode_mode": config.decode_mode,
        "causal_within_thought": config.causal_within_thought,
        "n_layers": config.model.n_layers,
        "final_accuracy": f"{final_acc:.6f}",
        "best_accuracy": f"{best_acc:.6f}",
    }


def run_suite(preset: str, out_dir: str | Path, *, overrides: dict | None = None, log=None) -> list[dict]:
    """Train the preset's grid sequentially and merge the results."""
    base = desk_config(**(overrides or {}))
    runs = _grid(base, preset)
    out = Path(out_dir) / preset
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    results = {}
    for sr in runs:
        config = sr.config.with_overrides(out_dir=str(out / sr.name))
        if log:
            log(f"[{preset}] training {sr.name}")
        result = train(config, log=log)
        results[sr.name] = result
        rows.append(_row(preset, sr.name, config, result.final_accuracy, result.best_accuracy))

    if preset == "mask_and_mtp_ablation":
        # decoding ablation reuses the bidirectional checkpoint
        base_run = results["bidirectional"]
        weights, _ = load_checkpoint(base_run.best_path)
        config = base_run.config.with_overrides(decode_mode=MULTI)
        acc = evaluate(
            weights,
            base_run.vocab,
            base_run.data.evals[: config.eval_samples or None],
            variant=config.variant,
            task=base_run.data.task,
            tau=config.tau,
            n_thoughts=config.n_thoughts,
            strategy=config.strategy,
            decode_mode=MULTI,
            causal_within_thought=config.causal_within_thought,
            rng=np.random.default_rng(config.seed),
            keep_records=False,
        ).accuracy
        rows.append(_row(preset, "multi_decode", config, acc, acc))

    table = out / "suite_results.csv"
    with open(table, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUITE_HEADER.split(","))
        writer.writeheader()
        writer.writerows(rows)

    accs = [float(r["best_accuracy"]) for r in rows]
    names = [r["run"] for r in rows]
    if preset == "tau_sweep":
        scaling_curve([r["tau"] for r in rows], accs, out / "tau_sweep.svg", xlabel="lookahead horizon tau")
    elif preset == "depth_control":
        scaling_curve([r["n_layers"] for r in rows], accs, out / "depth_control.svg", xlabel="layers")
    else:
        comparison_bars(names, accs, out / f"{preset}.svg")
    return str(table)
