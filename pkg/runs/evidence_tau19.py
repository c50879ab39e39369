"""Second direction check: the acceptance-matching horizon tau=19."""

import json
import time
from pathlib import Path

from latent_lookahead.harness import RunConfig, train
from latent_lookahead.harness.plots import training_curves
from latent_lookahead.model import ModelConfig

OUT = Path(__file__).parent / "evidence"

cfg = RunConfig(
    model=ModelConfig(
        vocab_size=10, d_model=64, n_layers=2, n_heads=4, max_positions=64, dropout=0.1
    ),
    variant="latent_lookahead",
    tau=19,
    lr=3e-4,
    batch_size=48,
    max_steps=4000,
    eval_every=400,
    eval_samples=100,
    task="mini_sudoku",
    dataset_count=2000,
    dataset_seed=0,
    seed=7,
    out_dir=str(OUT / "lookahead_tau19"),
)

t0 = time.time()
result = train(cfg, log=lambda m: print(f"[lookahead_tau19] {m}", flush=True))
training_curves(result.metrics_path, Path(cfg.out_dir) / "curves.svg")
row = dict(
    run="lookahead_tau19",
    variant=cfg.variant,
    tau=cfg.tau,
    best_accuracy=f"{result.best_accuracy:.4f}",
    final_accuracy=f"{result.final_accuracy:.4f}",
    minutes=f"{(time.time() - t0) / 60:.1f}",
)
print(json.dumps(row), flush=True)
(OUT / "lookahead_tau19.json").write_text(json.dumps(row, indent=2) + "\n")
