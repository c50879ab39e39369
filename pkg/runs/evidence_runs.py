"""Reduced-scale direction check: latent lookahead vs pause vs plain NTP.

Desk-scale gates (acceptance criteria 5-7) need hours per run; this script
trains the same three arms at width 64 / tau 5 / 4k steps so the comparison
finishes on a single core, then writes a merged table and bar figure.
"""

import csv
import json
import time
from pathlib import Path

from latent_lookahead.harness import RunConfig, train
from latent_lookahead.harness.plots import comparison_bars, training_curves
from latent_lookahead.model import ModelConfig

OUT = Path(__file__).parent / "evidence"

BASE = dict(
    model=ModelConfig(
        vocab_size=10, d_model=64, n_layers=2, n_heads=4, max_positions=64, dropout=0.1
    ),
    lr=3e-4,
    batch_size=48,
    max_steps=4000,
    eval_every=400,
    eval_samples=100,
    task="mini_sudoku",
    dataset_count=2000,
    dataset_seed=0,
    seed=7,
)

ARMS = [
    ("lookahead", dict(variant="latent_lookahead", tau=5)),
    ("pause", dict(variant="pause_tokens", tau=5)),
    ("ntp", dict(variant="ntp_baseline", tau=0)),
]


def main():
    rows = []
    for name, arm in ARMS:
        out_dir = OUT / name
        cfg = RunConfig(**BASE, **arm, out_dir=str(out_dir))
        t0 = time.time()
        result = train(cfg, log=lambda m: print(f"[{name}] {m}", flush=True))
        training_curves(result.metrics_path, out_dir / "curves.svg")
        rows.append(
            dict(
                run=name,
                variant=cfg.variant,
                tau=cfg.tau,
                best_accuracy=f"{result.best_accuracy:.4f}",
                final_accuracy=f"{result.final_accuracy:.4f}",
                minutes=f"{(time.time() - t0) / 60:.1f}",
            )
        )
        print(f"[{name}] done: {rows[-1]}", flush=True)
        with open(OUT / "evidence.csv", "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    comparison_bars(
        [r["run"] for r in rows], [float(r["best_accuracy"]) for r in rows], OUT / "evidence.svg"
    )
    (OUT / "evidence.json").write_text(json.dumps(rows, indent=2) + "\n")
    print("all arms complete", flush=True)


if __name__ == "__main__":
    main()
