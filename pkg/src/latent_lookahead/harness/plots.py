"""Vector-graphics figures for runs, suites, and simplex projections."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .simplex import DIGITS, VERTICES


def _read_metrics(metrics_csv: str | Path) -> dict[str, list]:
    cols: dict[str, list] = {}
    with open(metrics_csv) as f:
        names = f.readline().strip().split(",")
        for name in names:
            cols[name] = []
        for line in f:
            for name, cell in zip(names, line.rstrip("\n").split(",")):
                cols[name].append(cell)
    return cols


def training_curves(metrics_csv: str | Path, out_svg: str | Path) -> Path:
    """Loss curves plus evaluation accuracy from one run's metrics file."""
    cols = _read_metrics(metrics_csv)
    steps = [int(s) for s in cols["step"]]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    for key, label in (("train_loss", "total"), ("ntp_loss", "ntp"), ("latent_loss", "latent")):
        vals = [float(v) for v in cols[key]]
        if any(v != 0.0 for v in vals):
            ax1.plot(steps, vals, label=label, linewidth=1)
    ax1.set_xlabel("step")
    ax1.set_ylabel("loss")
    ax1.legend(fontsize=8)
    pairs = [(s, float(a)) for s, a in zip(steps, cols["eval_accuracy"]) if a]
    if pairs:
        ax2.plot(*zip(*pairs), marker="o", markersize=3)
    ax2.set_xlabel("step")
    ax2.set_ylabel("exact-match accuracy")
    ax2.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    out = Path(out_svg)
    fig.savefig(out)
    plt.close(fig)
    return out


def comparison_bars(names: list[str], accs: list[float], out_svg: str | Path, *, ylabel: str = "accuracy") -> Path:
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(names), 3.2))
    ax.bar(range(len(names)), accs, color="#4878d0")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_ylim(0, 1.02)
    for i, a in enumerate(accs):
        ax.text(i, a + 0.02, f"{a:.2f}", ha="center", fontsize=7)
    fig.tight_layout()
    out = Path(out_svg)
    fig.savefig(out)
    plt.close(fig)
    return out


def scaling_curve(xs: list[float], accs: list[float], out_svg: str | Path, *, xlabel: str) -> Path:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(xs, accs, marker="o")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("accuracy")
    ax.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    out = Path(out_svg)
    fig.savefig(out)
    plt.close(fig)
    return out


def simplex_figure(rows: list[dict], out_svg: str | Path, *, trajectory: bool = False) -> Path:
    """Points inside the digit square; optionally joined in step order."""
    fig, ax = plt.subplots(figsize=(4.4, 4.4))
    ax.plot([0, 1, 1, 0, 0], [0, 0, 1, 1, 0], color="#999999", linewidth=1)
    for (vx, vy), d in zip(VERTICES, DIGITS):
        ax.annotate(
            d,
            (vx, vy),
            textcoords="offset points",
            xytext=(8 if vx < 0.5 else -8, 8 if vy < 0.5 else -8),
            ha="center",
            fontsize=10,
        )
    xs = [r["x"] for r in rows]
    ys = [r["y"] for r in rows]
    colors = ["#2ca02c" if r["correct"] == 1 else "#d62728" if r["correct"] == 0 else "#7f7f7f" for r in rows]
    if trajectory and len(rows) > 1:
        ax.plot(xs, ys, color="#bbbbbb", linewidth=0.8, zorder=1)
    ax.scatter(xs, ys, c=colors, s=26, zorder=2)
    for r in rows:
        ax.annotate(str(r["step"]), (r["x"], r["y"]), fontsize=6, textcoords="offset points", xytext=(4, 3))
    ax.set_xlim(-0.08, 1.08)
    ax.set_ylim(-0.08, 1.08)
    ax.set_aspect("equal")
    ax.set_xticks([0, 0.5, 1])
    ax.set_yticks([0, 0.5, 1])
    fig.tight_layout()
    out = Path(out_svg)
    fig.savefig(out)
    plt.close(fig)
    return out
