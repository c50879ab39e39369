"""Command-line entry point.

Heavy imports stay inside the subcommand handlers so thread-count environment
variables (LOOKAHEAD_THREADS, or 1 under --deterministic) can be exported
before numpy first loads its BLAS thread pool.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def _pin_threads(deterministic: bool) -> None:
    n = "1" if deterministic else os.environ.get("LOOKAHEAD_THREADS", "")
    if n:
        for var in THREAD_VARS:
            os.environ.setdefault(var, n)


def _parse_override(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _apply_overrides(config, pairs):
    plain = {}
    model = {}
    for key, value in pairs:
        if key.startswith("model."):
            model[key[len("model.") :]] = value
        else:
            plain[key] = value
    if model:
        plain["model"] = model
    return config.with_overrides(**plain) if plain else config


def cmd_gen_data(args) -> int:
    import numpy as np

    from ..datasets import GENERATORS, write_dataset

    rng = np.random.default_rng(args.seed)
    gen = GENERATORS[args.task]
    samples = gen(rng, args.count) if args.count else gen(rng)
    out = write_dataset(samples, args.out, task=args.task, seed=args.seed)
    counts = {}
    for s in samples:
        counts[s.split] = counts.get(s.split, 0) + 1
    print(f"wrote {len(samples)} {args.task} samples to {out} (splits {counts})")
    return 0


def cmd_train(args) -> int:
    from .config import RunConfig
    from .plots import training_curves
    from .train import train

    config = RunConfig.load(args.config)
    pairs = list(args.set or [])
    if args.deterministic:
        pairs.append(("deterministic", True))
    if args.out_dir:
        pairs.append(("out_dir", args.out_dir))
    config = _apply_overrides(config, pairs)
    result = train(config, log=lambda msg: print(msg, flush=True))
    fig = training_curves(result.metrics_path, result.out_dir / "curves.svg")
    print(f"final accuracy {result.final_accuracy:.4f} best {result.best_accuracy:.4f}")
    print(f"metrics {result.metrics_path}")
    print(f"figure {fig}")
    return 0


def _load_run(checkpoint: str):
    from .config import RunConfig
    from .data import load_task_data
    from ..datasets.vocab import Vocabulary
    from ..model import load_checkpoint

    weights, meta = load_checkpoint(checkpoint)
    config = RunConfig.from_dict(meta["run"])
    vocab = Vocabulary.from_dict(meta["vocab"])
    data = load_task_data(config)
    if data.vocab != vocab:
        raise SystemExit("checkpoint vocabulary does not match the configured dataset")
    return weights, config, data


def cmd_eval(args) -> int:
    import numpy as np

    from .evaluation import evaluate

    weights, config, data = _load_run(args.checkpoint)
    if args.split == "train":
        encs = data.train
    elif args.split == data.eval_split:
        encs = data.evals
    else:
        raise SystemExit(f"split {args.split!r} not in this dataset (has train/{data.eval_split})")
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
        rng=np.random.default_rng(config.seed),
    )
    line = f"accuracy {result.accuracy:.4f} over {result.n} samples"
    if result.validity is not None:
        line += f" (constraint-valid {result.validity:.4f})"
    print(line)
    if args.records:
        with open(args.records, "w") as f:
            for rec in result.records:
                f.write(json.dumps(rec, sort_keys=True) + "\n")
        print(f"records {args.records}")
    return 0


def cmd_export_simplex(args) -> int:
    from .plots import simplex_figure
    from .simplex import simplex_rows, write_simplex_csv

    weights, config, data = _load_run(args.checkpoint)
    encs = data.evals if args.split != "train" else data.train
    if not 0 <= args.sample_index < len(encs):
        raise SystemExit(f"sample index {args.sample_index} outside 0..{len(encs) - 1}")
    rows = simplex_rows(
        weights,
        data.vocab,
        encs[args.sample_index],
        tau=config.tau,
        mode=args.mode,
        variant=config.variant,
        n_thoughts=config.n_thoughts,
        thought_index=args.thought,
        causal_within_thought=config.causal_within_thought,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_simplex_csv(rows, out)
    fig = simplex_figure(rows, out.with_suffix(".svg"), trajectory=args.mode == "refine")
    print(f"wrote {len(rows)} rows to {out}")
    print(f"figure {fig}")
    return 0


def cmd_suite(args) -> int:
    from .suite import run_suite

    pairs = list(args.set or [])
    if args.deterministic:
        pairs.append(("deterministic", True))
    overrides = {}
    model = {}
    for key, value in pairs:
        if key.startswith("model."):
            model[key[len("model.") :]] = value
        else:
            overrides[key] = value
    if model:
        overrides["model"] = model
    table = run_suite(args.preset, args.out, overrides=overrides, log=lambda m: print(m, flush=True))
    for line in Path(table).read_text().strip().split("\n")[1:]:
        cells = line.split(",")
        print(f"{cells[1]}: best {cells[-1]} final {cells[-2]}")
    print(f"table {table}")
    return 0


def cmd_dump_mask(args) -> int:
    import numpy as np

    from .config import RunConfig
    from .data import load_task_data, make_schedule
    from ..datasets.vocab import Vocabulary  # noqa: F401  (import order matches _load_run)
    from ..lookahead import build_layout, render_mask

    config = RunConfig.load(args.config)
    data = load_task_data(config)
    encs = data.evals if args.split != "train" else data.train
    if not 0 <= args.sample_index < len(encs):
        raise SystemExit(f"sample index {args.sample_index} outside 0..{len(encs) - 1}")
    enc = encs[args.sample_index]
    rng = np.random.default_rng(config.seed)
    layout = build_layout(
        enc.ids,
        enc.answer_start,
        config.variant,
        make_schedule(enc, config, rng),
        pause_id=data.vocab.pause_id,
    )
    print(render_mask(layout))
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--deterministic", action="store_true", help="single-threaded bit-reproducible mode")

    p = argparse.ArgumentParser(prog="lookahead", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", parents=[common], help="generate a dataset to disk")
    g.add_argument("task", choices=["mini_sudoku", "full_sudoku", "maze", "dag"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=0, help="0 uses the task default")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", parents=[common], help="train from a config file")
    t.add_argument("--config", required=True)
    t.add_argument("--out-dir", default="")
    t.add_argument("--set", action="append", type=_parse_override, metavar="KEY=VALUE")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--split", default="test")
    e.add_argument("--records", default="", help="write per-sample records to this JSONL path")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("export-simplex", parents=[common], help="project latent distributions to the unit square")
    x.add_argument("--checkpoint", required=True)
    x.add_argument("--sample-index", type=int, default=0)
    x.add_argument("--mode", choices=["refine", "final"], default="refine")
    x.add_argument("--split", default="test")
    x.add_argument("--thought", type=int, default=0)
    x.add_argument("--out", default="simplex.csv")
    x.set_defaults(func=cmd_export_simplex)

    s = sub.add_parser("suite", parents=[common], help="run an experiment preset")
    s.add_argument(
        "preset",
        choices=[
            "table1_desk",
            "tau_sweep",
            "position_strategies",
            "supervision_ablation",
            "mask_and_mtp_ablation",
            "depth_control",
        ],
    )
    s.add_argument("--out", default="runs/suite")
    s.add_argument("--set", action="append", type=_parse_override, metavar="KEY=VALUE")
    s.set_defaults(func=cmd_suite)

    d = sub.add_parser("dump-mask", parents=[common], help="render a sample's attention mask")
    d.add_argument("--config", required=True)
    d.add_argument("--sample-index", type=int, default=0)
    d.add_argument("--split", default="test")
    d.set_defaults(func=cmd_dump_mask)

    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    _pin_threads(bool(getattr(args, "deterministic", False)))
    if getattr(args, "deterministic", False):
        from .. import numcore as nc

        nc.set_deterministic(True)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
