"""Run configs, training/eval loops, simplex export, experiment suites, CLI.

Submodule attributes are resolved lazily so the command-line entry point can
pin thread-count environment variables before numpy is first imported.
"""

from __future__ import annotations

import importlib

_EXPORTS = {
    "RunConfig": "config",
    "CONFIG_SCHEMA_VERSION": "config",
    "EncodedSample": "data",
    "TaskData": "data",
    "batch_layouts": "data",
    "load_task_data": "data",
    "required_positions": "data",
    "EvalResult": "evaluation",
    "evaluate": "evaluation",
    "METRICS_HEADER": "train",
    "RunResult": "train",
    "train": "train",
    "FINAL": "simplex",
    "REFINE": "simplex",
    "SIMPLEX_HEADER": "simplex",
    "digit_distribution": "simplex",
    "entropy": "simplex",
    "project": "simplex",
    "simplex_rows": "simplex",
    "write_simplex_csv": "simplex",
    "PRESETS": "suite",
    "SUITE_HEADER": "suite",
    "desk_config": "suite",
    "run_suite": "suite",
    "comparison_bars": "plots",
    "scaling_curve": "plots",
    "simplex_figure": "plots",
    "training_curves": "plots",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name: str):
    try:
        module = _EXPORTS[name]
    except KeyError:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}") from None
    value = getattr(importlib.import_module(f".{module}", __name__), name)
    # rebind after the import so exported callables win over the submodule
    # attribute the import machinery writes under the same name
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(_EXPORTS))
