"""Hyperparameter sweeps over cluster count, truncation step, or teacher."""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from snaprl.harness.aggregate import aggregate_curves, load_curves
from snaprl.harness.config import SWEEP_AXES, TEACHER_QUALITIES, ConfigError, ExperimentConfig
from snaprl.harness.runs import format_float, train_student, weak_model_path


def _config_for_value(config: ExperimentConfig, axis: str, value: str) -> ExperimentConfig:
    if axis == "K":
        cfg = replace(config, kmeans_k=int(value))
    elif axis == "T":
        cfg = replace(config, truncate_limit=int(value))
    elif axis == "teacher_quality":
        if value not in TEACHER_QUALITIES:
            raise ConfigError(
                f"teacher_quality value '{value}', expected one of {TEACHER_QUALITIES}"
            )
        if config.teacher_path is None:
            raise ConfigError("teacher_quality sweep needs teacher_path in the config")
        path = (
            config.teacher_path
            if value == "best"
            else str(weak_model_path(config.teacher_path))
        )
        cfg = replace(config, teacher_path=path)
    else:
        raise ConfigError(f"unknown sweep axis '{axis}', expected one of {SWEEP_AXES}")
    cfg.validate()
    return cfg


def run_sweep(
    config: ExperimentConfig,
    axis: str,
    values: list[str],
    out_dir: str | Path,
) -> tuple[Path, Path]:
    """Cartesian product of axis values and config seeds.

    Writes one combined CSV of every run row tagged with the axis value,
    and an aggregated summary per (value, global_step). Returns both paths.
    """
    if not values:
        raise ConfigError("sweep needs a non-empty value list")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    combined: list[tuple[str, dict]] = []
    summaries: list[tuple[str, dict]] = []
    for value in values:
        cfg = _config_for_value(config, axis, str(value))
        run_dir = out / f"{axis}_{value}"
        curve_paths = train_student(cfg, run_dir)
        rows = load_curves(curve_paths)
        combined.extend((str(value), row) for row in rows)
        summaries.extend((str(value), s) for s in aggregate_curves(rows))

    n_eps = len(combined[0][1]["returns"])
    ep_header = ",".join(f"ep{i}" for i in range(n_eps))
    lines = [f"axis,value,variant,seed,global_step,mean_return,{ep_header},wall_time"]
    for value, row in combined:
        eps = ",".join(format_float(r) for r in row["returns"])
        lines.append(
            f"{axis},{value},{row['variant']},{row['seed']},{row['global_step']},"
            f"{format_float(row['mean_return'])},{eps},{format_float(row['wall_time'])}"
        )
    runs_path = out / f"sweep_{axis}_runs.csv"
    runs_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [
        "axis,value,variant,global_step,n_seeds,median_return,mean_return,iqr_low,iqr_high"
    ]
    for value, row in summaries:
        lines.append(
            f"{axis},{value},{row['variant']},{row['global_step']},{row['n_seeds']},"
            f"{format_float(row['median_return'])},{format_float(row['mean_return'])},"
            f"{format_float(row['iqr_low'])},{format_float(row['iqr_high'])}"
        )
    summary_path = out / f"sweep_{axis}_summary.csv"
    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return runs_path, summary_path
