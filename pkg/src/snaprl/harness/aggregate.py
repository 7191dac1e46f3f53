"""Cross-seed aggregation of learning curves and the comparison report.

Curves are aligned on their shared evaluation grid and summarized per
(variant, step) by median, mean, and interquartile band. The report adds
the sample-efficiency view (steps until an evaluation clears the success
bar) and, when the relevant variants are present, the component-ordering
checks; any violated ordering is flagged with per-seed data rather than
silently dropped.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from snaprl.harness.runs import format_float, read_curve_csv

# an evaluation "succeeds" when at least this fraction of its episodes
# end in termination (positive return on the sparse navigation task)
SUCCESS_FRACTION = 2.0 / 3.0
SUCCESS_RETURN_THRESHOLD = 0.0

ABLATION_CHECKS = (
    ("s3rl", ">=", "max(snapshot_sc, snapshot_stt)"),
    ("max(snapshot_sc, snapshot_stt)", ">=", "snapshot"),
    ("stt_only", "<=", "baseline"),
)


def load_curves(paths: list[str | Path]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        rows.extend(read_curve_csv(path))
    if not rows:
        raise ValueError("no curve rows to aggregate")
    return rows


def _grids_by_variant(rows: list[dict]) -> dict[str, list[int]]:
    """Shared eval grid per variant; raises on misaligned seeds."""
    grids: dict[str, list[int]] = {}
    by_variant_seed: dict[tuple[str, int], list[int]] = {}
    for row in rows:
        by_variant_seed.setdefault((row["variant"], row["seed"]), []).append(
            row["global_step"]
        )
    for (variant, seed), steps in by_variant_seed.items():
        if steps != sorted(steps):
            raise ValueError(f"{variant}/seed {seed}: eval steps out of order")
        if variant not in grids:
            grids[variant] = steps
        elif grids[variant] != steps:
            raise ValueError(
                f"misaligned eval grids for variant '{variant}' across seeds"
            )
    return grids


def aggregate_curves(rows: list[dict]) -> list[dict]:
    """Per (variant, global_step): median, mean, interquartile band."""
    grids = _grids_by_variant(rows)
    values: dict[tuple[str, int], list[float]] = {}
    for row in rows:
        values.setdefault((row["variant"], row["global_step"]), []).append(
            row["mean_return"]
        )
    out = []
    for variant in sorted(grids):
        for step in grids[variant]:
            returns = np.array(values[(variant, step)], dtype=np.float64)
            out.append(
                {
                    "variant": variant,
                    "global_step": step,
                    "n_seeds": int(returns.size),
                    "median_return": float(np.median(returns)),
                    "mean_return": float(np.mean(returns)),
                    "iqr_low": float(np.percentile(returns, 25)),
                    "iqr_high": float(np.percentile(returns, 75)),
                }
            )
    return out


def write_summary_csv(path: str | Path, summary: list[dict]) -> None:
    lines = ["variant,global_step,n_seeds,median_return,mean_return,iqr_low,iqr_high"]
    for row in summary:
        lines.append(
            f"{row['variant']},{row['global_step']},{row['n_seeds']},"
            f"{format_float(row['median_return'])},{format_float(row['mean_return'])},"
            f"{format_float(row['iqr_low'])},{format_float(row['iqr_high'])}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _success_rate(returns: list[float]) -> float:
    hits = sum(1 for r in returns if r > SUCCESS_RETURN_THRESHOLD)
    return hits / len(returns)


def steps_to_success(rows: list[dict]) -> int | None:
    """First eval step whose success rate clears the bar; None if never."""
    for row in sorted(rows, key=lambda r: r["global_step"]):
        if _success_rate(row["returns"]) >= SUCCESS_FRACTION:
            return row["global_step"]
    return None


def _median_or_none(values: list[float]) -> float | None:
    med = float(np.median(np.array(values, dtype=np.float64)))
    return None if math.isinf(med) else med


def build_report(rows: list[dict]) -> dict:
    """Per-variant final/efficiency statistics plus ordering checks."""
    grids = _grids_by_variant(rows)
    by_variant: dict[str, dict[int, list[dict]]] = {}
    for row in rows:
        by_variant.setdefault(row["variant"], {}).setdefault(row["seed"], []).append(row)

    variants: dict[str, dict] = {}
    for variant, by_seed in sorted(by_variant.items()):
        final_step = grids[variant][-1]
        final_returns = {}
        steps = {}
        for seed, seed_rows in sorted(by_seed.items()):
            final = next(r for r in seed_rows if r["global_step"] == final_step)
            final_returns[seed] = final["mean_return"]
            steps[seed] = steps_to_success(seed_rows)
        variants[variant] = {
            "seeds": sorted(by_seed),
            "final_step": final_step,
            "final_return_by_seed": {str(s): v for s, v in final_returns.items()},
            "median_final_return": float(np.median(list(final_returns.values()))),
            "steps_to_success_by_seed": {str(s): v for s, v in steps.items()},
            "median_steps_to_success": _median_or_none(
                [float("inf") if v is None else float(v) for v in steps.values()]
            ),
        }

    report: dict = {"variants": variants}

    def median_final(name: str) -> float | None:
        if name == "max(snapshot_sc, snapshot_stt)":
            vals = [
                variants[v]["median_final_return"]
                for v in ("snapshot_sc", "snapshot_stt")
                if v in variants
            ]
            return max(vals) if len(vals) == 2 else None
        return variants[name]["median_final_return"] if name in variants else None

    checks = []
    for lhs_name, op, rhs_name in ABLATION_CHECKS:
        lhs = median_final(lhs_name)
        rhs = median_final(rhs_name)
        if lhs is None or rhs is None:
            continue
        holds = lhs >= rhs if op == ">=" else lhs <= rhs
        check = {
            "inequality": f"{lhs_name} {op} {rhs_name}",
            "lhs_median_final_return": lhs,
            "rhs_median_final_return": rhs,
            "holds": bool(holds),
        }
        if not holds:
            check["exception"] = {
                v: variants[v]["final_return_by_seed"]
                for v in variants
                if v in ("s3rl", "snapshot_sc", "snapshot_stt", "snapshot", "stt_only", "baseline")
            }
        checks.append(check)
    if checks:
        report["ablation_checks"] = checks

    if "s3rl" in variants and "baseline" in variants:
        s3rl_med = variants["s3rl"]["median_steps_to_success"]
        base_med = variants["baseline"]["median_steps_to_success"]
        s3rl_val = math.inf if s3rl_med is None else s3rl_med
        base_val = math.inf if base_med is None else base_med
        report["sample_efficiency"] = {
            "s3rl_median_steps_to_success": s3rl_med,
            "baseline_median_steps_to_success": base_med,
            "s3rl_strictly_faster": bool(s3rl_val < base_val),
            "s3rl_final_at_least_baseline": bool(
                variants["s3rl"]["median_final_return"]
                >= variants["baseline"]["median_final_return"]
            ),
        }
    return report


def write_report(path: str | Path, report: dict) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def aggregate_and_emit(
    curve_paths: list[str | Path], out_dir: str | Path
) -> tuple[Path, Path]:
    """Read run curves, write summary CSV + report JSON, return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = load_curves(curve_paths)
    summary_path = out / "summary.csv"
    write_summary_csv(summary_path, aggregate_curves(rows))
    report_path = out / "report.json"
    write_report(report_path, build_report(rows))
    return summary_path, report_path
