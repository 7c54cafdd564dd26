"""Per-cell replicate statistics."""

import math
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats


CELL_KEYS = ["throughput_bps", "pattern_id", "pattern_bits"]


def t_half_width(variance: float, n: int, confidence: float = 0.95) -> float:
    if n < 2:
        return 0.0
    quantile = stats.t.ppf(0.5 + confidence / 2, n - 1)
    return float(quantile * math.sqrt(variance / n))


def summarize_values(values: Sequence[float]) -> Dict[str, float]:
    data = np.asarray(values, dtype=float)
    n = len(data)
    variance = float(data.var(ddof=1)) if n > 1 else 0.0
    return {
        "n": n,
        "mean_s": float(data.mean()),
        "variance": variance,
        "ci95": t_half_width(variance, n),
        "variance_defined": n > 1,
    }


def summarize(frame: pd.DataFrame) -> pd.DataFrame:
    """Mean, unbiased variance and Student-t 95% half-width per (throughput, pattern)."""
    grouped = frame.groupby(CELL_KEYS, sort=True)["makespan_s"]
    summary = grouped.agg(n="count", mean_s="mean", variance="var").reset_index()
    summary["variance_defined"] = summary["n"] > 1
    summary["variance"] = summary["variance"].fillna(0.0)
    quantile = stats.t.ppf(0.975, np.maximum(summary["n"] - 1, 1))
    summary["ci95"] = np.where(
        summary["variance_defined"],
        quantile * np.sqrt(summary["variance"] / summary["n"]),
        0.0,
    )
    return summary


def pooled_variance(summary: pd.DataFrame) -> Tuple[float, int]:
    """Replicate variance pooled over cells; ``(nan, 0)`` without replication."""
    dof_per_cell = summary["n"] - 1
    dof = int(dof_per_cell.sum())
    if dof == 0:
        return float("nan"), 0
    return float((dof_per_cell * summary["variance"]).sum() / dof), dof
