"""Table and plot-data writers built from sweep summaries."""

import logging
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import ConfigurationError
from ..scenario.patterns import DistributionPattern


logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "throughput_bps",
    "oda_mean_s",
    "full_odap_mean_s",
    "best_mean_s",
    "best_pattern_id",
    "best_product_fragments",
    "max_mean_s",
    "max_pattern_id",
]


def format_minutes(seconds: float) -> str:
    if seconds is None or np.isnan(seconds):
        return "-"
    minutes, rest = divmod(round(seconds), 60)
    return f"{minutes}'{rest:02d}''"


def _cell_mean(cells: pd.DataFrame, pattern_id: int) -> float:
    match = cells.loc[cells["pattern_id"] == pattern_id, "mean_s"]
    return float(match.iloc[0]) if len(match) else float("nan")


def distribution_summary(summary: pd.DataFrame, fragment_ids: Sequence[str]) -> pd.DataFrame:
    """ODA, full-ODAP and best-hybrid mean makespans per throughput.

    The best hybrid is the argmin over every swept pattern; ties go to the
    lowest pattern id.
    """
    k = len(fragment_ids)
    rows = []
    for throughput, cells in summary.groupby("throughput_bps", sort=False):
        ordered = cells.sort_values(["mean_s", "pattern_id"], kind="stable")
        best = ordered.iloc[0]
        worst = cells.sort_values(["mean_s", "pattern_id"], ascending=[False, True]).iloc[0]
        carried = DistributionPattern.from_bit_string(best["pattern_bits"]).bits
        rows.append(
            {
                "throughput_bps": float(throughput),
                "oda_mean_s": _cell_mean(cells, 0),
                "full_odap_mean_s": _cell_mean(cells, (1 << k) - 1),
                "best_mean_s": float(best["mean_s"]),
                "best_pattern_id": int(best["pattern_id"]),
                "best_product_fragments": " ".join(
                    fid for fid, bit in zip(fragment_ids, carried) if bit
                ),
                "max_mean_s": float(worst["mean_s"]),
                "max_pattern_id": int(worst["pattern_id"]),
            }
        )
    frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    return frame.sort_values("throughput_bps", ascending=False).reset_index(drop=True)


def render_distribution_summary(frame: pd.DataFrame) -> str:
    lines = [
        f"{'throughput':>12} {'ODA':>8} {'ODAP':>8} {'best':>8}  best hybrid",
        "-" * 60,
    ]
    for row in frame.itertuples(index=False):
        hybrid = row.best_product_fragments or "ODA"
        lines.append(
            f"{row.throughput_bps / 1e6:>10g}M {format_minutes(row.oda_mean_s):>8} "
            f"{format_minutes(row.full_odap_mean_s):>8} "
            f"{format_minutes(row.best_mean_s):>8}  {hybrid}"
        )
    return "\n".join(lines)


def oda_line_path(curve_path: Union[str, Path]) -> Path:
    path = Path(curve_path)
    return path.with_name(f"{path.stem}_oda{path.suffix}")


def plot_data(summary: pd.DataFrame, throughput_bps: float) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """The pattern-index curve and the constant ODA reference line at one throughput."""
    if summary.empty:
        raise ConfigurationError("sweep has no records")
    cells = summary[np.isclose(summary["throughput_bps"], throughput_bps)]
    if cells.empty:
        raise ConfigurationError(f"sweep has no cells at throughput {throughput_bps:g} bps")
    curve = (
        cells[["pattern_id", "mean_s"]]
        .rename(columns={"mean_s": "makespan_s"})
        .sort_values("pattern_id")
        .reset_index(drop=True)
    )
    oda = _cell_mean(cells, 0)
    if np.isnan(oda):
        raise ConfigurationError("sweep has no ODA cell (pattern_id 0) for the reference line")
    line = curve.assign(makespan_s=oda)
    return curve, line
