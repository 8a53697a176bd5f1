"""
Sweep plots
Date of Creation: 2026-10-17
Description: Line charts of sweep medians against each swept axis, one line
             per CR count (or per threshold when the CR count is the axis),
             saved as SVG files named <metric>_vs_<axis>.svg.
"""

import logging
import os
from pathlib import Path
from typing import List, Tuple

import matplotlib
import matplotlib.pyplot as plt

from ..experiments.monte_carlo import SweepResult, with_derived

matplotlib.use("Agg")

logger = logging.getLogger(__name__)

PLOTS: Tuple[Tuple[str, str], ...] = (
    ("avg_power_mw", "threshold"),
    ("avg_power_mw", "n_cr"),
    ("avg_power_mw", "step"),
    ("cycles", "n_cr"),
    ("cycles", "threshold"),
    ("messages_per_cr", "threshold"),
    ("messages_total", "step"),
    ("messages_total", "delay_max"),
    ("nccc", "delay_max"),
)

LABELS = {
    "avg_power_mw": "Average allocated power per CR (mW)",
    "cycles": "Cycles",
    "messages_per_cr": "Messages per CR",
    "messages_total": "Total messages",
    "nccc": "NCCC",
    "threshold": "PU interference threshold (mW)",
    "n_cr": "Number of CRs",
    "step": "Power step (mW)",
    "delay_max": "Maximum message delay (ticks)",
}


def plot_metric(result: SweepResult, metric: str, axis: str,
                output_dir: os.PathLike) -> Path:
    """
    Plots the median of a metric against an axis.

    Parameters:
    - result (SweepResult): The sweep.
    - metric (str): Row column to plot.
    - axis (str): Swept column on the x axis.
    - output_dir (os.PathLike): Directory of the SVG file.

    Returns:
    - Path: The written file.

    Raises:
    - OSError: If the file cannot be written; the message names the path.
    """
    rows = with_derived(result.rows)
    series = "threshold" if axis == "n_cr" else "n_cr"
    path = Path(output_dir) / f"{metric}_vs_{axis}.svg"

    fig, ax = plt.subplots()
    for value, group in rows.groupby(series, sort=True):
        medians = group.groupby(axis, sort=True)[metric].median()
        ax.plot(medians.index, medians.to_numpy(), marker="o",
                label=f"{series} = {value:g}")
    if axis == "threshold":
        ax.set_xscale("log")
    ax.set_xlabel(LABELS.get(axis, axis))
    ax.set_ylabel(LABELS.get(metric, metric))
    ax.set_title(f"{LABELS.get(metric, metric)} ({rows['mode'].iloc[0]})")
    ax.legend(fontsize="small")
    ax.grid(True)

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg")
    except OSError as error:
        raise OSError(f"Cannot write plot {path}: "
                      f"{error.strerror or error}") from error
    finally:
        plt.close(fig)
    logger.info("saved plot %s", path)
    return path


def plot_sweep(result: SweepResult, output_dir: os.PathLike) -> List[Path]:
    """
    Writes every plot whose axis was swept over at least two values.
    """
    if result.rows.empty:
        return []
    return [plot_metric(result, metric, axis, output_dir)
            for metric, axis in PLOTS
            if result.rows[axis].nunique() >= 2]
