"""
Plot regeneration
Date of Creation: 2026-10-17
Description: Redraws the sweep figures from CSV files written by the sweep
             command, without rerunning the simulations.

Usage: python run_plots.py <sweep.csv> [<sweep.csv> ...] [--out <dir>]
"""

import argparse
import sys
from pathlib import Path

from cognitiveqos.experiments.monte_carlo import read_csv
from cognitiveqos.helpers.config import configure_logging, default_output_dir
from cognitiveqos.visualization.sweep_plot import plot_sweep


def main() -> None:
    """
    Plots every given sweep CSV into a directory named after the file.
    """
    parser = argparse.ArgumentParser(
        description="Redraw sweep plots from CSV files.")
    parser.add_argument("csv", type=Path, nargs="+", help="Sweep CSV files.")
    parser.add_argument("--out", type=Path, default=None,
                        help="Output directory.")
    args = parser.parse_args()
    configure_logging(1)

    root = args.out or default_output_dir() / "plots"
    for path in args.csv:
        try:
            result = read_csv(path)
            written = plot_sweep(result, root / path.stem)
        except (OSError, ValueError) as error:
            print(f"error: {error}", file=sys.stderr)
            sys.exit(1)
        print(f"{path}: {len(written)} plots in {root / path.stem}")


if __name__ == "__main__":
    main()
