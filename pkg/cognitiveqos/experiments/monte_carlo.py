"""
Monte Carlo harness
Date of Creation: 2026-10-17
Description: Runs the protocol over a grid of CR counts, interference
             thresholds, quantization steps and delays, several seeded runs
             per grid point, and aggregates the run rows with pandas.
             Run seeds depend only on the base seed and the run index, so
             every grid point sees the same family of seeds and the order
             in which points are executed never changes a row.
"""

import itertools
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..algorithms.qos_protocol import QosProtocol, verify_run
from ..algorithms.simulation import RunOutcome
from ..classes.messages import MessageKind
from ..helpers.config import SweepConfig
from ..helpers.scenario_io import generate_scenario

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["seed", "n_cr", "n_pu", "threshold", "step", "delay_max",
               "mode", "cycles", "messages_ok", "messages_nogood",
               "messages_pu", "nccc", "avg_power_mw", "sum_log_rate",
               "feasible"]
GRID_KEYS = ["n_cr", "threshold", "step", "delay_max"]
METRICS = ["avg_power_mw", "cycles", "messages_total", "messages_per_cr",
           "nccc"]
STATISTICS = ["mean", "median", "std"]


@dataclass(frozen=True)
class GridPoint:
    n_cr: int
    threshold: float
    step: float
    delay_max: int


@dataclass(frozen=True)
class Anomaly:
    """
    A run that hit the cycle cap, stalled or broke a protocol guarantee.
    """
    point: GridPoint
    seed: int
    outcome: str
    problems: Tuple[str, ...] = ()


def grid_points(config: SweepConfig) -> List[GridPoint]:
    return [GridPoint(n_cr, threshold, step, delay)
            for n_cr, threshold, step, delay in itertools.product(
                config.n_cr, config.thresholds_mw, config.steps_mw,
                config.delays)]


def run_seed(base_seed: int, run_index: int) -> int:
    """
    The seed of run run_index, derived from the base seed alone.
    """
    sequence = np.random.SeedSequence([base_seed, run_index])
    return int(sequence.generate_state(1)[0])


def run_point(config: SweepConfig, point: GridPoint,
              run_index: int) -> Tuple[Dict[str, object], List[Anomaly]]:
    """
    Runs the protocol once at a grid point.

    Parameters:
    - config (SweepConfig): The sweep.
    - point (GridPoint): The grid point.
    - run_index (int): Index of the run within the point.

    Returns:
    - Tuple[Dict[str, object], List[Anomaly]]: The CSV row and the
        anomalies the run showed.
    """
    seed = run_seed(config.base_seed, run_index)
    radio = config.radio.model_copy(update={"pu_cap_mw": point.threshold,
                                            "power_step_mw": point.step})
    simulation = config.simulation.model_copy(
        update={"delay_max": point.delay_max})
    scenario = generate_scenario(seed, point.n_cr, config.n_pu, radio,
                                 config.mode)
    run = QosProtocol(scenario, simulation, radio.interference_range_ratio,
                      seed).run()

    anomalies = []
    problems = tuple(verify_run(run))
    if run.outcome in (RunOutcome.CYCLE_CAP, RunOutcome.STALLED) or problems:
        outcome = run.outcome.value if run.outcome else run.phase.value
        anomalies.append(Anomaly(point, seed, outcome, problems))

    metrics = run.metrics
    row = {
        "seed": seed,
        "n_cr": point.n_cr,
        "n_pu": config.n_pu,
        "threshold": point.threshold,
        "step": point.step,
        "delay_max": point.delay_max,
        "mode": config.mode.value,
        "cycles": metrics.cycles,
        "messages_ok": metrics.messages(MessageKind.OK),
        "messages_nogood": metrics.messages(MessageKind.NOGOOD),
        "messages_pu": metrics.messages(MessageKind.PU_VIOLATION),
        "nccc": metrics.nccc,
        "avg_power_mw": run.avg_power_mw,
        "sum_log_rate": run.sum_log_rate,
        "feasible": run.feasible,
    }
    return row, anomalies


def _run_task(task: Tuple[SweepConfig, GridPoint, int]) -> \
        Tuple[Dict[str, object], List[Anomaly]]:
    return run_point(*task)


def with_derived(rows: pd.DataFrame) -> pd.DataFrame:
    """
    Adds the total message count and the messages per CR.
    """
    rows = rows.copy()
    rows["messages_total"] = rows["messages_ok"] + rows["messages_nogood"] + \
        rows["messages_pu"]
    rows["messages_per_cr"] = rows["messages_total"] / rows["n_cr"]
    return rows


def aggregate(rows: pd.DataFrame) -> pd.DataFrame:
    """
    Mean, median and standard deviation of every metric per grid point,
    NaN powers of infeasible runs skipped.

    Returns:
    - pd.DataFrame: One row per grid point with columns GRID_KEYS and
        '<metric>_<statistic>', plus the run count 'runs'.
    """
    columns = GRID_KEYS + ["runs"] + [f"{metric}_{statistic}"
                                      for metric in METRICS
                                      for statistic in STATISTICS]
    if rows.empty:
        return pd.DataFrame(columns=columns)

    derived = with_derived(rows)
    grouped = derived.groupby(GRID_KEYS, sort=True)
    table = grouped[METRICS].agg(STATISTICS)
    table.columns = [f"{metric}_{statistic}"
                     for metric, statistic in table.columns]
    table["runs"] = grouped.size()
    return table.reset_index()[columns]


@dataclass
class SweepResult:
    """
    Raw rows and per-point aggregates of a sweep.

    Attributes:
    - rows (pd.DataFrame): One row per run, CSV_COLUMNS in order.
    - aggregates (pd.DataFrame): Statistics per grid point.
    - anomalies (List[Anomaly]): Runs that need a look.
    """
    rows: pd.DataFrame
    aggregates: pd.DataFrame
    anomalies: List[Anomaly] = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: pd.DataFrame,
                  anomalies: Sequence[Anomaly] = ()) -> "SweepResult":
        return cls(rows, aggregate(rows), list(anomalies))

    def aggregates_consistent(self, rtol: float = 1e-12) -> bool:
        """
        Whether the stored aggregates equal those recomputed from the rows.
        """
        fresh = aggregate(self.rows)
        if list(fresh.columns) != list(self.aggregates.columns) or \
                len(fresh) != len(self.aggregates):
            return False
        if fresh.empty:
            return True
        return bool(np.allclose(fresh.to_numpy(dtype=float),
                                self.aggregates.to_numpy(dtype=float),
                                rtol=rtol, atol=0.0, equal_nan=True))


def run_monte_carlo(config: SweepConfig,
                    progress: bool = True) -> SweepResult:
    """
    Runs every grid point runs_per_point times.

    Parameters:
    - config (SweepConfig): The sweep.
    - progress (bool): Show a tqdm progress bar.

    Returns:
    - SweepResult: Rows in grid order, then run order, with aggregates.
    """
    tasks = [(config, point, run_index)
             for point in grid_points(config)
             for run_index in range(config.runs_per_point)]
    logger.info("sweep of %d runs over %d grid points, %d workers",
                len(tasks), len(tasks) // config.runs_per_point,
                config.workers)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            results = list(tqdm(executor.map(_run_task, tasks),
                                total=len(tasks), disable=not progress))
    else:
        results = [_run_task(task)
                   for task in tqdm(tasks, disable=not progress)]

    rows = pd.DataFrame([row for row, _ in results], columns=CSV_COLUMNS)
    anomalies = [anomaly for _, found in results for anomaly in found]
    for anomaly in anomalies:
        logger.warning("anomalous run at %s seed %d: %s %s", anomaly.point,
                       anomaly.seed, anomaly.outcome,
                       "; ".join(anomaly.problems))
    return SweepResult.from_rows(rows, anomalies)


def emit_csv(result: SweepResult, path: os.PathLike) -> None:
    """
    Writes the raw rows: a header, then one line per run.

    Raises:
    - OSError: If the file cannot be written; the message names the path.
    """
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        result.rows.to_csv(path, columns=CSV_COLUMNS, index=False)
    except OSError as error:
        raise OSError(f"Cannot write CSV {path}: "
                      f"{error.strerror or error}") from error


def read_csv(path: os.PathLike) -> SweepResult:
    """
    Reads rows written by emit_csv and recomputes the aggregates.
    """
    try:
        rows = pd.read_csv(path, float_precision="round_trip")
    except OSError as error:
        raise OSError(f"Cannot read CSV {path}: "
                      f"{error.strerror or error}") from error
    missing = [column for column in CSV_COLUMNS if column not in rows]
    if missing:
        raise ValueError(f"CSV {path} lacks columns {missing}.")
    return SweepResult.from_rows(rows[CSV_COLUMNS])


def cycles_vs_messages(result: SweepResult) -> pd.DataFrame:
    """
    Mean cycles next to mean total messages per CR count. The two are in
    different units and are only reported side by side.
    """
    if result.rows.empty:
        return pd.DataFrame(columns=["n_cr", "cycles", "messages_total"])
    derived = with_derived(result.rows)
    return derived.groupby("n_cr", sort=True)[
        ["cycles", "messages_total"]].mean().reset_index()
