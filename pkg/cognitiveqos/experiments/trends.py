"""
Trend checks
Date of Creation: 2026-10-17
Description: Checks the monotone trends a sweep should show, such as power
             rising with the interference threshold or cycles rising with
             the CR count, by the Spearman rank correlation of per-axis
             medians.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import spearmanr

from .monte_carlo import SweepResult, with_derived

logger = logging.getLogger(__name__)

MIN_POINTS = 3
MIN_CORRELATION = 0.8
# spearmanr can land a hair below an exact bound, e.g. 0.7999999999999999.
CORRELATION_TOLERANCE = 1e-9


class TrendStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class TrendSpec:
    """
    An expected monotone relation between a metric and a sweep axis.

    Attributes:
    - name (str): Label for reports.
    - metric (str): Row column, messages_total and messages_per_cr
        included.
    - axis (str): One of n_cr, threshold, step, delay_max.
    - direction (int): +1 for increasing, -1 for decreasing.
    - allow_flat (bool): Also pass when the medians are monotone in the
        expected direction without being strictly ranked.
    """
    name: str
    metric: str
    axis: str
    direction: int
    allow_flat: bool = False

    def __post_init__(self) -> None:
        if self.direction not in (1, -1):
            raise ValueError(f"Trend direction must be 1 or -1, got {self.direction}.")  # noqa


@dataclass(frozen=True)
class TrendCheck:
    spec: TrendSpec
    status: TrendStatus
    rho: float
    axis_values: Tuple[float, ...] = ()
    medians: Tuple[float, ...] = ()


DEFAULT_TRENDS = (
    TrendSpec("power rises with threshold", "avg_power_mw", "threshold", 1),
    TrendSpec("power falls with CR count", "avg_power_mw", "n_cr", -1),
    TrendSpec("cycles rise with CR count", "cycles", "n_cr", 1),
    TrendSpec("cycles fall with threshold", "cycles", "threshold", -1),
    TrendSpec("messages per CR fall with threshold", "messages_per_cr",
              "threshold", -1),
    TrendSpec("messages fall with step", "messages_total", "step", -1),
    TrendSpec("messages grow with delay", "messages_total", "delay_max", 1,
              allow_flat=True),
    TrendSpec("NCCC grows with delay", "nccc", "delay_max", 1,
              allow_flat=True),
)


def check_trend(result: SweepResult, spec: TrendSpec) -> TrendCheck:
    """
    Evaluates one trend on the medians of the metric per axis value,
    pooled over the other axes.

    Returns:
    - TrendCheck: SKIPPED below MIN_POINTS axis values with a finite
        median, PASS if the rank correlation has the expected sign and
        magnitude at least MIN_CORRELATION, FAIL otherwise.
    """
    if result.rows.empty:
        return TrendCheck(spec, TrendStatus.SKIPPED, float("nan"))
    rows = with_derived(result.rows)
    medians = rows.groupby(spec.axis, sort=True)[spec.metric].median()
    medians = medians.dropna()
    axis_values = tuple(float(v) for v in medians.index)
    values = tuple(float(v) for v in medians.to_numpy())
    if len(values) < MIN_POINTS:
        return TrendCheck(spec, TrendStatus.SKIPPED, float("nan"),
                          axis_values, values)

    flat = np.ptp(values) == 0
    rho = float("nan") if flat else float(spearmanr(axis_values, values)[0])
    passed = not np.isnan(rho) and spec.direction * rho >= \
        MIN_CORRELATION - CORRELATION_TOLERANCE
    if spec.allow_flat and not passed:
        steps = np.diff(values) * spec.direction
        passed = bool(np.all(steps >= 0))
    status = TrendStatus.PASS if passed else TrendStatus.FAIL
    return TrendCheck(spec, status, rho, axis_values, values)


def assert_trends(result: SweepResult,
                  specs: Sequence[TrendSpec] = DEFAULT_TRENDS) -> \
        List[TrendCheck]:
    """
    Checks every trend; failures are logged, not raised.
    """
    checks = [check_trend(result, spec) for spec in specs]
    for check in checks:
        if check.status is TrendStatus.FAIL:
            logger.warning("trend '%s' failed: rho %.3f over %s",
                           check.spec.name, check.rho, check.axis_values)
    return checks


def trend_report(checks: Sequence[TrendCheck]) -> str:
    lines = [f"{'trend':<40} {'status':<8} rho"]
    for check in checks:
        rho = "-" if np.isnan(check.rho) else f"{check.rho:+.3f}"
        lines.append(f"{check.spec.name:<40} {check.status.value:<8} {rho}")
    return "\n".join(lines)
