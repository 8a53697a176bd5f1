"""
Radio helpers
Date of Creation: 2026-10-17
Description: Path loss, SINR and PU interference arithmetic, quantized
             power and rate domains, the rate-dependent SINR requirement
             and the proportional-fairness objective.
"""

import math
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from ..classes.dcsp import AgentId, Domain, Scalar, Unit, to_fraction
from ..classes.scenario import CrLink, Scenario
from ..errors import ScenarioError

# Relative slack on SINR comparisons, gains are floats.
SINR_TOLERANCE = 1e-9


def path_gain(distance: float, spreading_gain: float,
              min_distance: Optional[float] = None) -> float:
    """
    Deterministic path gain B^-1 d^-4.

    Parameters:
    - distance (float): Distance in meters.
    - spreading_gain (float): Spreading gain B.
    - min_distance (Optional[float]): Distances below it are clamped to it.

    Returns:
    - float: The gain.

    Raises:
    - ScenarioError: If the distance is not positive (co-located nodes).
    - ValueError: If the spreading gain is not positive.
    """
    if distance <= 0:
        raise ScenarioError(f"Co-located nodes: distance {distance} m.")
    if spreading_gain <= 0:
        raise ValueError(f"Spreading gain must be positive, got {spreading_gain}.")  # noqa
    if min_distance is not None:
        distance = max(distance, min_distance)
    return 1.0 / (spreading_gain * distance ** 4)


def sinr(i: int, powers: Sequence[float], scenario: Scenario) -> float:
    """
    SINR at the receiver of the CR in row i.

    Parameters:
    - i (int): Row of the CR in the gain table.
    - powers (Sequence[float]): Transmit power of every CR in mW.
    - scenario (Scenario): The deployment.

    Returns:
    - float: g_ii p_i / (noise + sum_j g_ij p_j + PU floor).
    """
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("Powers must be non-negative.")
    gains = scenario.gains.cr_to_cr[i]
    others = np.arange(len(p)) != i
    interference = float(np.dot(gains[others], p[others]))
    denominator = scenario.noise_floor + interference + \
        float(scenario.gains.pu_floor[i])
    return float(gains[i] * p[i]) / denominator


def sinr_vector(powers: Sequence[float], scenario: Scenario) -> np.ndarray:
    return np.array([sinr(i, powers, scenario)
                     for i in range(scenario.n_cr)])


def pu_interference(k: int, powers: Sequence[float],
                    scenario: Scenario) -> float:
    """
    Aggregate CR interference at PU k's receiver, sum_i h_ki p_i, in mW.
    """
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("Powers must be non-negative.")
    return float(np.dot(scenario.gains.cr_to_pu[k], p))


def pu_interference_exact(k: int, powers: Mapping[AgentId, Fraction],
                          scenario: Scenario) -> Fraction:
    """
    Exact rational version of pu_interference, keyed by CR id. The float
    gains are taken at their exact binary value.
    """
    row = scenario.gains.cr_to_pu[k]
    return sum((Fraction(float(row[scenario.index_of(cr_id)])) * power
                for cr_id, power in powers.items()), Fraction(0))


def pu_safe(powers: Mapping[AgentId, Fraction], scenario: Scenario) -> bool:
    """
    Whether every PU receiver stays at or below its cap, exactly.
    """
    return all(pu_interference_exact(k, powers, scenario)
               <= Fraction(pu.interference_cap)
               for k, pu in enumerate(scenario.pu_links))


def power_domain(power_budget: Scalar, step: Scalar) -> Domain:
    """
    Quantized power levels P_max, P_max - step, ... down to the smallest
    positive level, followed by the 0 mW silenced sentinel.

    Raises:
    - ValueError: Unless 0 < step <= power_budget.
    """
    budget, delta = to_fraction(power_budget), to_fraction(step)
    if not 0 < delta <= budget:
        raise ValueError(
            f"Power step {delta} mW must lie in (0, {budget}] mW.")
    count = math.ceil(budget / delta)
    levels = [budget - k * delta for k in range(count)]
    return Domain.of(levels + [Fraction(0)], Unit.MILLIWATT)


def rate_domain(rate_min: int, rate_max: int, rate_step: int) -> Domain:
    """
    Rates from R_max down in steps while at least R_min, plus R_min itself.
    """
    if not 0 < rate_min <= rate_max or rate_step <= 0:
        raise ValueError(
            f"Invalid rate range {rate_min}..{rate_max} step {rate_step}.")
    rates = set(range(rate_max, rate_min - 1, -rate_step)) | {rate_min}
    return Domain.of(rates, Unit.BITS_PER_SECOND)


def rate_sinr_requirement(rate: float, link: CrLink) -> float:
    """
    SINR needed to carry a rate: gamma_i R / R_min.

    Raises:
    - ValueError: If the rate is outside [R_min, R_max].
    """
    if not link.rate_min <= rate <= link.rate_max:
        raise ValueError(
            f"Rate {rate} bit/s outside [{link.rate_min}, {link.rate_max}] "
            f"for CR{link.id}.")
    return link.sinr_threshold * float(rate) / link.rate_min


def meets(sinr_value: float, required: float) -> bool:
    return sinr_value >= required * (1 - SINR_TOLERANCE)


def objective_log_rate(rates: Sequence[float]) -> float:
    """
    Proportional-fairness objective sum_i ln R_i.

    Raises:
    - ValueError: If some rate is not positive.
    """
    values = np.asarray(rates, dtype=float)
    if np.any(values <= 0):
        raise ValueError("Rates must be positive for the log objective.")
    return float(np.sum(np.log(values)))


def interferes(gain: float, cap: float, noise_floor: float,
               ratio: float) -> bool:
    """
    Whether an interferer at its cap power is within interference range:
    its received power reaches ratio times the noise floor.
    """
    return gain * cap >= ratio * noise_floor
