"""
Scenario generation and files
Date of Creation: 2026-10-17
Description: Random scenario generation with seeded placements, and the
             JSON scenario file format. A file has the sections units,
             params, cr_links, pu_links and an optional gains section; gains
             are computed from the positions when it is omitted.
"""

import logging
import os
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..classes.dcsp import to_fraction
from ..classes.scenario import CrLink, GainTable, PuLink, Scenario
from ..errors import ScenarioError
from .config import Mode, RadioParams, parse_model
from .radio import path_gain

logger = logging.getLogger(__name__)

Point = Tuple[float, float]


class UnitsSection(BaseModel):
    model_config = ConfigDict(frozen=True)

    power: str = "mW"
    rate: str = "bit/s"
    distance: str = "m"
    gain: str = "linear"


class ParamsSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Mode = Mode.CDMA_EQUAL
    noise_floor_mw: float = Field(1e-6, gt=0)
    spreading_gain: float = Field(128.0, gt=0)
    min_distance_m: float = Field(1.0, gt=0)
    frame_slots: int = Field(20, ge=1)
    seed: Optional[int] = None


class CrLinkModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(ge=1)
    tx: Point
    rx: Point
    power_budget_mw: float = Field(100.0, gt=0)
    power_step_mw: float = Field(2.0, gt=0)
    sinr_threshold: float = Field(gt=0)
    demand: int = Field(1, ge=1)
    rate_min_bps: int = Field(64_000, gt=0)
    rate_max_bps: int = Field(256_000, gt=0)
    rate_step_bps: int = Field(32_000, gt=0)


class PuLinkModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(ge=1)
    tx: Point
    rx: Point
    interference_cap_mw: float = Field(gt=0)
    tx_power_mw: float = Field(10.0, ge=0)


class GainsSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cr_to_cr: List[List[float]]
    cr_to_pu: List[List[float]] = Field(default_factory=list)
    pu_floor_mw: List[float]


class ScenarioDocument(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    units: UnitsSection = Field(default_factory=UnitsSection)
    params: ParamsSection = Field(default_factory=ParamsSection)
    cr_links: List[CrLinkModel]
    pu_links: List[PuLinkModel] = Field(default_factory=list)
    gains: Optional[GainsSection] = None


def _distance(a: Point, b: Point) -> float:
    return float(np.hypot(a[0] - b[0], a[1] - b[1]))


def gains_from_positions(cr_links: List[CrLink], pu_links: List[PuLink],
                         spreading_gain: float,
                         min_distance: float) -> GainTable:
    """
    Fills the gain table from the node positions with path_gain.
    """
    n, k = len(cr_links), len(pu_links)
    cr_to_cr = np.empty((n, n))
    cr_to_pu = np.empty((k, n))
    pu_floor = np.zeros(n)
    for i, victim in enumerate(cr_links):
        for j, aggressor in enumerate(cr_links):
            cr_to_cr[i, j] = path_gain(
                _distance(aggressor.tx_pos, victim.rx_pos), spreading_gain,
                min_distance)
        for pu in pu_links:
            pu_floor[i] += pu.tx_power * path_gain(
                _distance(pu.tx_pos, victim.rx_pos), spreading_gain,
                min_distance)
    for row, pu in enumerate(pu_links):
        for j, aggressor in enumerate(cr_links):
            cr_to_pu[row, j] = path_gain(
                _distance(aggressor.tx_pos, pu.rx_pos), spreading_gain,
                min_distance)
    return GainTable(cr_to_cr, cr_to_pu, pu_floor)


def _min_separation(cr_links: List[CrLink], pu_links: List[PuLink]) -> \
        float:
    distances = [_distance(a.tx_pos, v.rx_pos)
                 for a in cr_links for v in cr_links]
    distances += [_distance(a.tx_pos, pu.rx_pos)
                  for a in cr_links for pu in pu_links]
    distances += [_distance(pu.tx_pos, v.rx_pos)
                  for pu in pu_links for v in cr_links]
    return min(distances)


def generate_scenario(seed, n_cr: int, n_pu: int,
                      params: Optional[RadioParams] = None,
                      mode: Mode = Mode.CDMA_EQUAL) -> Scenario:
    """
    Generates a random scenario.

    CR transmitters and PU nodes are placed uniformly in the square; each
    CR receiver lies at a uniform distance in the configured pair range and
    a uniform direction from its transmitter. PU caps, CR SINR thresholds
    and demands are drawn uniformly from their configured ranges, after
    the placements, so the same seed gives the same geometry for every
    threshold.

    Parameters:
    - seed: Integer seed or numpy SeedSequence.
    - n_cr (int): Number of CR links, at least 1.
    - n_pu (int): Number of PU links.
    - params (Optional[RadioParams]): Constants, defaults if omitted.
    - mode (Mode): Access scheme recorded in the scenario.

    Returns:
    - Scenario: The scenario; CR ids are 1..n_cr and PU ids follow.

    Raises:
    - ValueError: If n_cr < 1 or n_pu < 0.
    - ScenarioError: If no placement keeps every node pair at least
        min_distance_m apart within the resample budget.
    """
    if n_cr < 1 or n_pu < 0:
        raise ValueError(f"Need n_cr >= 1 and n_pu >= 0, got {n_cr}, {n_pu}.")  # noqa
    params = params or RadioParams()
    rng = np.random.default_rng(seed)
    side = params.area_side_m

    for attempt in range(params.resample_budget):
        cr_tx = rng.uniform(0, side, size=(n_cr, 2))
        angle = rng.uniform(0, 2 * np.pi, size=n_cr)
        length = rng.uniform(params.pair_distance_min_m,
                             params.pair_distance_max_m, size=n_cr)
        cr_rx = cr_tx + np.column_stack((length * np.cos(angle),
                                         length * np.sin(angle)))
        pu_tx = rng.uniform(0, side, size=(n_pu, 2))
        pu_rx = rng.uniform(0, side, size=(n_pu, 2))

        cr_links = [CrLink(i + 1, tuple(cr_tx[i]), tuple(cr_rx[i]),
                           to_fraction(params.power_budget_mw),
                           to_fraction(params.power_step_mw), 1.0)
                    for i in range(n_cr)]
        pu_links = [PuLink(n_cr + 1 + k, tuple(pu_tx[k]), tuple(pu_rx[k]),
                           1.0) for k in range(n_pu)]
        if _min_separation(cr_links, pu_links) >= params.min_distance_m:
            break
        logger.debug("placement %d degenerate, resampling", attempt)
    else:
        raise ScenarioError(
            f"No valid placement for {n_cr} CRs and {n_pu} PUs within "
            f"{params.resample_budget} attempts.")

    spread = params.pu_cap_spread
    caps = params.pu_cap_mw * rng.uniform(1 - spread, 1 + spread, size=n_pu)
    thresholds = rng.uniform(params.sinr_threshold_min,
                             params.sinr_threshold_max, size=n_cr)
    demands = rng.integers(params.demand_min, params.demand_max + 1,
                           size=n_cr)

    cr_links = [CrLink(link.id, link.tx_pos, link.rx_pos,
                       link.power_budget, link.power_step,
                       float(thresholds[i]), int(demands[i]),
                       params.rate_min_bps, params.rate_max_bps,
                       params.rate_step_bps)
                for i, link in enumerate(cr_links)]
    pu_links = [PuLink(pu.id, pu.tx_pos, pu.rx_pos, float(caps[k]),
                       params.pu_tx_power_mw)
                for k, pu in enumerate(pu_links)]
    gains = gains_from_positions(cr_links, pu_links, params.spreading_gain,
                                 params.min_distance_m)
    return Scenario(tuple(cr_links), tuple(pu_links), gains,
                    params.noise_floor_mw, params.spreading_gain, mode,
                    params.frame_slots,
                    seed if isinstance(seed, int) else None)


def scenario_from_document(document: ScenarioDocument) -> Scenario:
    """
    Builds a Scenario from a validated file document.
    """
    params = document.params
    cr_links = [CrLink(link.id, tuple(link.tx), tuple(link.rx),
                       to_fraction(link.power_budget_mw),
                       to_fraction(link.power_step_mw), link.sinr_threshold,
                       link.demand, link.rate_min_bps, link.rate_max_bps,
                       link.rate_step_bps)
                for link in document.cr_links]
    pu_links = [PuLink(pu.id, tuple(pu.tx), tuple(pu.rx),
                       pu.interference_cap_mw, pu.tx_power_mw)
                for pu in document.pu_links]
    if document.gains is None:
        gains = gains_from_positions(cr_links, pu_links,
                                     params.spreading_gain,
                                     params.min_distance_m)
    else:
        gains = GainTable(np.array(document.gains.cr_to_cr),
                          np.array(document.gains.cr_to_pu),
                          np.array(document.gains.pu_floor_mw))
    return Scenario(tuple(cr_links), tuple(pu_links), gains,
                    params.noise_floor_mw, params.spreading_gain,
                    params.mode, params.frame_slots, params.seed)


def scenario_to_document(scenario: Scenario) -> ScenarioDocument:
    """
    Converts a Scenario to its file document, gains included.
    """
    cr_links = [CrLinkModel(
        id=link.id, tx=link.tx_pos, rx=link.rx_pos,
        power_budget_mw=float(link.power_budget),
        power_step_mw=float(link.power_step),
        sinr_threshold=link.sinr_threshold, demand=link.demand,
        rate_min_bps=link.rate_min, rate_max_bps=link.rate_max,
        rate_step_bps=link.rate_step) for link in scenario.cr_links]
    pu_links = [PuLinkModel(
        id=pu.id, tx=pu.tx_pos, rx=pu.rx_pos,
        interference_cap_mw=pu.interference_cap, tx_power_mw=pu.tx_power)
        for pu in scenario.pu_links]
    gains = GainsSection(cr_to_cr=scenario.gains.cr_to_cr.tolist(),
                         cr_to_pu=scenario.gains.cr_to_pu.tolist(),
                         pu_floor_mw=scenario.gains.pu_floor.tolist())
    params = ParamsSection(mode=scenario.mode,
                           noise_floor_mw=scenario.noise_floor,
                           spreading_gain=scenario.spreading_gain,
                           frame_slots=scenario.frame_slots,
                           seed=scenario.seed)
    return ScenarioDocument(params=params, cr_links=cr_links,
                            pu_links=pu_links, gains=gains)


def load_scenario(path: os.PathLike) -> Scenario:
    """
    Reads a scenario file.

    Raises:
    - OSError: If the file cannot be read; the message names the path.
    - ConfigError: If a field fails validation.
    - ScenarioError: If the scenario is degenerate.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as error:
        raise OSError(f"Cannot read scenario {path}: "
                      f"{error.strerror or error}") from error
    document = parse_model(ScenarioDocument, text, str(path))
    return scenario_from_document(document)


def dump_scenario(scenario: Scenario, path: os.PathLike) -> None:
    """
    Writes a scenario file.

    Raises:
    - OSError: If the file cannot be written; the message names the path.
    """
    text = scenario_to_document(scenario).model_dump_json(indent=2)
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as error:
        raise OSError(f"Cannot write scenario {path}: "
                      f"{error.strerror or error}") from error
