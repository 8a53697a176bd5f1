"""
Shared fixtures: hand-made scenarios with explicit gain tables.
"""

from typing import Optional, Sequence

import numpy as np
import pytest

from cognitiveqos.classes.scenario import CrLink, GainTable, PuLink, Scenario
from cognitiveqos.helpers.config import Mode


def build_scenario(cr_to_cr: Sequence[Sequence[float]],
                   thresholds: Sequence[float],
                   cr_to_pu: Optional[Sequence[Sequence[float]]] = None,
                   caps: Sequence[float] = (),
                   noise: float = 1.0, budget: float = 100,
                   step: float = 2, pu_floor: Optional[Sequence[float]] = None,
                   demands: Optional[Sequence[int]] = None,
                   mode: Mode = Mode.CDMA_EQUAL, frame_slots: int = 20,
                   rate_min: int = 64_000, rate_max: int = 256_000,
                   rate_step: int = 32_000) -> Scenario:
    """
    CR ids are 1..n, PU ids follow. Positions are placeholders; every gain
    comes from the arguments.
    """
    n = len(thresholds)
    demands = demands or [1] * n
    cr_links = tuple(CrLink(i + 1, (0.0, float(i)), (1.0, float(i)), budget,
                            step, thresholds[i], demands[i], rate_min,
                            rate_max, rate_step) for i in range(n))
    pu_links = tuple(PuLink(n + 1 + k, (5.0, float(k)), (6.0, float(k)),
                            cap) for k, cap in enumerate(caps))
    gains = GainTable(np.array(cr_to_cr, dtype=float),
                      np.array(cr_to_pu if cr_to_pu is not None else [],
                               dtype=float).reshape(len(caps), n),
                      np.zeros(n) if pu_floor is None else np.array(pu_floor))
    return Scenario(cr_links, pu_links, gains, noise, 128.0, mode,
                    frame_slots, seed=7)


@pytest.fixture
def make_scenario():
    return build_scenario


@pytest.fixture
def two_cr_scenario():
    # Direct gains 1, cross gains 0.1, noise 1: both CRs at 100 mW see a
    # SINR of 100 / 11 ~ 9.09.
    return build_scenario([[1.0, 0.1], [0.1, 1.0]], [5.0, 5.0])
