"""
Exceptions raised by the package. All of them are ValueErrors, so callers
that only care about bad input can catch ValueError.
"""


class ScenarioError(ValueError):
    """
    Raised for invalid or degenerate scenarios: co-located nodes,
    non-positive gains or an exhausted placement resample budget.
    """


class ConfigError(ValueError):
    """
    Raised when a configuration or scenario file fails validation. The
    message names the failing field path.
    """


class InfeasibleSchedule(ValueError):
    """
    Raised when the slots requested in one frame exceed the frame length.

    Attributes:
    - deficit (int): Number of slots missing from the frame.
    """

    def __init__(self, deficit: int, requested: int, frame_slots: int) -> \
            None:
        self.deficit = deficit
        self.requested = requested
        self.frame_slots = frame_slots
        super().__init__(
            f"Frame overflow: {requested} slots requested but the frame "
            f"holds {frame_slots} (deficit {deficit}).")
