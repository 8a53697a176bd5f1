"""
Profiling function
Date of Creation: 2026-10-17
Description: Runs the protocol on a generated scenario under cProfile and
             writes the profiling data to a file.

Usage: python profiling.py <mode> <n_cr> [<seed>]
"""

import cProfile
import sys

from cognitiveqos.algorithms.qos_protocol import QosProtocol
from cognitiveqos.helpers.config import Mode, default_output_dir
from cognitiveqos.helpers.scenario_io import generate_scenario


def main() -> None:
    """
    Entry point of the profiling script.
    Parses the command line, generates the scenario and profiles one
    protocol run.
    """
    argv = sys.argv
    if len(argv) not in (3, 4):
        print("Usage: python profiling.py <cdma-eq|cdma-uneq|stdma> <n_cr> [<seed>]")  # noqa
        sys.exit(1)

    mode = Mode(argv[1].lower())
    if not argv[2].isdigit():
        raise ValueError("The number of CRs must be an integer.")
    n_cr = int(argv[2])
    seed = int(argv[3]) if len(argv) == 4 else 0

    scenario = generate_scenario(seed, n_cr, 2, mode=mode)

    def run_protocol() -> None:
        QosProtocol(scenario, seed=seed).run()

    output = default_output_dir() / "profiles" / f"{mode.value}_{n_cr}.prof"
    output.parent.mkdir(parents=True, exist_ok=True)
    cProfile.runctx("run_protocol()", globals(), locals(), str(output))
    print(f"profile written to {output}")


if __name__ == "__main__":
    main()
