#!/usr/bin/env python3
"""Fixed vs movable RIS across three UE positions at 30 dBm.

Produces the grouped-bar comparison plus the scatter of optimized platform
positions. Writes results/ue-scenarios/.
"""

import sys

from movable_ris.cli import main

if __name__ == "__main__":
    argv = [
        "ue-scenarios",
        "--power-dbm", "30",
        "--baselines", "fixed_ris_opt_phase,movable_ris_joint",
    ] + sys.argv[1:]
    raise SystemExit(main(argv))
