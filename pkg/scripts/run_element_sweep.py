#!/usr/bin/env python3
"""Achievable rate vs RIS element count at 30 dBm.

Shows the movable-RIS curve closing the gap to the (element-count
independent) full-duplex relay bound as the reflector count grows.
Writes results/sweep-elements/.
"""

import sys

from movable_ris.cli import main

if __name__ == "__main__":
    argv = ["sweep-elements", "--elements", "16,36,64,100", "--power-dbm", "30"] + sys.argv[1:]
    raise SystemExit(main(argv))
