#!/usr/bin/env python3
"""Achievable rate vs transmit power for all six schemes.

Reproduces the headline comparison: the jointly optimized movable RIS
approaches the full-duplex relay bound as power grows, and even the
random-phase movable RIS beats the fixed RIS with optimized phases.
Writes results/sweep-power/{results.csv,results_meta.json,plot_results.py}.
"""

import sys

from movable_ris.cli import main

if __name__ == "__main__":
    argv = ["sweep-power", "--powers", "10,20,30,40"] + sys.argv[1:]
    raise SystemExit(main(argv))
