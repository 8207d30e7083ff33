#!/usr/bin/env python3
"""
Experiment runner
Runs one pathSystems experiment and exits with its verdict:
0 passed, 1 invariant violated, 2 bad input

    ./run_experiments.py converge-log --t 1 --levels 10 --format csv
    ./run_experiments.py cocycle --demo ramp --out ramp.json
"""

import sys

from pathSystems.cli import main

if __name__ == "__main__":
    sys.exit(main())
