#!/usr/bin/env python3
"""Reproduce the spin-chain benchmark grid with exact backends.

Runs all four splits (2x4, 3x4, 2x6, 2x8) with both single-site excitation
bases and prints coarse-grained versus exact energies, truncation rates and
register widths.  Equivalent to ``deepvqe table1``.

    python scripts/heisenberg_grid.py [--rows 2x4,3x4] [--output grid.csv]
"""

import sys

from deepvqe.cli import main

if __name__ == "__main__":
    sys.exit(main(["table1", *sys.argv[1:]]))
