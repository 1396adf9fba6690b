"""Saddle solution on the square lattice: solve one cell and write the phase map.

Usage: python3 demos/saddle_phase_map.py [outdir]
"""

import sys

from equiflow.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "demo_out"
# the same run as `equiflow solve saddle_2d`, on a coarser grid
sys.exit(main(["solve", "saddle_2d", "--out", out, "--set", "domain.h=0.05"]))
