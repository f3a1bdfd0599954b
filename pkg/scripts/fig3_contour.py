"""Zero contours (alpha, beta) of the (3,6) block ensemble and its convolutional version at T=12.

Usage: python scripts/fig3_contour.py [out_dir]

Takes several minutes; delta values without a certified crossing are skipped.
"""

import sys

import numpy as np

from ldpc_growth.cli import main

GRID = [0.0] + [float(x) for x in np.geomspace(1e-3, 0.35, 24)]

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/fig3"
    deltas = ",".join(repr(d) for d in GRID)
    sys.exit(main(["contour", "--ensemble", "3-6", "--T", "12", "--delta", deltas, "--out", out]))
