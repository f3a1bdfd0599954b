"""Trapping-set growth bounds of the (3,6) ensemble for a few delta values.

Usage: python scripts/fig2_trapping.py [out_dir]
"""

import sys

from ldpc_growth.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/fig2"
    sys.exit(main(["trapping", "--ensemble", "3-6", "--delta", "0,0.01,0.05", "--range", "3..18", "--out", out]))
