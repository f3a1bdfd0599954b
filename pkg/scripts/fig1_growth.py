"""Free-distance growth sweep for the (3,6) ensemble: terminated and tail-biting rates plus bounds.

Usage: python scripts/fig1_growth.py [out_dir]
"""

import sys

from ldpc_growth.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/fig1"
    sys.exit(main(["growth", "--ensemble", "3-6", "--range", "3..21", "--out", out]))
