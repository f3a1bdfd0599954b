"""Regenerate the self-generated regression files under tests/golden.

Usage: python scripts/make_goldens.py [--skip-contour]

The contour file takes a few minutes (25 grid values at T=12).
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from ldpc_growth import oracle
from ldpc_growth.protograph import registry
from ldpc_growth.trapping import zero_contour

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"
CENSUS_SEEDS = (0, 1, 2, 3, 4, 7)
DISTANCE_SEEDS = (0, 1, 2)
CONTOUR_GRID = [0.0] + [float(x) for x in np.geomspace(1e-3, 0.35, 24)]


def oracle_rows():
    base = registry("3-6").block_proto
    rows = []
    for seed in CENSUS_SEEDS:
        code = oracle.lift(base, 2, seed=seed)
        rows += oracle.census_rows("census", code, seed, oracle.trapping_census(code, 4))
    for seed in DISTANCE_SEEDS:
        code = oracle.lift(base, 4, seed=seed)
        dist = oracle.weight_distribution(code)
        d = oracle.min_distance(code)
        rows.append(("min_distance", 4, seed, d, 0, dist[d]))
    return rows


def contour_rows():
    ens = registry("3-6")
    block = zero_contour(ens.block_proto, CONTOUR_GRID)
    conv = zero_contour((ens.conv, 12), CONTOUR_GRID)
    return [(repr(p.delta_ratio), repr(p.alpha), repr(p.beta), p.source) for p in block + conv]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--skip-contour", action="store_true")
    args = ap.parse_args(argv)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    oracle.write_golden(GOLDEN / "oracle_3-6.csv", oracle_rows())
    print("wrote", GOLDEN / "oracle_3-6.csv")
    if not args.skip_contour:
        with open(GOLDEN / "contour_3-6_T12.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("delta", "alpha", "beta", "source"))
            w.writerows(contour_rows())
        print("wrote", GOLDEN / "contour_3-6_T12.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
