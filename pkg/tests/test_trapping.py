import csv

import numpy as np
import pytest

from conftest import CONTOUR_GRID, GOLDEN
from ldpc_growth import oracle
from ldpc_growth.growth import block_growth_rate, crossing, free_distance_bounds
from ldpc_growth.protograph import BaseMatrix, registry
from ldpc_growth.trapping import (
    ContourPoint,
    conv_ts_bounds,
    default_delta_grid,
    ts_growth_rate,
    zero_contour,
)

B36 = BaseMatrix([[3, 3]])


def test_delta_zero_is_the_distance_value():
    assert ts_growth_rate(B36, 0.0) == block_growth_rate(B36)
    assert crossing(B36, 0.0).bracket == crossing(B36).bracket


def test_monotone_in_delta():
    a0, a1, a5 = (ts_growth_rate(B36, d) for d in (0.0, 0.01, 0.05))
    assert 0 < a5 < a1 < a0


def test_census_trend_on_lifts():
    # the smallest nonempty set with b <= delta * a can only shrink as delta grows
    base = registry("3-6").block_proto
    for seed in range(3):
        code = oracle.lift(base, 4, seed=seed)
        census = [t for t in oracle.trapping_census(code, code.n) if t.a > 0]
        smallest = [min(t.a for t in census if t.b <= d * t.a) for d in (0.0, 0.5, 1.0, 2.0)]
        assert smallest == sorted(smallest, reverse=True)


def test_no_growth_is_none():
    assert ts_growth_rate(B36, 1.0) is None


def test_input_checks():
    with pytest.raises(ValueError):
        ts_growth_rate(B36, -0.1)
    with pytest.raises(ValueError):
        ts_growth_rate(BaseMatrix([[3, 3, 1]], n_aux=1), 0.1)
    with pytest.raises(ValueError):
        zero_contour(B36, [0.1, 0.05])


def test_contour_single_point():
    (p,) = zero_contour(B36, [0.0])
    assert p.beta == 0.0 and p.alpha == pytest.approx(0.023, abs=5e-4) and p.source == "block"


def test_contour_omits_uncertified():
    pts = zero_contour(B36, [0.0, 0.05, 1.0])
    assert [p.delta_ratio for p in pts] == [0.0, 0.05]


def test_beta_identity():
    p = ContourPoint.at(0.3, 0.0123)
    assert p.beta == 0.3 * 0.0123


def test_bound_gap_emits_pair():
    conv = registry("3-6").conv
    pts = zero_contour((conv, 3), [0.01])
    assert [p.source for p in pts] == ["conv-lower", "conv-upper"]
    assert pts[0].alpha < pts[1].alpha


def test_conv_delta_zero_same_as_distance():
    conv = registry("3-6").conv
    assert conv_ts_bounds(conv, 0.0, range(3, 6)) == free_distance_bounds(conv, range(3, 6))


def test_default_grid():
    g = default_delta_grid()
    assert len(g) == 41 and g[0] == 0.0
    assert g[1] == pytest.approx(1e-3) and g[-1] == pytest.approx(2.0)


def _read_contour_golden():
    with open(GOLDEN / "contour_3-6_T12.csv", newline="") as fh:
        return [(float(r["delta"]), float(r["alpha"]), r["source"]) for r in csv.DictReader(fh)]


@pytest.mark.slow
def test_contour_matches_golden(contours36):
    block, conv = contours36
    got = [(p.delta_ratio, p.alpha, p.source) for p in block + conv]
    want = _read_contour_golden()
    assert [g[2] for g in got] == [w[2] for w in want]
    assert np.allclose([g[0] for g in got], [w[0] for w in want], rtol=1e-9)
    assert np.allclose([g[1] for g in got], [w[1] for w in want], atol=1e-5)
    assert len(CONTOUR_GRID) >= 20
