import pytest

import ldpc_growth.growth as growth
from ldpc_growth.growth import (
    GrowthRateBound,
    block_growth,
    block_growth_rate,
    free_distance_bounds,
    sweep,
    tailbiting_growth,
    terminated_growth,
)
from ldpc_growth.optimizer import OptimizationError, first_zero_crossing
from ldpc_growth.protograph import BaseMatrix, block_window_supports, registry, tailbite, terminate


@pytest.fixture(scope="module")
def conv36():
    return registry("3-6").conv


def test_block_rate_and_flag():
    assert block_growth_rate(BaseMatrix([[3, 3]])) == pytest.approx(0.023, abs=5e-4)
    g = block_growth(BaseMatrix([[2, 2]]))
    assert g.value == 0.0 and not g.asymptotically_good
    with pytest.raises(ValueError):
        block_growth_rate(BaseMatrix([[3, 3, 1]], n_aux=1))


def test_windows_match_direct_face_search(conv36):
    L = 6
    direct = block_growth_rate(terminate(conv36, L), faces=block_window_supports(2, L, range(1, L)))
    assert terminated_growth(conv36, L) == pytest.approx(direct, abs=1e-9)


def test_window_is_a_rescaled_terminated_matrix(conv36):
    # a window of w blocks inside a longer tail-biting matrix: same crossing up to the w / lam scale
    lam, w = 9, 5
    inner = first_zero_crossing(tailbite(conv36, lam), faces=block_window_supports(2, lam, [w]))
    full_uniform = first_zero_crossing(tailbite(conv36, lam)).location
    windowed = growth.crossing(terminate(conv36, w)).location * w / lam
    assert inner.location == pytest.approx(min(full_uniform, windowed), abs=2e-6)


def test_tailbiting_not_above_uniform(conv36):
    uniform = first_zero_crossing(tailbite(conv36, 6)).location
    assert tailbiting_growth(conv36, 6) <= uniform + 1e-12


def test_divisor_exact(conv36):
    for r in sweep(conv36, range(3, 7)):
        assert r.bound == r.block_growth * r.factor / 3


def test_sweep_order_and_rates(conv36):
    rows = sweep(conv36, range(3, 6))
    assert [(r.kind, r.factor) for r in rows] == [
        ("terminated", 3), ("terminated", 4), ("terminated", 5),
        ("tailbiting", 3), ("tailbiting", 4), ("tailbiting", 5),
    ]
    assert {str(r.rate) for r in rows if r.kind == "tailbiting"} == {"1/2"}
    term = [r.rate for r in rows if r.kind == "terminated"]
    assert term == sorted(term)


def test_bound_type_invariants():
    b = GrowthRateBound.from_bounds(12, 0.0861, 0.0865, 1e-3)
    assert b.coincide and b.exact_value == pytest.approx(0.0863)
    c = GrowthRateBound.from_bounds(5, 0.03, 0.09, 1e-3)
    assert not c.coincide and c.exact_value is None


def test_range_precondition(conv36):
    with pytest.raises(ValueError, match="m_s"):
        free_distance_bounds(conv36, range(2, 6))
    with pytest.raises(ValueError):
        sweep(conv36, [])


def test_failure_names_factor(conv36, monkeypatch):
    def boom(*a, **k):
        raise OptimizationError("inner maximization did not converge at s=0.1", 0.1)

    monkeypatch.setattr(growth, "first_zero_crossing", boom)
    growth.clear_cache()
    with pytest.raises(OptimizationError, match="terminated L=1") as info:
        free_distance_bounds(conv36, range(3, 5))
    assert info.value.location == 0.1
    growth.clear_cache()


def test_process_pool_matches_serial(conv36, monkeypatch):
    serial = free_distance_bounds(conv36, range(3, 5))
    growth.clear_cache()
    monkeypatch.setenv(growth.THREADS_ENV, "2")
    assert growth.worker_count() == 2
    pooled = free_distance_bounds(conv36, range(3, 5))
    assert pooled == serial


def test_worker_count_parsing(monkeypatch):
    monkeypatch.setenv(growth.THREADS_ENV, "zero")
    assert growth.worker_count() == 1
    monkeypatch.setenv(growth.THREADS_ENV, "-3")
    assert growth.worker_count() == 1
