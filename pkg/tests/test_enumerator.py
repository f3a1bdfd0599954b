import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldpc_growth.enumerator import (
    CapacityError,
    FractionalWeightAssignment,
    binary_entropy,
    check_node_exponent,
    even_row_count,
    exact_average_enumerator,
    max_entropy_distribution,
    parity_configs,
    parity_polytope_margin,
    solve_dual,
    spectral_objective,
)
from ldpc_growth.protograph import BaseMatrix, augment_for_trapping

LN2 = math.log(2)


def feasible_marginals(q, rng, concentration=1.0):
    """Marginals of a random distribution on even-weight words: inside the parity polytope."""
    U = parity_configs(q, 0)
    p = rng.dirichlet(np.full(len(U), concentration))
    return p @ U


def test_spec_examples():
    assert check_node_exponent([0.3, 0.3]).value == pytest.approx(0.610864, abs=1e-6)
    assert check_node_exponent([0.5] * 3).value == pytest.approx(math.log(4), abs=1e-9)
    assert not check_node_exponent([0.2, 0.5]).feasible
    assert check_node_exponent([0.0] * 6).value == 0.0


def test_conditioning_on_fixed_edges():
    # one edge fixed at 1 turns the remaining problem into the odd polytope
    assert check_node_exponent([1.0, 0.3, 0.7]).value == pytest.approx(float(binary_entropy(0.3)))
    assert not check_node_exponent([1.0, 0.0, 0.0]).feasible
    assert check_node_exponent([1.0, 1.0, 0.0, 0.0]).value == 0.0
    assert not check_node_exponent([0.0, 0.0, 0.4]).feasible


def test_degree_cap():
    with pytest.raises(CapacityError):
        check_node_exponent([0.5] * 25)


def test_upper_bound_attained_at_half():
    for q in range(3, 9):
        assert check_node_exponent([0.5] * q).value == pytest.approx((q - 1) * LN2, abs=1e-9)


def test_polytope_margin_detects_facets():
    assert parity_polytope_margin([0.9, 0.9, 0.9])[0] < 0  # odd sum, outside
    assert parity_polytope_margin([0.5, 0.5, 0.5])[0] > 0
    assert parity_polytope_margin([0.9, 0.9, 0.9], parity=1)[0] > 0
    assert not check_node_exponent([0.9, 0.9, 0.9]).feasible


def test_dual_batched_rows_independent():
    rng = np.random.default_rng(3)
    D = np.array([feasible_marginals(5, rng) for _ in range(6)])
    vals, *_ = solve_dual(D)
    singles = [solve_dual(D[i:i + 1])[0][0] for i in range(6)]
    assert np.allclose(vals, singles, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_entropy_bounds(q, seed):
    d = feasible_marginals(q, np.random.default_rng(seed))
    a = check_node_exponent(d)
    assert a.feasible
    assert -1e-12 <= a.value <= (q - 1) * LN2 + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_primal_dual_agreement(q, seed):
    d = feasible_marginals(q, np.random.default_rng(seed), concentration=2.0)
    U, p, _ = max_entropy_distribution(d)
    assert np.allclose(p @ U, d, atol=1e-8)
    entropy = -np.sum(p * np.log(p))
    assert entropy == pytest.approx(check_node_exponent(d).value, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_pair_flip_symmetry(q, seed):
    rng = np.random.default_rng(seed)
    d = feasible_marginals(q, rng) if q > 2 else np.full(2, rng.uniform(0.01, 0.99))
    i, j = rng.choice(q, size=2, replace=False)
    e = d.copy()
    e[[i, j]] = 1 - e[[i, j]]
    assert check_node_exponent(e).value == pytest.approx(check_node_exponent(d).value, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7), st.integers(0, 2**32 - 1))
def test_concavity(q, seed):
    rng = np.random.default_rng(seed)
    d1, d2 = feasible_marginals(q, rng), feasible_marginals(q, rng)
    mid = check_node_exponent((d1 + d2) / 2).value
    assert mid >= 0.5 * (check_node_exponent(d1).value + check_node_exponent(d2).value) - 1e-9


def test_spectral_objective_examples():
    b = BaseMatrix([[3, 3]])
    assert spectral_objective(b, FractionalWeightAssignment([0.0, 0.0])).value == 0.0
    assert spectral_objective(b, FractionalWeightAssignment([0.5, 0.5])).value == pytest.approx(0.346574, abs=1e-6)
    for t in (0.1, 0.37, 0.9):
        assert spectral_objective(BaseMatrix([[2]]), FractionalWeightAssignment([t])).value == pytest.approx(0, abs=1e-12)


def test_spectral_objective_auxiliary():
    b = augment_for_trapping(BaseMatrix([[3, 3]]))
    w = FractionalWeightAssignment([0.2, 0.2], [0.0])
    plain = spectral_objective(BaseMatrix([[3, 3]]), FractionalWeightAssignment([0.2, 0.2]))
    assert spectral_objective(b, w).value == pytest.approx(plain.value, abs=1e-10)
    assert w.beta_bar == 0.0 and w.omega == pytest.approx(0.2)
    with pytest.raises(ValueError):
        spectral_objective(b, FractionalWeightAssignment([0.2, 0.2]))


def test_even_row_count_small_cases():
    # brute force over all N x q binary matrices
    import itertools

    for N, q in [(2, 3), (3, 3), (2, 4)]:
        counts = {}
        for bits in itertools.product((0, 1), repeat=N * q):
            M = np.array(bits).reshape(N, q)
            if (M.sum(axis=1) % 2 == 0).all():
                key = tuple(M.sum(axis=0))
                counts[key] = counts.get(key, 0) + 1
        for w in itertools.product(range(N + 1), repeat=q):
            assert even_row_count(N, w) == counts.get(w, 0)


def test_exact_enumerator_examples():
    two = BaseMatrix([[2]])
    for N in (1, 3, 7):
        assert all(exact_average_enumerator(two, N, [d]) == 1 for d in range(N + 1))
    b = BaseMatrix([[3, 3]])
    assert exact_average_enumerator(b, 5, [0, 0]) == 1
    assert exact_average_enumerator(b, 2, [2, 2]) == 1
    assert isinstance(exact_average_enumerator(b, 3, [1, 1]), Fraction)
    with pytest.raises(ValueError):
        exact_average_enumerator(b, 3, [4, 0])
    with pytest.raises(CapacityError):
        exact_average_enumerator(b, 65, [0, 0])


def test_finite_n_gap_shrinks():
    b = BaseMatrix([[3, 3]])
    target = spectral_objective(b, FractionalWeightAssignment([0.5, 0.5])).value
    gaps = []
    for N in (8, 16, 32, 64):
        e = exact_average_enumerator(b, N, [N // 2, N // 2])
        gaps.append(abs(math.log(e) / (2 * N) - target))
    assert all(a > b_ for a, b_ in zip(gaps, gaps[1:]))
