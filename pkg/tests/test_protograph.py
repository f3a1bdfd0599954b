from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldpc_growth.protograph import (
    BaseMatrix,
    ConvolutionalProtograph,
    FormatError,
    augment_for_trapping,
    available_ensembles,
    block_window_supports,
    design_rate,
    format_protograph,
    parse_matrix_literal,
    parse_protograph,
    registry,
    tailbite,
    terminate,
)


@pytest.fixture
def conv36():
    return registry("3-6").conv


def test_terminate_band(conv36):
    t = terminate(conv36, 3)
    assert t.tolist() == [
        [1, 1, 0, 0, 0, 0],
        [1, 1, 1, 1, 0, 0],
        [1, 1, 1, 1, 1, 1],
        [0, 0, 1, 1, 1, 1],
        [0, 0, 0, 0, 1, 1],
    ]
    assert terminate(conv36, 1).tolist() == [[1, 1], [1, 1], [1, 1]]


def test_tailbite_shapes(conv36):
    t3 = tailbite(conv36, 3)
    assert t3.tolist() == [[1] * 6] * 3
    t4 = tailbite(conv36, 4)
    assert t4.entries.shape == (4, 8)
    for r in range(4):
        blocks = t4.entries[r].reshape(4, 2).sum(axis=1)
        assert (blocks == 0).sum() == 1
    with pytest.raises(ValueError, match="3"):
        tailbite(conv36, 2)


def test_design_rates(conv36):
    assert design_rate(terminate(conv36, 3)) == Fraction(1, 6)
    assert design_rate(terminate(conv36, 21)) == Fraction(19, 42)
    assert design_rate(tailbite(conv36, 12)) == Fraction(1, 2)
    rates = [design_rate(terminate(conv36, L)) for L in range(1, 40)]
    assert all(a < b for a, b in zip(rates, rates[1:]))
    assert rates[-1] < Fraction(1, 2)


def test_augment():
    a = augment_for_trapping(BaseMatrix([[3, 3]]))
    assert a.tolist() == [[3, 3, 1]]
    assert a.n_vars == 2 and a.n_aux == 1 and a.augmented
    with pytest.raises(ValueError):
        augment_for_trapping(a)


def test_augment_terminated(conv36):
    t = terminate(conv36, 3)
    a = augment_for_trapping(t)
    assert a.entries.shape == (5, 11)
    assert (a.entries[:, :6] == t.entries).all()
    assert (a.entries[:, 6:] == np.eye(5, dtype=int)).all()


def test_registry():
    assert available_ensembles() == ["3-6", "3-9", "4-8"]
    e = registry("3-6")
    assert e.block_proto.tolist() == [[3, 3]]
    assert e.block_proto.var_degrees.tolist() == [3, 3]
    assert e.block_proto.check_degrees.tolist() == [6]
    e39 = registry("3-9")
    assert e39.block_proto.tolist() == [[3, 3, 3]]
    assert design_rate(e39.block_proto) == Fraction(2, 3)
    assert registry("4-8").conv.memory == 3
    with pytest.raises(KeyError, match="3-6"):
        registry("5-10")


def test_invalid_matrices():
    with pytest.raises(ValueError):
        BaseMatrix([[1, 0]])
    with pytest.raises(ValueError):
        BaseMatrix([[1], [0]])
    with pytest.raises(ValueError):
        BaseMatrix([[-1]])


def test_roundtrip_text(conv36):
    text = format_protograph(conv36)
    assert parse_protograph(text) == conv36
    b = BaseMatrix([[1, 2], [0, 3]])
    assert parse_protograph(format_protograph(b)) == b


def test_parse_comments_and_errors():
    assert parse_protograph("# block\nB 1 2\n3 3\n") == BaseMatrix([[3, 3]])
    for bad in ["B 1 2\n3 x\n", "B 2 2\n1 1\n", "Q 1 1\n1\n", "B 1 2\n3 3 3\n"]:
        with pytest.raises(FormatError):
            parse_protograph(bad)


def test_matrix_literal():
    assert parse_matrix_literal("[[1,1],[1,1]]").tolist() == [[1, 1], [1, 1]]
    for bad in ["[[1,1],[1]]", "[1,2]", "[[1.5]]", "nope"]:
        with pytest.raises(FormatError):
            parse_matrix_literal(bad)


def test_window_supports():
    assert block_window_supports(2, 3, [1, 2, 4]) == [(0, 1), (0, 1, 2, 3)]


convs = st.builds(
    lambda bc, bv, ms, seed: _random_conv(bc, bv, ms, seed),
    st.integers(1, 2), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6),
)


def _random_conv(bc, bv, ms, seed):
    rng = np.random.default_rng(seed)
    comps = [rng.integers(0, 2, size=(bc, bv)) for _ in range(ms + 1)]
    comps[0][0, 0] = comps[-1][0, 0] = 1
    # every variable and check needs at least one edge somewhere
    for r, c in zip(*np.nonzero(sum(comps) == 0)):
        comps[1][r, c] = 1
    return ConvolutionalProtograph(tuple(comps))


@settings(max_examples=40, deadline=None)
@given(convs, st.integers(1, 8))
def test_termination_keeps_degrees(conv, L):
    s = conv.block_sum()
    t = terminate(conv, L)
    assert (t.var_degrees == np.tile(s.var_degrees, L)).all()
    if L >= conv.memory + 1:
        tb = tailbite(conv, L)
        assert (tb.var_degrees == np.tile(s.var_degrees, L)).all()
        assert (tb.check_degrees == np.tile(s.check_degrees, L)).all()
        assert design_rate(tb) == 1 - Fraction(conv.b_checks, conv.b_vars)
