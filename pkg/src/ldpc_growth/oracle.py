"""Finite-N ground truth by exhaustive enumeration over permutation lifts.

Binary vectors are handled as integers whose bit ``j`` is column ``j``; a
lifted column ``v * N + i`` is copy ``i`` of base variable ``v``.  Syndromes
are packed into uint64 words so that the syndrome of every vector in a
range is one XOR table lookup.
"""

from __future__ import annotations

import csv
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .protograph import BaseMatrix

TUPLE_CAP = 10**7
VECTOR_BITS_CAP = 26
SUBSET_BUDGET = 10**7
_LOW_BITS = 16
_TABLE_CENSUS_BITS = 22

GOLDEN_HEADER = ("kind", "N", "seed", "a", "b", "count")


class BudgetError(ValueError):
    """An exhaustive search would exceed its hard budget."""


class LiftError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LiftedCode:
    base: BaseMatrix
    N: int
    edge_permutations: tuple
    H: np.ndarray

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    def __eq__(self, other):
        return (isinstance(other, LiftedCode) and self.base == other.base and self.N == other.N
                and self.edge_permutations == other.edge_permutations)

    def __hash__(self):
        return hash((self.base, self.N, self.edge_permutations))


@dataclass(frozen=True)
class TrappingCensus:
    N: int
    a: int
    b: int
    count: int


def edge_instances(base: BaseMatrix) -> list[tuple[int, int]]:
    """(check, variable) per edge instance, row-major, parallel edges repeated."""
    E = base.entries
    return [(x, y) for x in range(E.shape[0]) for y in range(E.shape[1]) for _ in range(int(E[x, y]))]


def lifted_matrix(base: BaseMatrix, N: int, permutations: Sequence[Sequence[int]]) -> np.ndarray:
    """Parity of the stacked permutation blocks; copy i of a variable meets copy perm[i] of the check."""
    edges = edge_instances(base)
    if len(permutations) != len(edges):
        raise LiftError(f"expected {len(edges)} permutations (one per edge instance), got {len(permutations)}")
    H = np.zeros((base.n_checks * N, base.n_cols * N), dtype=np.uint8)
    cols = np.arange(N)
    for (x, y), perm in zip(edges, permutations):
        perm = np.asarray(perm)
        if sorted(perm.tolist()) != list(range(N)):
            raise LiftError(f"{perm.tolist()} is not a permutation of 0..{N - 1}")
        H[x * N + perm, y * N + cols] ^= 1
    return H


def lift(base: BaseMatrix, N: int, seed: int | None = None, permutations=None) -> LiftedCode:
    if N < 1:
        raise LiftError("lift size must be positive")
    if permutations is None:
        rng = np.random.default_rng(seed)
        permutations = [rng.permutation(N) for _ in edge_instances(base)]
    perms = tuple(tuple(int(i) for i in p) for p in permutations)
    return LiftedCode(base, N, perms, lifted_matrix(base, N, perms))


def identity_lift(base: BaseMatrix, N: int) -> LiftedCode:
    return lift(base, N, permutations=[range(N)] * len(edge_instances(base)))


# ---------------------------------------------------------------------------
# packed syndromes

def _column_words(H: np.ndarray) -> np.ndarray:
    """Column syndromes packed into uint64 words, shape (n, words)."""
    m, n = H.shape
    words = max(1, -(-m // 64))
    out = np.zeros((n, words), dtype=np.uint64)
    for r in range(m):
        out[:, r // 64] |= H[r].astype(np.uint64) << np.uint64(r % 64)
    return out


def _xor_table(cols: np.ndarray) -> np.ndarray:
    """Syndrome of every vector over the given columns, indexed by the vector's bits."""
    table = np.zeros((1, cols.shape[1]), dtype=np.uint64)
    for c in cols:
        table = np.concatenate([table, table ^ c])
    return table


def _popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1).astype(np.int64)


def _check_vector_budget(n_bits: int):
    if n_bits > VECTOR_BITS_CAP:
        raise BudgetError(f"2^{n_bits} vectors exceed the 2^{VECTOR_BITS_CAP} budget; use a smaller lift")


def _syndrome_chunks(H: np.ndarray) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (offset, syndromes) covering all 2^n vectors in index order."""
    n = H.shape[1]
    _check_vector_budget(n)
    cols = _column_words(H)
    lo = min(n, _LOW_BITS)
    low = _xor_table(cols[:lo])
    high = _xor_table(cols[lo:])
    for h in range(high.shape[0]):
        yield h << lo, low ^ high[h]


def codewords(H: np.ndarray) -> Iterator[np.ndarray]:
    """Chunks of codeword indices (bit j = column j), zero codeword included."""
    for offset, syn in _syndrome_chunks(H):
        zero = ~syn.any(axis=1)
        yield offset + np.flatnonzero(zero).astype(np.int64)


def _bit_weights(indices: np.ndarray, start: int, width: int) -> np.ndarray:
    mask = np.int64((1 << width) - 1)
    return np.bitwise_count((indices >> np.int64(start)) & mask).astype(np.int64)


# ---------------------------------------------------------------------------
# ensemble average

def _weight_space(base: BaseMatrix, N: int):
    shape = (N + 1,) * base.n_cols
    n = base.n_cols * N
    idx = np.arange(1 << n, dtype=np.int64)
    flat = np.zeros(idx.shape, dtype=np.int64)
    for v in range(base.n_cols):
        flat = flat * (N + 1) + _bit_weights(idx, v * N, N)
    return shape, flat


def exhaustive_ensemble_average(base: BaseMatrix, N: int) -> dict[tuple[int, ...], Fraction]:
    """Average number of codewords per type-weight vector over every permutation tuple."""
    edges = edge_instances(base)
    n_tuples = math.factorial(N) ** len(edges)
    if n_tuples > TUPLE_CAP:
        raise BudgetError(f"{N}!^{len(edges)} = {n_tuples} permutation tuples exceed {TUPLE_CAP}; "
                          "shrink N or the base matrix")
    _check_vector_budget(base.n_cols * N)
    shape, flat = _weight_space(base, N)
    counts = np.zeros(int(np.prod(shape)), dtype=np.int64)
    perms = list(itertools.permutations(range(N)))
    for combo in itertools.product(perms, repeat=len(edges)):
        H = lifted_matrix(base, N, combo)
        syn = _xor_table(_column_words(H))
        counts += np.bincount(flat[~syn.any(axis=1)], minlength=counts.size)
    return {
        d: Fraction(int(counts[np.ravel_multi_index(d, shape)]), n_tuples)
        for d in itertools.product(range(N + 1), repeat=base.n_cols)
    }


# ---------------------------------------------------------------------------
# trapping sets

def _subset_total(n: int, a_max: int) -> int:
    return sum(math.comb(n, a) for a in range(a_max + 1))


def _census_counts_table(H: np.ndarray, a_max: int) -> Counter:
    counts: Counter = Counter()
    for offset, syn in _syndrome_chunks(H):
        a = np.bitwise_count(offset + np.arange(syn.shape[0], dtype=np.int64)).astype(np.int64)
        keep = a <= a_max
        b = _popcount(syn[keep])
        pairs, mult = np.unique(np.stack([a[keep], b]), axis=1, return_counts=True)
        for (ai, bi), c in zip(pairs.T, mult):
            counts[int(ai), int(bi)] += int(c)
    return counts


def _census_counts_subsets(H: np.ndarray, a_max: int) -> Counter:
    cols = [int("".join(map(str, H[::-1, j])), 2) if H.shape[0] else 0 for j in range(H.shape[1])]
    counts: Counter = Counter()
    for a in range(a_max + 1):
        for subset in itertools.combinations(cols, a):
            s = 0
            for c in subset:
                s ^= c
            counts[a, s.bit_count()] += 1
    return counts


def trapping_census(code: LiftedCode, a_max: int, budget: int = SUBSET_BUDGET,
                    method: str = "auto") -> list[TrappingCensus]:
    """Count variable subsets of each size a <= a_max by their number b of odd-degree checks."""
    n = code.n
    a_max = min(a_max, n)
    if a_max < 0:
        raise ValueError("a_max must be nonnegative")
    total = _subset_total(n, a_max)
    if total > budget:
        raise BudgetError(f"{total} subsets exceed the budget of {budget}")
    if method == "auto":
        method = "table" if n <= _TABLE_CENSUS_BITS else "subsets"
    if method == "table":
        counts = _census_counts_table(code.H, a_max)
    elif method == "subsets":
        counts = _census_counts_subsets(code.H, a_max)
    else:
        raise ValueError(f"unknown census method {method!r}")
    return [TrappingCensus(code.N, a, b, c) for (a, b), c in sorted(counts.items())]


def augmented_split_counts(code: LiftedCode, a_max: int | None = None) -> Counter:
    """Codewords of [H | I] counted by weight on the original and on the auxiliary columns."""
    n, m = code.n, code.m
    Haug = np.concatenate([code.H, np.eye(m, dtype=np.uint8)], axis=1)
    counts: Counter = Counter()
    for chunk in codewords(Haug):
        a = _bit_weights(chunk, 0, n)
        b = _bit_weights(chunk, n, m)
        if a_max is not None:
            a, b = a[a <= a_max], b[a <= a_max]
        pairs, mult = np.unique(np.stack([a, b]), axis=1, return_counts=True)
        for (ai, bi), c in zip(pairs.T, mult):
            counts[int(ai), int(bi)] += int(c)
    return counts


def bijection_mismatch(code: LiftedCode, a_max: int | None = None, budget: int = SUBSET_BUDGET):
    """First (a, b, census count, augmented codeword count) that disagrees, or None."""
    a_max = code.n if a_max is None else min(a_max, code.n)
    census = {(t.a, t.b): t.count for t in trapping_census(code, a_max, budget)}
    split = augmented_split_counts(code, a_max)
    for key in sorted(set(census) | set(split)):
        if census.get(key, 0) != split.get(key, 0):
            return key[0], key[1], census.get(key, 0), split.get(key, 0)
    return None


def bijection_check(code: LiftedCode, a_max: int | None = None, budget: int = SUBSET_BUDGET) -> bool:
    return bijection_mismatch(code, a_max, budget) is None


def census_marginals_hold(census: Sequence[TrappingCensus], n: int) -> bool:
    totals: Counter = Counter()
    for t in census:
        totals[t.a] += t.count
    return all(totals[a] == math.comb(n, a) for a in totals)


# ---------------------------------------------------------------------------
# distance

def weight_distribution(code: LiftedCode) -> Counter:
    counts: Counter = Counter()
    for chunk in codewords(code.H):
        w, c = np.unique(np.bitwise_count(chunk), return_counts=True)
        for wi, ci in zip(w, c):
            counts[int(wi)] += int(ci)
    return counts


def min_distance(code: LiftedCode) -> int | None:
    """Minimum nonzero codeword weight, or None for the zero code."""
    nonzero = [w for w in weight_distribution(code) if w > 0]
    return min(nonzero) if nonzero else None


# ---------------------------------------------------------------------------
# golden files

def census_rows(kind: str, code: LiftedCode, seed, census: Sequence[TrappingCensus]) -> list[tuple]:
    return [(kind, code.N, seed, t.a, t.b, t.count) for t in census]


def write_golden(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GOLDEN_HEADER)
        w.writerows(rows)


def read_golden(path) -> list[tuple]:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != GOLDEN_HEADER:
            raise ValueError(f"unexpected golden header {header}")
        return [(k, int(N), int(s), int(a), int(b), int(c)) for k, N, s, a, b, c in reader]
