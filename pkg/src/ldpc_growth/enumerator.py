"""Asymptotic and exact ensemble-average weight enumerators of protographs.

All exponents are natural-log quantities (nats per transmitted symbol).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

import numpy as np

from .protograph import BaseMatrix

MINUS_INFINITY = float("-inf")

DEGREE_CAP = 24
LIFT_CAP = 64
# two interior marginals of a degree-2 check must agree to this precision
EQUALITY_TOL = 1e-9
MULTIPLIER_GUARD = 1e6


class CapacityError(ValueError):
    """A problem exceeds an explicit enumeration cap."""


class NumericalError(ArithmeticError):
    def __init__(self, message: str, gradient_norm: float = float("nan")):
        super().__init__(message)
        self.gradient_norm = gradient_norm


@dataclass(frozen=True)
class ExponentValue:
    value: float
    feasible: bool

    @classmethod
    def infeasible(cls) -> "ExponentValue":
        return cls(MINUS_INFINITY, False)

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class CheckLocalProblem:
    """Edge marginals of one check node; parallel edges repeat their variable's weight."""

    marginals: tuple

    def __post_init__(self):
        m = tuple(float(x) for x in self.marginals)
        if not m:
            raise ValueError("a check needs at least one edge")
        if any(not 0.0 <= x <= 1.0 for x in m):
            raise ValueError(f"marginals must lie in [0, 1]: {m}")
        object.__setattr__(self, "marginals", m)

    @property
    def degree(self) -> int:
        return len(self.marginals)


@dataclass(frozen=True, eq=False)
class FractionalWeightAssignment:
    """Per-node normalized weights; both averages are taken over the original variable count."""

    original: np.ndarray
    auxiliary: np.ndarray | None = None

    def __post_init__(self):
        orig = np.asarray(self.original, dtype=float)
        object.__setattr__(self, "original", orig)
        if self.auxiliary is not None:
            object.__setattr__(self, "auxiliary", np.asarray(self.auxiliary, dtype=float))
        for arr in (orig, self.auxiliary):
            if arr is not None and ((arr < 0).any() or (arr > 1).any()):
                raise ValueError("weights must lie in [0, 1]")

    @property
    def omega(self) -> float:
        return float(self.original.mean())

    @property
    def beta_bar(self) -> float:
        if self.auxiliary is None:
            return 0.0
        return float(self.auxiliary.sum() / self.original.size)

    def columns(self) -> np.ndarray:
        if self.auxiliary is None:
            return self.original
        return np.concatenate([self.original, self.auxiliary])

    @classmethod
    def from_columns(cls, d, b: BaseMatrix) -> "FractionalWeightAssignment":
        d = np.asarray(d, dtype=float)
        if b.augmented:
            return cls(d[:b.n_vars], d[b.n_vars:])
        return cls(d)


def binary_entropy(x):
    """Natural-log binary entropy, elementwise; H(0) = H(1) = 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log(x) - (1 - x) * np.log1p(-x)
    return np.where((x <= 0) | (x >= 1), 0.0, h)


@lru_cache(maxsize=None)
def parity_configs(q: int, parity: int = 0) -> np.ndarray:
    """All length-q binary vectors of the given weight parity, one per row."""
    if q > DEGREE_CAP:
        raise CapacityError(f"check degree {q} exceeds the enumeration cap {DEGREE_CAP}")
    grid = np.array(list(itertools.product((0.0, 1.0), repeat=q)))
    out = grid[grid.sum(axis=1) % 2 == parity]
    out.setflags(write=False)
    return out


def parity_polytope_margin(D, parity: int = 0) -> np.ndarray:
    """Slack of the most violated facet of the (even or odd) parity polytope.

    Positive means strictly inside every facet ``sum_S d - sum_notS d <= |S| - 1``
    (|S| odd for the even polytope).  Box constraints are not included.
    """
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if parity:
        D = D.copy()
        D[:, 0] = 1.0 - D[:, 0]
    S = D > 0.5
    even = S.sum(axis=1) % 2 == 0
    closest = np.argmin(np.abs(D - 0.5), axis=1)
    rows = np.flatnonzero(even)
    S[rows, closest[rows]] = ~S[rows, closest[rows]]
    lhs = np.where(S, D, -D).sum(axis=1)
    return (S.sum(axis=1) - 1) - lhs


def _log_partition(lam, U):
    s = lam @ U.T
    top = s.max(axis=1, keepdims=True)
    e = np.exp(s - top)
    z = e.sum(axis=1, keepdims=True)
    return (top + np.log(z))[:, 0], e / z


def solve_dual(D, parity: int = 0, tol: float = 1e-10, max_iter: int = 200):
    """Batched Newton solve of the max-entropy dual for interior marginals.

    ``D`` has one row per problem.  Returns ``(values, multipliers, covariance,
    feasible)``; infeasible rows (multipliers diverging past the guard) carry
    value -inf.  Raises :class:`NumericalError` if a feasible row does not reach
    gradient norm ``tol`` within ``max_iter`` iterations.
    """
    D = np.atleast_2d(np.asarray(D, dtype=float))
    m, q = D.shape
    U = parity_configs(q, parity)
    lam = np.log(D / (1.0 - D))
    if parity:
        lam[:, 0] = -lam[:, 0]
    feasible = np.ones(m, dtype=bool)

    # tiny marginals need a proportionally tight match
    thresh = tol * np.minimum(1.0, 10.0 * np.minimum(D, 1.0 - D))
    logz, p = _log_partition(lam, U)
    f = logz - np.sum(lam * D, axis=1)
    for _ in range(max_iter):
        mu = p @ U
        g = mu - D
        active = feasible & (np.abs(g) > thresh).any(axis=1)
        if not active.any():
            break
        cov = np.einsum("mk,ki,kj->mij", p, U, U) - mu[:, :, None] * mu[:, None, :]
        step = np.zeros_like(lam)
        try:
            step[active] = np.linalg.solve(cov[active], g[active][:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step[active] = (np.linalg.pinv(cov[active]) @ g[active][:, :, None])[:, :, 0]
        slope = np.sum(g * step, axis=1)
        t = np.ones(m)
        pending = active.copy()
        new_lam, new_f, new_p = lam.copy(), f.copy(), p.copy()
        for _ in range(60):
            cand = lam - t[:, None] * step
            lz, pc = _log_partition(cand, U)
            fc = lz - np.sum(cand * D, axis=1)
            roundoff = np.abs(fc - f) <= 1e-14 * (1.0 + np.abs(f))
            ok = pending & ((fc <= f - 1e-4 * t * slope) | roundoff)
            new_lam[ok], new_f[ok], new_p[ok] = cand[ok], fc[ok], pc[ok]
            pending &= ~ok
            if not pending.any():
                break
            t = np.where(pending, 0.5 * t, t)
        lam, f, p = new_lam, new_f, new_p
        diverged = np.linalg.norm(lam, axis=1) > MULTIPLIER_GUARD
        feasible &= ~diverged
    else:
        mu = p @ U
        gnorm = np.max(np.abs(mu - D), axis=1)
        bad = feasible & (np.abs(mu - D) > thresh).any(axis=1)
        if bad.any():
            raise NumericalError(
                f"max-entropy dual did not converge in {max_iter} iterations",
                float(gnorm[bad].max()),
            )
    mu = p @ U
    cov = np.einsum("mk,ki,kj->mij", p, U, U) - mu[:, :, None] * mu[:, None, :]
    f = np.where(feasible, f, MINUS_INFINITY)
    return f, lam, cov, feasible


def _condition(marginals: Sequence[float]):
    """Drop edges fixed at 0 or 1; returns (interior marginals, parity of the rest)."""
    d = np.asarray(marginals, dtype=float)
    ones = int(np.sum(d >= 1.0))
    interior = d[(d > 0.0) & (d < 1.0)]
    return interior, ones % 2


def check_node_exponent(p: CheckLocalProblem | Sequence[float], tol: float = 1e-10,
                        max_iter: int = 200) -> ExponentValue:
    """Max entropy (nats) over even-weight edge configurations with the given marginals."""
    if not isinstance(p, CheckLocalProblem):
        p = CheckLocalProblem(tuple(p))
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.degree > DEGREE_CAP:
        raise CapacityError(f"check degree {p.degree} exceeds the enumeration cap {DEGREE_CAP}")
    d, parity = _condition(p.marginals)
    q = d.size
    if q == 0:
        return ExponentValue(0.0, True) if parity == 0 else ExponentValue.infeasible()
    if q == 1:
        return ExponentValue.infeasible()
    if q == 2:
        gap = abs(d[0] - d[1]) if parity == 0 else abs(d[0] + d[1] - 1.0)
        if gap > EQUALITY_TOL:
            return ExponentValue.infeasible()
        return ExponentValue(float(binary_entropy(d[0])), True)
    if parity_polytope_margin(d, parity)[0] <= 0:
        return ExponentValue.infeasible()
    val, _, _, feasible = solve_dual(d[None, :], parity, tol, max_iter)
    if not feasible[0]:
        return ExponentValue.infeasible()
    return ExponentValue(float(val[0]), True)


def max_entropy_distribution(marginals: Sequence[float], tol: float = 1e-10):
    """Maximizing distribution over even-weight configurations, with its dual multipliers.

    Only interior marginals are supported.  Returns ``(configs, probs, multipliers)``.
    """
    d = np.asarray(marginals, dtype=float)
    if ((d <= 0) | (d >= 1)).any() or d.size < 3:
        raise ValueError("need at least three interior marginals")
    _, lam, _, feasible = solve_dual(d[None, :], 0, tol)
    if not feasible[0]:
        raise ValueError("marginals lie outside the even parity polytope")
    U = parity_configs(d.size, 0)
    _, probs = _log_partition(lam, U)
    return U, probs[0], lam[0]


def check_edges(b: BaseMatrix) -> list[np.ndarray]:
    """Column index of every edge instance, per check (parallel edges repeated)."""
    cols = np.arange(b.n_cols)
    return [np.repeat(cols, row) for row in b.entries]


def spectral_objective(b: BaseMatrix, w: FractionalWeightAssignment, tol: float = 1e-10) -> ExponentValue:
    """Exponent of the ensemble-average enumerator at the assignment ``w``.

    ``(1/n_vars) [sum_c a_c - sum_v (q_v - 1) H(delta_v)]``; auxiliary columns
    have degree one and carry no entropy penalty.
    """
    if b.augmented != (w.auxiliary is not None):
        raise ValueError("auxiliary weights must be given iff the matrix is augmented")
    d = w.columns()
    if d.size != b.n_cols:
        raise ValueError(f"expected {b.n_cols} weights, got {d.size}")
    total = 0.0
    for edges in check_edges(b):
        a = check_node_exponent(d[edges], tol)
        if not a.feasible:
            return ExponentValue.infeasible()
        total += a.value
    qv = b.var_degrees[:b.n_vars]
    total -= float(np.sum((qv - 1) * binary_entropy(d[:b.n_vars])))
    return ExponentValue(total / b.n_vars, True)


# ---------------------------------------------------------------------------
# exact finite-N enumerator

def krawtchouk(N: int, d: int, k: int) -> int:
    """sum_j (-1)^j C(k, j) C(N - k, d - j)."""
    return sum((-1) ** j * comb(k, j) * comb(N - k, d - j) for j in range(min(k, d) + 1))


def even_row_count(N: int, col_weights: Sequence[int]) -> int:
    """Number of N x q binary matrices with the given column sums and even rows.

    Equivalently the coefficient of prod x_i^{d_i} in (sum over even u of prod x_i^{u_i})^N.
    """
    total = 0
    for k in range(N + 1):
        term = comb(N, k)
        for d in col_weights:
            term *= krawtchouk(N, d, k)
            if term == 0:
                break
        total += term
    count, rem = divmod(total, 2 ** N)
    assert rem == 0
    return count


def exact_average_enumerator(b: BaseMatrix, N: int, d: Sequence[int], cap: int = LIFT_CAP) -> Fraction:
    """Average number of codewords with per-column weights ``d`` over all N-fold lifts."""
    if N < 1:
        raise ValueError("lift size must be positive")
    if N > cap:
        raise CapacityError(f"lift size {N} exceeds the cap {cap}")
    d = [int(x) for x in d]
    if len(d) != b.n_cols:
        raise ValueError(f"expected {b.n_cols} weights, got {len(d)}")
    if any(not 0 <= x <= N for x in d):
        raise ValueError(f"weights must lie in [0, {N}]")
    result = Fraction(1)
    for edges in check_edges(b):
        count = even_row_count(N, [d[e] for e in edges])
        if count == 0:
            return Fraction(0)
        result *= count
    for v, qv in enumerate(b.var_degrees):
        result *= Fraction(comb(N, d[v])) ** (1 - int(qv))
    return result
