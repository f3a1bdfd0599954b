"""Constrained maximization of the spectral shape and its first zero crossing."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .enumerator import (
    MINUS_INFINITY,
    CapacityError,
    FractionalWeightAssignment,
    binary_entropy,
    check_edges,
    parity_polytope_margin,
    solve_dual,
)
from .protograph import BaseMatrix

EPSILON = 1e-4
GEOMETRIC_POINTS = 64
GEOMETRIC_END = 0.02
S_MAX = 0.5
# weights below this are treated as exactly zero (the iterate has reached a face)
PIN_EPS = 1e-12
# warm starts are floored here so weights on a previous face may regrow
WARM_FLOOR = 1e-9
LP_SUBSET_CAP = 12


class OptimizationError(ArithmeticError):
    def __init__(self, message: str, location: float | None = None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class ShapeQuery:
    matrix: BaseMatrix
    target_avg: float
    target_aux_avg: float | None = None
    restarts: int = 1
    seed: int = 0
    tol: float = 1e-9
    start: np.ndarray | None = field(default=None, compare=False)
    faces: tuple = ()

    def __post_init__(self):
        b = self.matrix
        if not 0.0 <= self.target_avg <= 1.0:
            raise ValueError(f"target average {self.target_avg} outside [0, 1]")
        if b.augmented != (self.target_aux_avg is not None):
            raise ValueError("auxiliary target is required iff the matrix is augmented")
        if self.target_aux_avg is not None:
            if self.target_aux_avg < 0:
                raise ValueError("auxiliary target must be nonnegative")
            if self.target_aux_avg > b.n_checks / b.n_vars + 1e-12:
                raise ValueError("auxiliary target exceeds n_checks / n_vars")
        if self.restarts < 1:
            raise ValueError("restarts must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True, eq=False)
class ShapeValue:
    value: float
    argmax: FractionalWeightAssignment
    converged: bool
    restarts_used: int


@dataclass(frozen=True)
class ZeroCrossing:
    location: float | None
    bracket: tuple
    certified_negative_on: float | None


@dataclass(frozen=True)
class Ray:
    """Direction s -> (omega, beta_bar) = (s, ratio * s); ``ratio=None`` is the distance ray."""

    aux_ratio: float | None = None

    def __post_init__(self):
        if self.aux_ratio is not None and self.aux_ratio < 0:
            raise ValueError("trapping-set ratio must be nonnegative")

    def point(self, s: float):
        return s, (None if self.aux_ratio is None else self.aux_ratio * s)


DISTANCE = Ray()


# ---------------------------------------------------------------------------
# reduced problem on equivalence classes of columns

class _Structure:
    """Objective restricted to unpinned columns, with forced equalities merged.

    A check left with a single unpinned edge forces that column to zero; a
    check with two edges on distinct columns forces them equal.  Both rules are
    applied to a fixed point.
    """

    def __init__(self, b: BaseMatrix, pinned):
        self.b = b
        n = b.n_cols
        pinned = set(pinned)
        edges = check_edges(b)
        while True:
            parent = list(range(n))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            changed = False
            for e in edges:
                live = [c for c in e if c not in pinned]
                if len(live) == 1:
                    pinned.add(live[0])
                    changed = True
                elif len(live) == 2 and live[0] != live[1]:
                    parent[find(live[0])] = find(live[1])
            roots = {find(c) for c in pinned}
            for c in range(n):
                if c not in pinned and find(c) in roots:
                    pinned.add(c)
                    changed = True
            if not changed:
                break
        self.pinned = frozenset(pinned)
        live_cols = [c for c in range(n) if c not in pinned]
        root_ids: dict[int, int] = {}
        cls = np.full(n, -1)
        for c in live_cols:
            cls[c] = root_ids.setdefault(find(c), len(root_ids))
        self.cls = cls
        K = self.K = len(root_ids)
        is_aux = np.arange(n) >= b.n_vars
        self.orig_count = np.bincount(cls[(cls >= 0) & ~is_aux], minlength=K).astype(float)
        self.aux_count = np.bincount(cls[(cls >= 0) & is_aux], minlength=K).astype(float)
        coef = np.zeros(K)
        qv = b.var_degrees
        for c in live_cols:
            if not is_aux[c]:
                coef[cls[c]] += qv[c] - 1
        groups: dict[int, list] = {}
        for e in edges:
            live = [int(cls[c]) for c in e if c not in pinned]
            if len(live) == 2:
                coef[live[0]] -= 1  # a degree-2 check contributes exactly H(y)
            elif len(live) >= 3:
                groups.setdefault(len(live), []).append(live)
        self.coef = coef
        self.groups = {q: np.array(g) for q, g in sorted(groups.items())}

    # -- conversions
    def to_columns(self, y):
        d = np.zeros(self.b.n_cols)
        live = self.cls >= 0
        d[live] = y[self.cls[live]]
        return d

    def from_columns(self, d):
        live = self.cls >= 0
        sums = np.bincount(self.cls[live], weights=d[live], minlength=self.K)
        return sums / np.maximum(self.orig_count + self.aux_count, 1)

    # -- objective
    def value(self, y, tol=1e-10):
        return self._evaluate(y, tol, derivatives=False)[0]

    def evaluate(self, y, tol=1e-10):
        return self._evaluate(y, tol, derivatives=True)

    def _evaluate(self, y, tol, derivatives):
        n = self.b.n_vars
        K = self.K
        if K == 0:
            return 0.0, np.zeros(0), np.zeros((0, 0))
        if (y <= 0).any() or (y >= 1).any():
            return MINUS_INFINITY, None, None
        val = -float(np.sum(self.coef * binary_entropy(y)))
        if derivatives:
            grad = -self.coef * np.log((1 - y) / y)
            hess = np.diag(self.coef / (y * (1 - y)))
        for q, idx in self.groups.items():
            D = y[idx]
            if (parity_polytope_margin(D) <= 0).any():
                return MINUS_INFINITY, None, None
            f, lam, cov, feasible = solve_dual(D, 0, tol)
            if not feasible.all():
                return MINUS_INFINITY, None, None
            val += float(f.sum())
            if derivatives:
                np.add.at(grad, idx, -lam)
                inv = -np.linalg.inv(cov)
                E = np.zeros((idx.shape[0], q, K))
                E[np.arange(idx.shape[0])[:, None], np.arange(q)[None, :], idx] = 1.0
                hess += np.einsum("mak,mab,mbl->kl", E, inv, E)
        if not derivatives:
            return val / n, None, None
        return val / n, grad / n, hess / n

    # -- constraints
    def constraints(self, omega, beta):
        rows, rhs = [], []
        n = self.b.n_vars
        if self.orig_count.any() or omega > 0:
            rows.append(self.orig_count)
            rhs.append(n * omega)
        if beta is not None and (self.aux_count.any() or beta > 0):
            rows.append(self.aux_count)
            rhs.append(n * beta)
        if not rows:
            return np.zeros((0, self.K)), np.zeros(0)
        return np.array(rows), np.array(rhs)

    def odd_subset_rows(self):
        """Facet rows of every check's parity polytope in class coordinates."""
        rows, rhs = [], []
        for q, idx in self.groups.items():
            if q > LP_SUBSET_CAP:
                raise CapacityError(f"phase-1 start needs all odd subsets of a degree-{q} check")
            for size in range(1, q + 1, 2):
                for S in itertools.combinations(range(q), size):
                    sign = -np.ones(q)
                    sign[list(S)] = 1.0
                    for row in idx:
                        coef = np.zeros(self.K)
                        np.add.at(coef, row, sign)
                        rows.append(coef)
                        rhs.append(size - 1)
        if not rows:
            return np.zeros((0, self.K)), np.zeros(0)
        A = np.array(rows)
        A, keep = np.unique(np.column_stack([A, rhs]), axis=0, return_index=True)
        return A[:, :-1], A[:, -1]


def _nullspace(A, K):
    if A.shape[0] == 0 or K == 0:
        return np.eye(K)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max())))
    return vt[rank:].T


def _project(y, A, rhs):
    if A.shape[0] == 0:
        return y
    corr, *_ = np.linalg.lstsq(A, A @ y - rhs, rcond=None)
    return y - corr


def _interior_point(struct: _Structure, A, rhs):
    """Point of the slice maximizing its slack to the box and every parity facet."""
    K = struct.K
    P, prhs = struct.odd_subset_rows()
    # variables (y, t); maximize t
    c = np.zeros(K + 1)
    c[-1] = -1.0
    ub_rows = [np.hstack([P, np.ones((P.shape[0], 1))])] if P.size else []
    ub_rhs = [prhs] if P.size else []
    eye = np.eye(K)
    ub_rows += [np.hstack([-eye, np.ones((K, 1))]), np.hstack([eye, np.ones((K, 1))])]
    ub_rhs += [np.zeros(K), np.ones(K)]
    res = linprog(
        c,
        A_ub=np.vstack(ub_rows),
        b_ub=np.concatenate(ub_rhs),
        A_eq=np.hstack([A, np.zeros((A.shape[0], 1))]) if A.shape[0] else None,
        b_eq=rhs if A.shape[0] else None,
        bounds=[(0, 1)] * K + [(0, 0.5)],
        method="highs",
    )
    if res.status != 0 or res.x[-1] <= 1e-10:
        return None
    return res.x[:K]


def _strictly_feasible(struct, y, A, rhs):
    if (y <= 0).any() or (y >= 1).any():
        return False
    if A.shape[0] and np.abs(A @ y - rhs).max() > 1e-9 * max(1.0, np.abs(rhs).max()):
        return False
    return all((parity_polytope_margin(y[idx]) > 0).all() for idx in struct.groups.values())


def _blend(struct, anchor, target, A, rhs):
    """Furthest point from ``anchor`` towards ``target`` that stays strictly feasible."""
    if _strictly_feasible(struct, target, A, rhs):
        return target
    lo, hi = 0.0, 1.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _strictly_feasible(struct, anchor + mid * (target - anchor), A, rhs):
            lo = mid
        else:
            hi = mid
    return anchor + 0.5 * lo * (target - anchor)


@dataclass
class _Run:
    value: float
    d: np.ndarray
    converged: bool


class _Ascent:
    """Safeguarded Newton ascent on the affine slice, pinning classes that reach zero."""

    def __init__(self, b: BaseMatrix, omega, beta, tol, max_iter=200):
        self.b, self.omega, self.beta = b, omega, beta
        self.tol = tol
        self.dec_tol = 1e-3 * tol
        self.max_iter = max_iter
        base = set()
        if omega == 0:
            base |= set(range(b.n_vars))
        if beta is not None and beta == 0:
            base |= set(range(b.n_vars, b.n_cols))
        self.base_pins = frozenset(base)
        self.root = _Structure(b, base)

    def _setup(self, struct):
        A, rhs = struct.constraints(self.omega, self.beta)
        return A, rhs, _nullspace(A, struct.K)

    def _consistent(self, struct, A, rhs):
        if struct.K == 0 or A.shape[0] == 0:
            return np.allclose(rhs, 0.0)
        sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        return np.allclose(A @ sol, rhs, atol=1e-12)

    def start_point(self, struct, d0=None):
        """Strictly feasible start in class coordinates, or None if the slice has no interior."""
        A, rhs, _ = self._setup(struct)
        if struct.K == 0 or not self._consistent(struct, A, rhs):
            return None
        if d0 is None:
            b = self.b
            d0 = np.full(b.n_cols, self.omega)
            if b.augmented:
                d0[b.n_vars:] = self.beta * b.n_vars / b.n_checks
        y = _project(struct.from_columns(d0), A, rhs)
        if _strictly_feasible(struct, y, A, rhs):
            return y
        centre = _interior_point(struct, A, rhs)
        if centre is None:
            return None
        return _blend(struct, centre, y, A, rhs)

    def run(self, d0=None, faces_pins=frozenset()) -> _Run:
        b = self.b
        struct = self.root if not faces_pins else _Structure(b, self.base_pins | faces_pins)
        A, rhs, Z = self._setup(struct)
        if struct.K == 0:
            ok = self._consistent(struct, A, rhs)
            return _Run(0.0 if ok else MINUS_INFINITY, np.zeros(b.n_cols), True)
        y = self.start_point(struct, d0)
        if y is None:
            return _Run(MINUS_INFINITY, np.zeros(b.n_cols), True)
        f, g, H = struct.evaluate(y)
        if not np.isfinite(f):
            return _Run(MINUS_INFINITY, np.zeros(b.n_cols), False)
        converged = False
        for _ in range(self.max_iter):
            if Z.shape[1] == 0:
                converged = True
                break
            rg = Z.T @ g
            w, V = np.linalg.eigh(Z.T @ H @ Z)
            floor = 1e-12 * max(1.0, np.abs(w).max())
            coeff = (V.T @ rg) / np.maximum(np.abs(w), floor)
            step_red = V @ coeff
            dec = float(rg @ step_red)
            if dec <= self.dec_tol:
                converged = True
                break
            s = Z @ step_red
            amax = 1.0
            neg, pos = s < 0, s > 0
            if neg.any():
                amax = min(amax, 0.995 * np.min(y[neg] / -s[neg]))
            if pos.any():
                amax = min(amax, 0.995 * np.min((1 - y[pos]) / s[pos]))
            a = amax
            accepted = False
            for _ in range(60):
                yn = y + a * s
                fn = struct.value(yn)
                if np.isfinite(fn) and (fn >= f + 1e-4 * a * dec or (dec < 1e-10 and fn >= f - 1e-14)):
                    accepted = True
                    break
                a *= 0.5
            if not accepted:
                converged = dec < 1e-8
                break
            y = yn
            small = y < PIN_EPS
            if small.any():
                d = struct.to_columns(y)
                pins = struct.pinned | {c for c in range(b.n_cols) if struct.cls[c] >= 0 and small[struct.cls[c]]}
                struct = _Structure(b, pins)
                A, rhs, Z = self._setup(struct)
                if struct.K == 0 or not self._consistent(struct, A, rhs):
                    ok = struct.K == 0 and self._consistent(struct, A, rhs)
                    return _Run(0.0 if ok else MINUS_INFINITY, struct.to_columns(np.zeros(struct.K)), ok)
                y = self.start_point(struct, d)
                if y is None:
                    return _Run(MINUS_INFINITY, np.zeros(b.n_cols), False)
            f, g, H = struct.evaluate(y)
        else:
            # out of iterations: a small decrement still bounds the value gap by about tol / 2
            converged = dec <= self.tol
        return _Run(f, struct.to_columns(y), converged)


def _perturbed(d0, rng, b, ascent, struct):
    """Start point with seeded multiplicative noise in logistic coordinates."""
    y0 = ascent.start_point(struct, d0)
    if y0 is None:
        return None
    z = np.log(y0 / (1 - y0)) + rng.normal(scale=0.75, size=y0.size)
    A, rhs, _ = ascent._setup(struct)
    target = _project(1.0 / (1.0 + np.exp(-z)), A, rhs)
    return struct.to_columns(_blend(struct, y0, target, A, rhs))


def maximize_shape(q: ShapeQuery) -> ShapeValue:
    """Maximize the spectral objective over weights with the prescribed averages.

    The first run starts from the warm start if given, else the uniform
    assignment; further runs start from seeded perturbations of it; each
    entry of ``faces`` adds a run restricted to that set of columns.
    """
    b = q.matrix
    ascent = _Ascent(b, q.target_avg, q.target_aux_avg, q.tol)
    d0 = None
    if q.start is not None:
        d0 = np.asarray(q.start, dtype=float)
        if d0.size != b.n_cols:
            raise ValueError(f"warm start needs {b.n_cols} entries")
        d0 = np.clip(d0, WARM_FLOOR, 1 - WARM_FLOOR)
    runs = [ascent.run(d0)]
    seeds = np.random.SeedSequence(q.seed).spawn(max(q.restarts - 1, 0))
    for ss in seeds:
        start = _perturbed(d0, np.random.default_rng(ss), b, ascent, ascent.root)
        if start is not None:
            runs.append(ascent.run(start))
    for face in q.faces:
        outside = frozenset(range(b.n_cols)) - frozenset(face)
        runs.append(ascent.run(None, outside))
    best = max(runs, key=lambda r: r.value)
    if q.restarts >= 2 and np.isfinite(best.value):
        agree = sum(1 for r in runs if np.isfinite(r.value) and abs(r.value - best.value) <= 10 * q.tol)
        converged = best.converged and agree >= 2
    else:
        converged = best.converged
    d = np.where(best.d < PIN_EPS, 0.0, best.d)
    return ShapeValue(best.value, FractionalWeightAssignment.from_columns(d, b), converged, len(runs))


def crossing_grid(n_uniform: int = 200, s_max: float = S_MAX, eps: float = EPSILON) -> np.ndarray:
    geo = np.geomspace(eps, GEOMETRIC_END, GEOMETRIC_POINTS)
    uni = np.linspace(GEOMETRIC_END, s_max, n_uniform + 1)[1:]
    return np.concatenate([geo, uni])


def first_zero_crossing(matrix: BaseMatrix | None, direction: Ray = DISTANCE, grid: int = 200,
                        tol: float = 1e-6, *, value_tol: float = 1e-9, restarts: int = 1, seed: int = 0,
                        faces: Sequence = (), shape: Callable[[float], float] | None = None,
                        eps: float = EPSILON, s_max: float = S_MAX) -> ZeroCrossing:
    """First sign change of s -> max shape along ``direction``, refined by bisection.

    ``shape`` replaces the inner maximization (a test seam).  The crossing is
    certified only if the shape is strictly negative at ``eps``.
    """
    if shape is None:
        if matrix is None:
            raise ValueError("need a matrix or a shape function")
        if matrix.augmented != (direction.aux_ratio is not None):
            raise ValueError("trapping rays need an augmented matrix and vice versa")
        if direction.aux_ratio:
            s_max = min(s_max, matrix.n_checks / matrix.n_vars / direction.aux_ratio * (1 - 1e-9))
        faces = tuple(tuple(f) for f in faces)
        cache: dict[float, np.ndarray] = {}

        def evaluate(s, warm=None):
            omega, beta = direction.point(s)
            start = None
            if warm is not None and warm in cache:
                start = cache[warm] * (s / warm)
            res = maximize_shape(ShapeQuery(matrix, omega, beta, restarts, seed, value_tol, start, faces))
            if not res.converged:
                raise OptimizationError(f"inner maximization did not converge at s={s:.6g}", s)
            if np.isfinite(res.value):
                cache[s] = res.argmax.columns()
            return res.value
    else:
        def evaluate(s, warm=None):
            return float(shape(s))

    if evaluate(eps) >= 0:
        return ZeroCrossing(None, (0.0, eps), None)
    points = crossing_grid(grid, s_max, eps)
    lo = eps
    hi = None
    for s in points[1:]:
        if s > s_max:
            break
        if evaluate(s, lo) >= 0:
            hi = s
            break
        lo = s
    if hi is None:
        return ZeroCrossing(None, (lo, s_max), lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if evaluate(mid, lo) < 0:
            lo = mid
        else:
            hi = mid
    return ZeroCrossing(0.5 * (lo + hi), (lo, hi), lo)
