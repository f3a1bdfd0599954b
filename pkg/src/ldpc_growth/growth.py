"""Minimum-distance growth rates of terminated and tail-biting ensembles and free-distance bounds.

A weight assignment supported on ``w`` consecutive variable blocks of a
terminated or tail-biting matrix (with ``w + m_s`` not exceeding the
tail-biting factor) has exactly the objective of ``terminate(conv, w)``,
scaled by ``w / L``.  The first zero crossing of the shape is therefore the
minimum of the full-support crossing and the rescaled crossings of all
shorter terminated matrices; the conv-level functions below evaluate it
that way and cache every crossing they touch.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .optimizer import DISTANCE, OptimizationError, Ray, ZeroCrossing, first_zero_crossing
from .protograph import (
    BaseMatrix,
    ConvolutionalProtograph,
    augment_for_trapping,
    design_rate,
    tailbite,
    terminate,
)

log = logging.getLogger(__name__)

THREADS_ENV = "LDPC_GROWTH_THREADS"


@dataclass(frozen=True)
class Settings:
    """Numerical knobs of a growth-rate computation."""

    tol: float = 1e-6  # bisection width on the crossing
    value_tol: float = 1e-9
    grid: int = 200
    restarts: int = 1
    seed: int = 0


DEFAULT = Settings()


@dataclass(frozen=True)
class BlockGrowth:
    value: float
    asymptotically_good: bool
    crossing: ZeroCrossing | None = None


@dataclass(frozen=True)
class GrowthRateBound:
    T: int
    lower: float
    upper: float
    coincide: bool
    tolerance: float
    exact_value: float | None = None

    @classmethod
    def from_bounds(cls, T, lower, upper, tolerance):
        coincide = abs(upper - lower) <= tolerance
        return cls(T, lower, upper, coincide, tolerance, 0.5 * (upper + lower) if coincide else None)


@dataclass(frozen=True)
class SweepRow:
    factor: int
    kind: str  # "terminated" | "tailbiting"
    block_growth: float
    bound: float
    rate: Fraction


# ---------------------------------------------------------------------------
# crossing cache

_CACHE: dict = {}


def _key(matrix: BaseMatrix, delta, settings: Settings, faces=()):
    return (matrix, None if delta is None else float(delta), settings, faces)


def _compute(matrix: BaseMatrix, delta, settings: Settings, faces=()) -> ZeroCrossing:
    if delta is None:
        target, ray = matrix, DISTANCE
    else:
        target, ray = augment_for_trapping(matrix), Ray(float(delta))
        aux = tuple(range(matrix.n_cols, target.n_cols))
        faces = tuple(f + aux for f in faces)
    return first_zero_crossing(
        target, ray, settings.grid, settings.tol, value_tol=settings.value_tol,
        restarts=settings.restarts, seed=settings.seed, faces=faces,
    )


def _job(args):
    return _compute(*args)


def crossing(matrix: BaseMatrix, delta=None, settings: Settings = DEFAULT, faces=()) -> ZeroCrossing:
    """Cached first zero crossing of ``matrix`` (augmented internally when ``delta`` is set).

    ``faces`` lists original-column supports searched in addition to the
    full support; auxiliary columns are always kept.
    """
    faces = tuple(tuple(f) for f in faces)
    key = _key(matrix, delta, settings, faces)
    if key not in _CACHE:
        _CACHE[key] = _compute(matrix, delta, settings, faces)
    return _CACHE[key]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _relabel(err: OptimizationError, label: str | None, delta) -> OptimizationError:
    if label is None:
        return err
    where = label if delta is None else f"{label}, delta={delta:g}"
    return OptimizationError(f"{where}: {err}", err.location)


def prefetch(jobs: Iterable, settings: Settings = DEFAULT) -> None:
    """Compute missing crossings, in worker processes if allowed.

    Jobs are ``(matrix, delta)``, ``(matrix, delta, label)`` or
    ``(matrix, delta, label, faces)``; the label names the failing factor in
    optimizer errors.
    """
    pending, seen = [], set()
    for job in jobs:
        matrix, delta, label, faces = (*job, None, ())[:4] if len(job) < 4 else job
        faces = tuple(tuple(f) for f in (faces or ()))
        key = _key(matrix, delta, settings, faces)
        if key not in _CACHE and key not in seen:
            seen.add(key)
            pending.append((matrix, delta, label, faces))
    workers = min(worker_count(), len(pending))
    if workers <= 1:
        for matrix, delta, label, faces in pending:
            try:
                crossing(matrix, delta, settings, faces)
            except OptimizationError as err:
                raise _relabel(err, label, delta) from err
        return
    with ProcessPoolExecutor(workers) as pool:
        futures = [pool.submit(_job, (m, d, settings, f)) for m, d, _, f in pending]
        for (matrix, delta, label, faces), fut in zip(pending, futures):
            try:
                _CACHE[_key(matrix, delta, settings, faces)] = fut.result()
            except OptimizationError as err:
                raise _relabel(err, label, delta) from err


def clear_cache() -> None:
    _CACHE.clear()


# ---------------------------------------------------------------------------
# block level

def block_growth(b: BaseMatrix, settings: Settings = DEFAULT, faces: Sequence = ()) -> BlockGrowth:
    if b.augmented:
        raise ValueError("block growth rate is defined on unaugmented matrices")
    if faces:
        z = first_zero_crossing(b, DISTANCE, settings.grid, settings.tol, value_tol=settings.value_tol,
                                restarts=settings.restarts, seed=settings.seed, faces=faces)
    else:
        z = crossing(b, None, settings)
    if z.location is None:
        return BlockGrowth(0.0, False, z)
    return BlockGrowth(float(z.location), True, z)


def block_growth_rate(b: BaseMatrix, settings: Settings = DEFAULT, faces: Sequence = ()) -> float:
    """First positive zero of the spectral shape; 0 when linear growth is not certified."""
    return block_growth(b, settings, faces).value


# ---------------------------------------------------------------------------
# convolutional level

def _location(z: ZeroCrossing) -> float | None:
    return None if z.location is None else float(z.location)


def _window_jobs(conv, widths, delta):
    return [(terminate(conv, w), delta, f"terminated L={w}") for w in widths]


def _best_window(conv, widths, n_blocks, delta, settings) -> float | None:
    best = None
    for w in widths:
        loc = _location(crossing(terminate(conv, w), delta, settings))
        if loc is not None:
            scaled = loc * w / n_blocks
            best = scaled if best is None else min(best, scaled)
    return best


def terminated_growth(conv: ConvolutionalProtograph, L: int, delta=None,
                      settings: Settings = DEFAULT) -> float | None:
    """Growth rate of terminate(conv, L): the best window of w <= L blocks."""
    prefetch(_window_jobs(conv, range(1, L + 1), delta), settings)
    return _best_window(conv, range(1, L + 1), L, delta, settings)


def _wrap_face(conv, lam):
    """Columns of lam - 1 consecutive blocks: a localized start whose tails may meet across the wrap."""
    return (tuple(range((lam - 1) * conv.b_vars)),)


def _tailbite_job(conv, lam, delta):
    return (tailbite(conv, lam), delta, f"tail-biting lambda={lam}", _wrap_face(conv, lam))


def tailbiting_growth(conv: ConvolutionalProtograph, lam: int, delta=None,
                      settings: Settings = DEFAULT) -> float | None:
    """Growth rate of tailbite(conv, lam).

    The full-support search also runs on the (lam - 1)-block face, so that
    continuation can follow localized profiles whose tails wrap around;
    windows of w <= lam - m_s blocks are exact copies of terminated matrices.
    """
    widths = range(1, lam - conv.memory + 1)
    prefetch(_window_jobs(conv, widths, delta) + [_tailbite_job(conv, lam, delta)], settings)
    full = _location(crossing(tailbite(conv, lam), delta, settings, _wrap_face(conv, lam)))
    win = _best_window(conv, widths, lam, delta, settings)
    vals = [v for v in (full, win) if v is not None]
    return min(vals) if vals else None


def _check_range(conv, factors):
    factors = list(factors)
    if not factors:
        raise ValueError("empty factor range")
    if min(factors) < conv.memory + 1:
        raise ValueError(f"factors must be >= m_s + 1 = {conv.memory + 1}")
    return factors


def _prefetch_conv(conv, factors, delta, settings):
    top = max(factors)
    jobs = _window_jobs(conv, range(1, top + 1), delta)
    jobs += [_tailbite_job(conv, lam, delta) for lam in factors]
    prefetch(jobs, settings)


def conv_bounds(conv: ConvolutionalProtograph, T_range: Iterable[int], delta=None,
                tolerance: float = 1e-3, settings: Settings = DEFAULT) -> list[GrowthRateBound]:
    """Upper (terminated) and lower (tail-biting) bounds on the convolutional growth rate per period T."""
    factors = _check_range(conv, T_range)
    _prefetch_conv(conv, factors, delta, settings)
    out = []
    for T in factors:
        scale = T / (conv.memory + 1)
        upper = (terminated_growth(conv, T, delta, settings) or 0.0) * scale
        lower = (tailbiting_growth(conv, T, delta, settings) or 0.0) * scale
        bound = GrowthRateBound.from_bounds(T, lower, upper, tolerance)
        if lower > upper + tolerance:
            log.warning("T=%d: lower bound %.6g exceeds upper bound %.6g", T, lower, upper)
        out.append(bound)
    return out


def free_distance_bounds(conv: ConvolutionalProtograph, T_range: Iterable[int], tolerance: float = 1e-3,
                         settings: Settings = DEFAULT) -> list[GrowthRateBound]:
    return conv_bounds(conv, T_range, None, tolerance, settings)


def sweep(conv: ConvolutionalProtograph, factors: Iterable[int], delta=None,
          settings: Settings = DEFAULT) -> list[SweepRow]:
    """Block growth rates of both termination kinds per factor, ordered by (kind, factor)."""
    factors = _check_range(conv, factors)
    _prefetch_conv(conv, factors, delta, settings)
    div = conv.memory + 1
    rows = []
    for L in factors:
        g = terminated_growth(conv, L, delta, settings) or 0.0
        rows.append(SweepRow(L, "terminated", g, g * L / div, design_rate(terminate(conv, L))))
    for lam in factors:
        g = tailbiting_growth(conv, lam, delta, settings) or 0.0
        rows.append(SweepRow(lam, "tailbiting", g, g * lam / div, design_rate(tailbite(conv, lam))))
    return rows
