"""Delta-trapping-set growth rates and zero-contour curves."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .growth import DEFAULT, GrowthRateBound, Settings, conv_bounds, crossing, prefetch
from .protograph import BaseMatrix, ConvolutionalProtograph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContourPoint:
    delta_ratio: float
    alpha: float
    beta: float
    source: str = "block"

    @classmethod
    def at(cls, delta, alpha, source="block"):
        return cls(float(delta), float(alpha), float(delta) * float(alpha), source)


def default_delta_grid() -> list[float]:
    return [0.0] + list(np.geomspace(1e-3, 2.0, 40))


def _check_delta(delta):
    if delta < 0 or not np.isfinite(delta):
        raise ValueError(f"trapping-set ratio must be a finite nonnegative number, got {delta}")


def ts_growth_rate(b: BaseMatrix, delta: float, settings: Settings = DEFAULT) -> float | None:
    """First zero in alpha of the augmented shape along beta = delta * alpha.

    None means no linear growth is certified: small trapping sets of sublinear
    size exist in the ensemble.
    """
    _check_delta(delta)
    if b.augmented:
        raise ValueError("pass the original matrix; augmentation is applied internally")
    z = crossing(b, float(delta), settings)
    return None if z.location is None else float(z.location)


def conv_ts_bounds(conv: ConvolutionalProtograph, delta: float, T_range: Iterable[int],
                   tolerance: float = 1e-3, settings: Settings = DEFAULT) -> list[GrowthRateBound]:
    _check_delta(delta)
    return conv_bounds(conv, T_range, float(delta), tolerance, settings)


def zero_contour(target, delta_grid: Sequence[float], settings: Settings = DEFAULT,
                 tolerance: float = 1e-3) -> list[ContourPoint]:
    """Points (delta_ts, delta * delta_ts) for a block matrix or a ``(conv, T)`` pair.

    Convolutional points are ``conv-exact`` where the bounds coincide and
    otherwise a ``conv-lower``/``conv-upper`` pair.  Grid values without
    certified growth are left out (and logged).
    """
    grid = [float(d) for d in delta_grid]
    for d in grid:
        _check_delta(d)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("delta grid must be strictly increasing")
    points = []
    if isinstance(target, BaseMatrix):
        prefetch([(target, d) for d in grid], settings)
        for d in grid:
            alpha = ts_growth_rate(target, d, settings)
            if alpha is None:
                log.warning("no certified growth at delta=%g; point omitted", d)
                continue
            points.append(ContourPoint.at(d, alpha, "block"))
        return points
    conv, T = target
    if not isinstance(conv, ConvolutionalProtograph):
        raise TypeError("target must be a BaseMatrix or a (ConvolutionalProtograph, T) pair")
    for d in grid:
        (bound,) = conv_ts_bounds(conv, d, [T], tolerance, settings)
        if bound.coincide:
            if bound.exact_value > 0:
                points.append(ContourPoint.at(d, bound.exact_value, "conv-exact"))
            else:
                log.warning("no certified growth at delta=%g; point omitted", d)
            continue
        for value, source in ((bound.lower, "conv-lower"), (bound.upper, "conv-upper")):
            if value > 0:
                points.append(ContourPoint.at(d, value, source))
    return points
