"""Named initial/target phase profiles.

Scalar profiles are ``tanh(s / (sqrt(2) eps))`` of a signed distance ``s``
(positive inside the +1 phase).  Three-phase profiles use clamped linear
transitions of a given width and lie in the Gibbs simplex at every node.
"""
from __future__ import annotations

import math

import numpy as np

from .grid import SpatialGrid


def _tanh_profile(s, eps):
    return np.tanh(s / (math.sqrt(2.0) * eps))


def _ramp(s, width):
    return np.clip(0.5 + s / width, 0.0, 1.0)


def circle(grid: SpatialGrid, eps, r=0.5, cx=0.0, cy=0.0):
    X, Y = grid.coords
    return _tanh_profile(r - np.hypot(X - cx, Y - cy), eps)


def two_circles(grid: SpatialGrid, eps, r=0.25, cx1=-0.3, cy1=0.0, cx2=0.3, cy2=0.0):
    X, Y = grid.coords
    s = np.maximum(r - np.hypot(X - cx1, Y - cy1), r - np.hypot(X - cx2, Y - cy2))
    return _tanh_profile(s, eps)


def vertical_interface(grid: SpatialGrid, eps, x0=0.0, sign=1.0):
    """``+1`` phase left of ``x = x0`` (``sign = -1`` flips it)."""
    X, _ = grid.coords
    return _tanh_profile(sign * (x0 - X), eps)


def constant(grid: SpatialGrid, eps, value=1.0, value2=None, value3=None):
    vals = [v for v in (value, value2, value3) if v is not None]
    if len(vals) == 1:
        return np.full(grid.shape, float(value))
    return np.stack([np.full(grid.shape, float(v)) for v in vals])


def rings3(grid: SpatialGrid, eps, r1=0.2, r2=0.4, cx=0.5, cy=0.5, width=None):
    """Phase 1 in a disc, phase 2 in the surrounding annulus, phase 3 outside."""
    width = 2.0 * eps if width is None else width
    X, Y = grid.coords
    d = np.hypot(X - cx, Y - cy)
    inner = _ramp(r1 - d, width)
    outer = _ramp(r2 - d, width)
    return np.stack([inner, outer - inner, 1.0 - outer])


def walls3(grid: SpatialGrid, eps, x1=0.35, x2=0.65, width=None):
    """Three vertical strips: phase 1 left of ``x1``, phase 2 up to ``x2``, phase 3 right."""
    width = 2.0 * eps if width is None else width
    X, _ = grid.coords
    left = _ramp(x1 - X, width)
    mid = _ramp(x2 - X, width)
    return np.stack([left, mid - left, 1.0 - mid])


GENERATORS = {
    "circle": circle,
    "two_circles": two_circles,
    "vertical_interface": vertical_interface,
    "constant": constant,
    "rings3": rings3,
    "walls3": walls3,
}
VECTOR_GENERATORS = {"rings3", "walls3"}


def make_profile(name: str, grid: SpatialGrid, eps: float, **params) -> np.ndarray:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown profile generator {name!r}") from None
    return gen(grid, eps, **params)
