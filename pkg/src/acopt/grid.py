"""Uniform node-centred grids on a rectangle.

Fields are plain numpy arrays whose two trailing axes are ``(ny, nx)``
(row-major, ``y`` outer).  Vector fields carry a leading component axis,
``(N, ny, nx)``; trajectories stack time in front of that.

The Laplacian uses ghost-node reflection for the homogeneous Neumann
condition.  Together with the lumped quadrature weights (halved on each
boundary axis) the discrete operator is self-adjoint in the weighted inner
product, which the adjoint and Krylov machinery rely on.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"need at least 2 nodes per axis, got nx={self.nx}, ny={self.ny}")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("empty domain")

    @classmethod
    def square(cls, lo: float, hi: float, n: int) -> "SpatialGrid":
        return cls(lo, hi, lo, hi, n, n)

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / (self.ny - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.hx * np.arange(self.nx)

    @cached_property
    def y(self) -> np.ndarray:
        return self.y_min + self.hy * np.arange(self.ny)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates ``(X, Y)``, each of shape ``(ny, nx)``."""
        X, Y = np.meshgrid(self.x, self.y, indexing="xy")
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def weights(self) -> np.ndarray:
        wx = np.full(self.nx, self.hx)
        wx[[0, -1]] *= 0.5
        wy = np.full(self.ny, self.hy)
        wy[[0, -1]] *= 0.5
        w = np.outer(wy, wx)
        w.flags.writeable = False
        return w

    @cached_property
    def stencil_diagonal(self) -> float:
        """Diagonal of the negative Laplacian (same at every node)."""
        return 2.0 / self.hx**2 + 2.0 / self.hy**2

    def check(self, field: np.ndarray) -> None:
        if field.shape[-2:] != self.shape:
            raise ValueError(f"field trailing shape {field.shape[-2:]} does not match grid {self.shape}")


@dataclass(frozen=True)
class TimeGrid:
    T: float
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("need at least one time step")
        if not self.T > 0:
            raise ValueError("final time must be positive")

    @property
    def tau(self) -> float:
        return self.T / self.M

    @property
    def nodes(self) -> np.ndarray:
        return self.tau * np.arange(self.M + 1)


def _second_difference(u: np.ndarray, axis: int, h: float) -> np.ndarray:
    # mirror ghost node: u[-1] := u[1], u[n] := u[n-2]
    u = np.moveaxis(u, axis, -1)
    out = np.empty_like(u)
    out[..., 1:-1] = u[..., 2:] - 2.0 * u[..., 1:-1] + u[..., :-2]
    out[..., 0] = 2.0 * (u[..., 1] - u[..., 0])
    out[..., -1] = 2.0 * (u[..., -2] - u[..., -1])
    out /= h * h
    return np.moveaxis(out, -1, axis)


def laplacian_apply(field: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Five-point Neumann Laplacian of ``field`` (any leading axes)."""
    field = np.asarray(field, dtype=float)
    grid.check(field)
    return _second_difference(field, -1, grid.hx) + _second_difference(field, -2, grid.hy)


def inner_product(a: np.ndarray, b: np.ndarray, grid: SpatialGrid) -> float:
    """Lumped L2(Omega) inner product, summed over any leading component axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    grid.check(a)
    return float(np.sum(a * b * grid.weights))


def norm(a: np.ndarray, grid: SpatialGrid) -> float:
    return float(np.sqrt(inner_product(a, a, grid)))


def time_integral(samples, time: TimeGrid) -> float:
    """Right-endpoint rectangle rule: ``tau * sum_{m=1}^M g(t_m)``."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != time.M:
        raise ValueError(f"expected {time.M} samples (t_1..t_M), got {samples.shape[0]}")
    return float(time.tau * np.sum(samples))


def spacetime_inner(a: np.ndarray, b: np.ndarray, grid: SpatialGrid, time: TimeGrid) -> float:
    """L2(Omega_T) inner product of two step-indexed stacks ``(M, ...)``."""
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.shape[0] != time.M:
        raise ValueError(f"expected {time.M} time slices, got {a.shape[0]}")
    grid.check(a)
    w = grid.weights
    return float(time.tau * np.sum(a * b * w))
