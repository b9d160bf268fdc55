"""Bulk potentials with derivatives up to third order.

Two models share one interface:

* :class:`DoubleWell`, the scalar quartic ``(c^2 - 1)^2 / 4``;
* :class:`RegularizedObstacle`, ``-|c|^2/2 + sum_i psi_sigma(c_i)`` for an
  ``N``-phase vector, where ``psi_sigma`` is a C^2 convex penalty of the
  constraint ``c_i >= 0``.

Derivatives are returned as componentwise diagonals.  For the obstacle model
the ``-|c|^2/2`` part contributes ``-c`` to the gradient and ``-1`` to the
Hessian diagonal, and nothing to the third derivative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Derivatives(NamedTuple):
    value: np.ndarray
    grad: np.ndarray
    hess_diag: np.ndarray
    third_diag: np.ndarray


@dataclass(frozen=True)
class DoubleWell:
    vector = False
    n_phases = 2

    def value(self, c):
        return 0.25 * (c * c - 1.0) ** 2

    def grad(self, c):
        return c * c * c - c

    def hess_diag(self, c):
        return 3.0 * c * c - 1.0

    def third_diag(self, c):
        return 6.0 * c

    def node_value(self, c):
        """Potential density per node (identity for a scalar field)."""
        return self.value(c)


def psi_sigma(r, sigma: float):
    r = np.asarray(r, dtype=float)
    mid = -r**3 / (6.0 * sigma**2)
    low = (r + 0.5 * sigma) ** 2 / (2.0 * sigma) + sigma / 24.0
    return np.where(r >= 0.0, 0.0, np.where(r > -sigma, mid, low))


def dpsi_sigma(r, sigma: float):
    r = np.asarray(r, dtype=float)
    mid = -r**2 / (2.0 * sigma**2)
    low = (r + 0.5 * sigma) / sigma
    return np.where(r >= 0.0, 0.0, np.where(r > -sigma, mid, low))


def d2psi_sigma(r, sigma: float):
    r = np.asarray(r, dtype=float)
    mid = -r / sigma**2
    return np.where(r >= 0.0, 0.0, np.where(r > -sigma, mid, 1.0 / sigma))


def d3psi_sigma(r, sigma: float):
    # piecewise; the jumps at r = 0 and r = -sigma are a null set
    r = np.asarray(r, dtype=float)
    return np.where((r < 0.0) & (r > -sigma), -1.0 / sigma**2, 0.0)


@dataclass(frozen=True)
class RegularizedObstacle:
    sigma: float
    N: int = 3
    vector = True

    def __post_init__(self):
        if not (0.0 < self.sigma < 0.25):
            raise ValueError(f"sigma must lie in (0, 1/4), got {self.sigma}")
        if self.N < 2:
            raise ValueError("need at least two phases")

    @property
    def n_phases(self) -> int:
        return self.N

    def value(self, c):
        """Componentwise part ``psi_sigma(c_i) - c_i^2/2``; sum over axis 0 for the potential."""
        return psi_sigma(c, self.sigma) - 0.5 * c * c

    def node_value(self, c):
        return np.sum(self.value(c), axis=0)

    def grad(self, c):
        return dpsi_sigma(c, self.sigma) - c

    def hess_diag(self, c):
        return d2psi_sigma(c, self.sigma) - 1.0

    def third_diag(self, c):
        return d3psi_sigma(c, self.sigma)

    def penalty_grad(self, c):
        """``D psi_hat(c)``; the slack field is its negative."""
        return dpsi_sigma(c, self.sigma)

    def penalty_hess(self, c):
        return d2psi_sigma(c, self.sigma)


def eval_derivatives(model, c) -> Derivatives:
    c = np.asarray(c, dtype=float)
    if model.vector and c.shape[0] != model.N:
        raise ValueError(f"expected {model.N} components, got leading axis {c.shape[0]}")
    return Derivatives(
        model.node_value(c), model.grad(c), model.hess_diag(c), model.third_diag(c)
    )


def project_tangent(v, axis: int = 0):
    """Orthogonal projection onto ``{sum_i v_i = 0}`` along ``axis``."""
    v = np.asarray(v, dtype=float)
    if v.shape[axis] < 2:
        raise ValueError("projection needs at least two components")
    return v - np.mean(v, axis=axis, keepdims=True)
