"""Controlled Allen-Cahn time stepping.

The state equation per step ``m`` reads

    eps (c_m - c_{m-1}) / tau - eps Lap c_m + (1/eps) Pi DPsi(c_*) = f_m

with ``c_* = c_m`` (implicit Euler) or ``c_* = c_{m-1}`` (semi-implicit).
``Pi`` is the identity for the scalar double well and the tangent projection
onto ``sum_i v_i = 0`` for the N-phase obstacle model, so a state that starts
on the affine simplex and is forced tangentially stays there.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import ndimage

from .grid import SpatialGrid, TimeGrid, laplacian_apply
from .linalg import CGError, pcg
from .potentials import DoubleWell, RegularizedObstacle, project_tangent

Scheme = Literal["implicit", "semi-implicit"]
SCHEMES = ("implicit", "semi-implicit")

NEWTON_ATOL = 1e-12
NEWTON_MAXITER = 50
LINEAR_RTOL = 1e-13
MAX_SUBSTEP_DEPTH = 6


class NewtonError(RuntimeError):
    pass


@dataclass(frozen=True)
class AllenCahn:
    """Discrete Allen-Cahn system: grids, interface width and bulk potential."""

    grid: SpatialGrid
    time: TimeGrid
    epsilon: float
    potential: DoubleWell | RegularizedObstacle

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def vector(self) -> bool:
        return self.potential.vector

    @property
    def field_shape(self) -> tuple[int, ...]:
        if self.vector:
            return (self.potential.N, *self.grid.shape)
        return self.grid.shape

    @property
    def tau(self) -> float:
        return self.time.tau

    def with_potential(self, potential) -> "AllenCahn":
        return AllenCahn(self.grid, self.time, self.epsilon, potential)

    def proj(self, v):
        return project_tangent(v, axis=-3) if self.vector else v

    def neg_lap(self, v):
        return -laplacian_apply(v, self.grid)

    def inner(self, a, b) -> float:
        return float(np.sum(a * b * self.grid.weights))

    def operator(self, d2, tau=None):
        """``x -> eps/tau x + eps A x + (1/eps) Pi(d2 x)`` and a nodewise preconditioner.

        ``d2 = None`` drops the potential term (the semi-implicit matrix).
        On the tangent space the operator is self-adjoint in the lumped inner
        product.
        """
        tau = self.tau if tau is None else tau
        eps = self.epsilon
        a = eps / tau
        diag = a + eps * self.grid.stencil_diagonal
        if d2 is None:
            def apply(x):
                return a * x + eps * self.neg_lap(x)
            b = np.full(self.field_shape, diag)
        else:
            k = d2 / eps
            def apply(x):
                return a * x + eps * self.neg_lap(x) + self.proj(k * x)
            b = np.maximum(diag + k, 1e-8 * a)
        binv = 1.0 / b
        if self.vector:
            total = np.sum(binv, axis=-3, keepdims=True)
            def precond(r):
                y = r * binv
                return y - binv * (np.sum(y, axis=-3, keepdims=True) / total)
        else:
            def precond(r):
                return r * binv
        return apply, precond

    def solve(self, d2, rhs, tau=None, rtol=LINEAR_RTOL, x0=None):
        apply, precond = self.operator(d2, tau)
        # roundoff normal to the tangent space is invisible to the operator
        rhs = self.proj(rhs)
        x, _ = pcg(apply, rhs, self.inner, precond, rtol=rtol, atol=1e-300, x0=x0)
        return x

    def merit(self, c, c_prev, f, tau):
        """Convex step functional whose stationary point is the implicit step."""
        eps = self.epsilon
        d = c - c_prev
        w = self.grid.weights
        pot = self.potential.node_value(c)
        return (
            0.5 * eps / tau * self.inner(d, d)
            + 0.5 * eps * self.inner(self.neg_lap(c), c)
            + float(np.sum(pot * w)) / eps
            - self.inner(f, c)
        )

    def residual(self, c, c_prev, f, tau):
        eps = self.epsilon
        return self.proj(eps / tau * (c - c_prev) + eps * self.neg_lap(c)
                         + self.potential.grad(c) / eps - f)


def step_implicit(c_prev, f_m, system: AllenCahn, tau=None, atol=NEWTON_ATOL,
                  maxiter=NEWTON_MAXITER):
    """One implicit Euler step by damped Newton with cg inner solves."""
    c, _ = _newton(c_prev, f_m, system, system.tau if tau is None else tau, atol, maxiter)
    return c


def _newton(c_prev, f_m, system, tau, atol, maxiter):
    pot = system.potential
    c = np.array(c_prev, dtype=float)
    res = system.residual(c, c_prev, f_m, tau)
    rnorm = np.max(np.abs(res))
    for it in range(1, maxiter + 1):
        if rnorm <= atol:
            return c, it - 1
        rtol = min(1e-4, max(1e-2 * rnorm, LINEAR_RTOL))
        try:
            delta = system.solve(pot.hess_diag(c), -res, tau=tau, rtol=rtol)
        except CGError as exc:
            raise NewtonError(f"linear solve failed in Newton iteration {it}: {exc}") from exc
        step = 1.0
        c_new = c + delta
        res_new = system.residual(c_new, c_prev, f_m, tau)
        rnorm_new = np.max(np.abs(res_new))
        if not rnorm_new < rnorm:
            g0 = system.merit(c, c_prev, f_m, tau)
            slope = system.inner(res, delta)
            while step > 1e-10:
                if system.merit(c_new, c_prev, f_m, tau) <= g0 + 1e-4 * step * slope:
                    break
                step *= 0.5
                c_new = c + step * delta
            res_new = system.residual(c_new, c_prev, f_m, tau)
            rnorm_new = np.max(np.abs(res_new))
        c, res = c_new, res_new
        # stagnation at roundoff level counts as converged
        if step == 1.0 and np.max(np.abs(delta)) <= 1e-14 * max(1.0, np.max(np.abs(c))) \
                and rnorm_new <= 1e3 * atol * max(1.0, system.epsilon / tau):
            return c, it
        rnorm = rnorm_new
        if not np.isfinite(rnorm):
            break
    if rnorm <= atol:
        return c, maxiter
    raise NewtonError(f"Newton did not converge in {maxiter} iterations (residual {rnorm:.3e})")


def step_semi_implicit(c_prev, f_m, system: AllenCahn, tau=None):
    """One semi-implicit step: Laplacian implicit, potential lagged."""
    tau = system.tau if tau is None else tau
    eps = system.epsilon
    # solve for the increment so the vector case stays on the tangent space
    rhs = f_m - eps * system.neg_lap(c_prev) - system.proj(system.potential.grad(c_prev)) / eps
    try:
        return c_prev + system.solve(None, rhs, tau=tau)
    except CGError as exc:
        raise NewtonError(f"semi-implicit solve failed: {exc}") from exc


@dataclass(frozen=True)
class PhaseTrajectory:
    """States ``c[m]`` at ``t_m``, ``m = 0..M``."""

    c: np.ndarray
    system: AllenCahn
    scheme: str
    substepped: tuple[int, ...] = field(default=())

    @property
    def final(self) -> np.ndarray:
        return self.c[-1]


def _implicit_with_substeps(c_prev, f_m, system, tau, depth=0):
    try:
        c, _ = _newton(c_prev, f_m, system, tau, NEWTON_ATOL, NEWTON_MAXITER)
        return c
    except NewtonError:
        if depth >= MAX_SUBSTEP_DEPTH:
            raise
    half = 0.5 * tau
    mid = _implicit_with_substeps(c_prev, f_m, system, half, depth + 1)
    return _implicit_with_substeps(mid, f_m, system, half, depth + 1)


def solve_forward(c0, control, system: AllenCahn, scheme: Scheme = "implicit") -> PhaseTrajectory:
    """March ``c0`` through ``M`` steps driven by ``control[m-1]`` on step ``m``."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    M = system.time.M
    c0 = np.asarray(c0, dtype=float)
    shape = system.field_shape
    if c0.shape != shape:
        raise ValueError(f"initial state shape {c0.shape} != {shape}")
    control = np.asarray(control, dtype=float)
    if control.shape != (M, *shape):
        raise ValueError(f"control shape {control.shape} != {(M, *shape)}")
    out = np.empty((M + 1, *shape))
    out[0] = c0
    substepped = []
    tau = system.tau
    for m in range(1, M + 1):
        if scheme == "semi-implicit":
            out[m] = step_semi_implicit(out[m - 1], control[m - 1], system)
            continue
        try:
            out[m], _ = _newton(out[m - 1], control[m - 1], system, tau,
                                NEWTON_ATOL, NEWTON_MAXITER)
        except NewtonError as exc:
            warnings.warn(f"step {m}: {exc}; bisecting the time step", RuntimeWarning,
                          stacklevel=2)
            half = 0.5 * tau
            mid = _implicit_with_substeps(out[m - 1], control[m - 1], system, half, 1)
            out[m] = _implicit_with_substeps(mid, control[m - 1], system, half, 1)
            substepped.append(m)
    out.flags.writeable = False
    return PhaseTrajectory(out, system, scheme, tuple(substepped))


def energy(c, system: AllenCahn) -> float:
    """Ginzburg-Landau energy with forward-difference gradients.

    The edge weights are chosen so that the gradient part equals
    ``eps/2 <A c, c>`` for the reflected Laplacian, which makes implicit
    Euler exactly energy-stable for ``tau <= eps^2``.
    """
    g = system.grid
    eps = system.epsilon
    c = np.asarray(c, dtype=float)
    wy = np.full(g.ny, g.hy)
    wy[[0, -1]] *= 0.5
    wx = np.full(g.nx, g.hx)
    wx[[0, -1]] *= 0.5
    dx = np.diff(c, axis=-1) / g.hx
    dy = np.diff(c, axis=-2) / g.hy
    grad_sq = (np.sum(dx * dx * wy[:, None]) * g.hx
               + np.sum(dy * dy * wx[None, :]) * g.hy)
    bulk = np.sum(system.potential.node_value(c) * g.weights)
    return float(0.5 * eps * grad_sq + bulk / eps)


@dataclass(frozen=True)
class InterfaceInfo:
    radius: float
    components: int
    area: float


def extract_interface(c, grid: SpatialGrid, level: float = 0.0) -> InterfaceInfo:
    """Area-equivalent radius and 4-connected component count of ``{c > level}``."""
    c = np.asarray(c, dtype=float)
    grid.check(c)
    mask = c > level
    if not mask.any():
        return InterfaceInfo(0.0, 0, 0.0)
    area = float(np.sum(grid.weights[mask]))
    _, count = ndimage.label(mask)
    return InterfaceInfo(float(np.sqrt(area / np.pi)), int(count), area)
