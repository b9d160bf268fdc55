"""Discrete adjoint and second-order sweeps.

Everything here is the exact derivative of the time-stepping in
:mod:`acopt.forward` (discretize-then-optimize), for both schemes.  With the
Lagrangian ``J - tau * sum_m <p_m, R_m>`` the adjoint of the implicit scheme
satisfies, backwards in ``m``,

    K_m p_m = nu_d Pi (c_m - c_d,m) + eps/tau p_{m+1},
    eps p_{M+1} = nu_T Pi (c_M - c_T),

with ``K_m = eps/tau + eps A + (1/eps) Pi D2Psi(c_m)``.  Storage convention:
``p[m-1]`` holds the multiplier of step ``m`` (the one paired with ``f_m`` in
the gradient) and ``p[M]`` holds the terminal datum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import AllenCahn, PhaseTrajectory


@dataclass(frozen=True)
class Tracking:
    """Objective weights and targets.

    ``c_d`` is either one field (constant in time) or a stack of ``M``
    fields for ``t_1..t_M``.
    """

    nu_T: float
    nu_d: float
    nu_f: float
    c_T: np.ndarray
    c_d: np.ndarray | None = None

    def __post_init__(self):
        if min(self.nu_T, self.nu_d, self.nu_f) < 0:
            raise ValueError("weights must be non-negative")

    def desired(self, m: int):
        """Desired state at ``t_m`` for ``m = 1..M``."""
        if self.c_d is None:
            return 0.0
        cd = np.asarray(self.c_d)
        return cd[m - 1] if cd.ndim == self.c_T.ndim + 1 else cd


@dataclass(frozen=True)
class AdjointTrajectory:
    p: np.ndarray
    scheme: str

    @property
    def steps(self) -> np.ndarray:
        """Multipliers paired with ``f_1..f_M``."""
        return self.p[:-1]


def _check(traj: PhaseTrajectory, scheme):
    scheme = traj.scheme if scheme is None else scheme
    if scheme not in ("implicit", "semi-implicit"):
        raise ValueError(f"unknown scheme {scheme!r}")
    return scheme


def solve_adjoint(traj: PhaseTrajectory, tracking: Tracking, scheme=None) -> AdjointTrajectory:
    """Backward sweep of the discrete adjoint.

    ``scheme`` defaults to the scheme that produced ``traj``.  Passing
    ``"implicit"`` for a semi-implicit trajectory gives the mismatched
    optimize-then-discretize style gradient.
    """
    scheme = _check(traj, scheme)
    sys: AllenCahn = traj.system
    eps, a, M = sys.epsilon, sys.epsilon / sys.tau, sys.time.M
    pot = sys.potential
    c = traj.c
    p = np.zeros((M + 1, *sys.field_shape))
    p[M] = sys.proj(tracking.nu_T * (c[M] - tracking.c_T)) / eps
    for m in range(M, 0, -1):
        rhs = a * p[m]
        if tracking.nu_d:
            rhs = rhs + tracking.nu_d * sys.proj(c[m] - tracking.desired(m))
        if scheme == "implicit":
            p[m - 1] = sys.solve(pot.hess_diag(c[m]), rhs)
        else:
            if m < M:
                rhs = rhs - sys.proj(pot.hess_diag(c[m]) * p[m]) / eps
            p[m - 1] = sys.solve(None, rhs)
    p.flags.writeable = False
    return AdjointTrajectory(p, scheme)


def linearized_forward(traj: PhaseTrajectory, dfield, scheme=None) -> np.ndarray:
    """State sensitivity ``dc[m]``, ``m = 0..M``, to a control direction."""
    scheme = _check(traj, scheme)
    sys = traj.system
    eps, a, M = sys.epsilon, sys.epsilon / sys.tau, sys.time.M
    pot = sys.potential
    c = traj.c
    dfield = np.asarray(dfield, dtype=float)
    dc = np.zeros((M + 1, *sys.field_shape))
    for m in range(1, M + 1):
        rhs = a * dc[m - 1] + dfield[m - 1]
        if scheme == "implicit":
            dc[m] = sys.solve(pot.hess_diag(c[m]), rhs)
        else:
            rhs = rhs - sys.proj(pot.hess_diag(c[m - 1]) * dc[m - 1]) / eps
            dc[m] = sys.solve(None, rhs)
    return dc


def linearized_backward(traj: PhaseTrajectory, adj: AdjointTrajectory, dc, tracking: Tracking,
                        tracking_curvature: bool = True) -> np.ndarray:
    """Second-order adjoint ``dp`` (same storage as :class:`AdjointTrajectory`).

    ``tracking_curvature`` keeps the ``nu_d dc`` source; it vanishes when
    ``nu_d = 0`` and is required for an exact Hessian otherwise.
    """
    scheme = adj.scheme
    sys = traj.system
    eps, a, M = sys.epsilon, sys.epsilon / sys.tau, sys.time.M
    pot = sys.potential
    c, p = traj.c, adj.p
    dp = np.zeros((M + 1, *sys.field_shape))
    dp[M] = sys.proj(tracking.nu_T * dc[M]) / eps
    for m in range(M, 0, -1):
        rhs = a * dp[m]
        if tracking_curvature and tracking.nu_d:
            rhs = rhs + tracking.nu_d * dc[m]
        if scheme == "implicit":
            rhs = rhs - sys.proj(pot.third_diag(c[m]) * dc[m] * p[m - 1]) / eps
            dp[m - 1] = sys.solve(pot.hess_diag(c[m]), rhs)
        else:
            if m < M:
                rhs = rhs - sys.proj(pot.hess_diag(c[m]) * dp[m]
                                     + pot.third_diag(c[m]) * dc[m] * p[m]) / eps
            dp[m - 1] = sys.solve(None, rhs)
    return dp
