"""Reduced objective ``j(f) = J(S(f), f)`` with gradient and Hessian products.

Controls are stacks ``f[m-1]`` for ``t_1..t_M`` and live in the space-time
inner product ``tau * sum_m <u_m, v_m>`` (right-endpoint rule), in which the
gradient is ``(nu_f/eps) f + p``.
"""
from __future__ import annotations

import hashlib

import numpy as np

from .adjoint import (AdjointTrajectory, Tracking, linearized_backward, linearized_forward,
                      solve_adjoint)
from .forward import AllenCahn, PhaseTrajectory, solve_forward


def fingerprint(f: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(f, dtype=float).tobytes(), digest_size=16).digest()


class ReducedProblem:
    """Single-writer cache around the forward/adjoint solvers.

    ``adjoint_scheme`` may differ from ``scheme`` only to study the
    inconsistent gradient of a mismatched discretisation.
    """

    def __init__(self, system: AllenCahn, tracking: Tracking, c0, scheme="implicit",
                 adjoint_scheme=None, tracking_curvature=True):
        self.system = system
        self.tracking = tracking
        self.c0 = np.asarray(c0, dtype=float)
        self.scheme = scheme
        self.adjoint_scheme = scheme if adjoint_scheme is None else adjoint_scheme
        self.tracking_curvature = tracking_curvature
        self.counts = {"forward": 0, "adjoint": 0, "linearized": 0}
        # two entries: the current iterate and the latest trial point
        self._cache: dict[bytes, list] = {}

    @property
    def control_shape(self) -> tuple[int, ...]:
        return (self.system.time.M, *self.system.field_shape)

    @property
    def pde_solves(self) -> int:
        return sum(self.counts.values())

    def zeros(self) -> np.ndarray:
        return np.zeros(self.control_shape)

    def inner(self, a, b) -> float:
        return self.system.tau * float(np.sum(a * b * self.system.grid.weights))

    def norm(self, a) -> float:
        return float(np.sqrt(self.inner(a, a)))

    def with_scheme(self, scheme: str) -> "ReducedProblem":
        return ReducedProblem(self.system, self.tracking, self.c0, scheme,
                              tracking_curvature=self.tracking_curvature)

    def _validate(self, f):
        f = np.asarray(f, dtype=float)
        if f.shape != self.control_shape:
            raise ValueError(f"control shape {f.shape} != {self.control_shape}")
        if self.system.vector:
            drift = np.max(np.abs(np.sum(f, axis=-3)))
            if drift > 1e-9 * max(1.0, np.max(np.abs(f))):
                raise ValueError(f"control leaves the tangent space (|sum f_i| = {drift:.2e})")
        return f

    def _entry(self, f) -> list:
        f = self._validate(f)
        key = fingerprint(f)
        entry = self._cache.pop(key, None)
        if entry is None:
            entry = [solve_forward(self.c0, f, self.system, self.scheme), None]
            self.counts["forward"] += 1
        self._cache[key] = entry
        while len(self._cache) > 2:
            del self._cache[next(iter(self._cache))]
        return entry

    def state(self, f) -> PhaseTrajectory:
        return self._entry(f)[0]

    def adjoint(self, f) -> AdjointTrajectory:
        entry = self._entry(f)
        if entry[1] is None:
            entry[1] = solve_adjoint(entry[0], self.tracking, self.adjoint_scheme)
            self.counts["adjoint"] += 1
        return entry[1]

    def objective_parts(self, f) -> dict[str, float]:
        traj = self.state(f)
        tr, sys = self.tracking, self.system
        M = sys.time.M
        dT = traj.c[M] - tr.c_T
        parts = {"terminal": 0.5 * tr.nu_T * sys.inner(dT, dT), "tracking": 0.0}
        if tr.nu_d:
            acc = 0.0
            for m in range(1, M + 1):
                d = traj.c[m] - tr.desired(m)
                acc += sys.inner(d, d)
            parts["tracking"] = 0.5 * tr.nu_d * sys.tau * acc
        parts["control"] = 0.5 * tr.nu_f / sys.epsilon * self.inner(f, f)
        return parts

    def objective(self, f) -> float:
        return float(sum(self.objective_parts(f).values()))

    def gradient(self, f) -> np.ndarray:
        f = self._validate(f)
        adj = self.adjoint(f)
        return self.tracking.nu_f / self.system.epsilon * f + adj.steps

    def hess_vec(self, f, df) -> np.ndarray:
        traj = self.state(f)
        adj = self.adjoint(f)
        df = np.asarray(df, dtype=float)
        dc = linearized_forward(traj, df, self.adjoint_scheme)
        dp = linearized_backward(traj, adj, dc, self.tracking, self.tracking_curvature)
        self.counts["linearized"] += 2
        return self.tracking.nu_f / self.system.epsilon * df + dp[:-1]


def eval_objective(problem: ReducedProblem, f) -> float:
    return problem.objective(f)


def eval_gradient(problem: ReducedProblem, f) -> np.ndarray:
    return problem.gradient(f)


def hess_vec(problem: ReducedProblem, f, df) -> np.ndarray:
    return problem.hess_vec(f, df)
