"""Penalization homotopy for the multi-obstacle control problem.

Each stage minimises the reduced problem with the C^2 penalty
``psi_sigma`` by TRN, warm-started from the previous stage, and then recovers
the slack ``xi = -D psi_hat(c)`` and the adjoint multiplier
``zeta = -D^2 psi_hat(c) p``.  ``sigma`` shrinks geometrically; the relaxed
complementarity level ``alpha`` is tightened by factors of ten each time a
stage satisfies ``|(xi, c)| <= eps * alpha``.

Note that ``xi >= 0`` is supported on ``{c < 0}``, so ``(xi, c) <= 0`` for
every penalized state; the homotopy therefore tests its magnitude.
"""
from __future__ import annotations

import copy
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .adjoint import Tracking
from .forward import AllenCahn, PhaseTrajectory
from .grid import SpatialGrid, TimeGrid
from .potentials import RegularizedObstacle
from .reduced import ReducedProblem
from .trn import OptimResult, TrustRegionState, trn_minimize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HomotopySchedule:
    sigma_0: float = 0.1
    sigma_factor: float = 0.1
    sigma_min: float = 1e-6
    alpha_0: float = 1.0
    alpha_min: float = 1e-9

    def __post_init__(self):
        if not (0 < self.sigma_min <= self.sigma_0 < 0.25):
            raise ValueError("need 0 < sigma_min <= sigma_0 < 1/4")
        if not (0 < self.sigma_factor < 1):
            raise ValueError("sigma_factor must lie in (0, 1)")
        if not (0 < self.alpha_min <= self.alpha_0):
            raise ValueError("need 0 < alpha_min <= alpha_0")

    def sigmas(self) -> list[float]:
        out = [self.sigma_0]
        while out[-1] * self.sigma_factor >= self.sigma_min * (1 - 1e-12):
            out.append(out[-1] * self.sigma_factor)
        return out


@dataclass(frozen=True)
class ComplementarityReport:
    min_c: float
    min_xi: float
    pairing: float
    negativity: float


def _st_inner(a, b, grid: SpatialGrid, time: TimeGrid) -> float:
    return time.tau * float(np.sum(a * b * grid.weights))


def complementarity_report(c, xi, grid: SpatialGrid, time: TimeGrid) -> ComplementarityReport:
    """Sign and pairing residuals of ``c >= 0, xi >= 0, (xi, c) = 0`` over ``t_1..t_M``."""
    c = np.asarray(c, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if c.shape != xi.shape:
        raise ValueError(f"shape mismatch {c.shape} vs {xi.shape}")
    neg = np.maximum(0.0, -c)
    return ComplementarityReport(
        float(c.min()), float(xi.min()), _st_inner(xi, c, grid, time),
        math.sqrt(_st_inner(neg, neg, grid, time)),
    )


def stationarity_diagnostics(c, p, xi, zeta, grid: SpatialGrid, time: TimeGrid):
    """``((zeta, p), (zeta, max(0, c)), (p, xi))`` in L2(Omega_T)."""
    return (
        _st_inner(zeta, p, grid, time),
        _st_inner(zeta, np.maximum(0.0, c), grid, time),
        _st_inner(p, xi, grid, time),
    )


def multipliers(traj: PhaseTrajectory, p_steps):
    """Slack ``xi`` and adjoint multiplier ``zeta`` at ``t_1..t_M``."""
    pot: RegularizedObstacle = traj.system.potential
    c = traj.c[1:]
    return -pot.penalty_grad(c), -pot.penalty_hess(c) * p_steps


@dataclass
class StageRecord:
    stage: int
    sigma: float
    alpha: float
    J: float
    pairing: float
    min_c: float
    min_xi: float
    negativity: float
    xi_half_sq: float
    zeta_p: float
    zeta_cplus: float
    p_xi: float
    simplex_drift: float
    trn_iters: int
    grad_norm: float
    converged: bool
    pde_solves: int


@dataclass
class MPECResult:
    f: np.ndarray
    trajectory: PhaseTrajectory
    xi: np.ndarray
    zeta: np.ndarray
    p: np.ndarray
    stages: list[StageRecord]
    histories: list[list] = field(default_factory=list)
    alpha_reached: float = math.nan
    floor_hit: bool = False
    failed_stage: int | None = None

    def stage_rows(self) -> list[dict]:
        return [asdict(s) for s in self.stages]


def solve_mpec(system: AllenCahn, tracking: Tracking, c0, schedule: HomotopySchedule,
               trn_state: TrustRegionState | None = None, f0=None,
               scheme: str = "implicit") -> MPECResult:
    if not system.vector:
        raise ValueError("the homotopy needs an N-phase obstacle system")
    N = system.potential.N
    template = trn_state or TrustRegionState()
    f = np.zeros((system.time.M, *system.field_shape)) if f0 is None else np.array(f0, float)
    eps = system.epsilon
    alpha = schedule.alpha_0
    result: MPECResult | None = None
    alpha_reached = math.nan
    stages: list[StageRecord] = []
    histories = []
    for k, sigma in enumerate(schedule.sigmas()):
        sys_k = system.with_potential(RegularizedObstacle(sigma, N))
        problem = ReducedProblem(sys_k, tracking, c0, scheme)
        state = copy.deepcopy(template)
        state.history = []
        try:
            res: OptimResult = trn_minimize(problem, f, state)
        except Exception as exc:  # noqa: BLE001 - report the stage, keep the best so far
            log.warning("homotopy stage %d (sigma=%.1e) failed: %s", k, sigma, exc)
            if result is None:
                raise
            result.failed_stage = k
            return result
        f = res.f
        traj = problem.state(f)
        p_steps = problem.adjoint(f).steps
        xi, zeta = multipliers(traj, p_steps)
        c = traj.c[1:]
        rep = complementarity_report(c, xi, sys_k.grid, sys_k.time)
        diag = stationarity_diagnostics(c, p_steps, xi, zeta, sys_k.grid, sys_k.time)
        residual = abs(rep.pairing)
        # alpha only ever tightens: it holds the smallest level met so far
        met = residual <= eps * alpha
        if met:
            while alpha / 10.0 >= schedule.alpha_min * (1 - 1e-9) and residual <= eps * alpha / 10.0:
                alpha /= 10.0
        stages.append(StageRecord(
            stage=k, sigma=sigma, alpha=alpha if met else math.nan,
            J=problem.objective(f), pairing=rep.pairing, min_c=rep.min_c, min_xi=rep.min_xi,
            negativity=rep.negativity,
            xi_half_sq=0.5 * _st_inner(xi, xi, sys_k.grid, sys_k.time),
            zeta_p=diag[0], zeta_cplus=diag[1], p_xi=diag[2],
            simplex_drift=float(np.max(np.abs(np.sum(traj.c, axis=-3) - 1.0))),
            trn_iters=len(res.history) - 1, grad_norm=res.grad_norm, converged=res.converged,
            pde_solves=problem.pde_solves,
        ))
        histories.append(res.history)
        log.info("stage %d sigma=%.1e J=%.6e |(xi,c)|=%.3e min c=%.3e trn=%d",
                 k, sigma, stages[-1].J, residual, rep.min_c, stages[-1].trn_iters)
        if met:
            alpha_reached = alpha
        result = MPECResult(f, traj, xi, zeta, p_steps, stages, histories, alpha_reached)
        if met and alpha <= schedule.alpha_min * (1 + 1e-9):
            return result
    result.floor_hit = True
    log.warning("sigma floor %.1e reached before alpha_min", schedule.sigma_min)
    return result
