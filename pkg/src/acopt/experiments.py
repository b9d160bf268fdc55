"""Measurements behind the reproduction checks and the scripts in ``scripts/``.

Each function takes solver objects and returns plain numbers, so the same
code backs the acceptance tests and the command-line experiment runners.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig, load_config
from .forward import PhaseTrajectory, energy, extract_interface
from .reduced import ReducedProblem
from .scenarios import component_counts, control_norms
from .trn import IterRecord, TrustRegionState, gradient_descent_reference, trn_minimize

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


def load_named(name: str, **overrides) -> ScenarioConfig:
    cfg = load_config(CONFIG_DIR / f"{name}.cfg")
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _direction(rng, problem: ReducedProblem):
    d = rng.standard_normal(problem.control_shape)
    if problem.system.vector:
        d -= d.mean(axis=1, keepdims=True)
    return d


def gradient_errors(problem: ReducedProblem, f, n_dirs=20, h=1e-5, seed=0) -> np.ndarray:
    """``|fd - <grad j, d>| / |<grad j, d>|`` for random directions, central differences."""
    rng = np.random.default_rng(seed)
    g = problem.gradient(f)
    errs = []
    for _ in range(n_dirs):
        d = _direction(rng, problem)
        ad = problem.inner(g, d)
        fd = (problem.objective(f + h * d) - problem.objective(f - h * d)) / (2 * h)
        errs.append(abs(fd - ad) / abs(ad))
    return np.array(errs)


def hessian_asymmetry(problem: ReducedProblem, f, n_pairs=10, seed=1) -> np.ndarray:
    """``|<Hu, v> - <u, Hv>| / max(|<Hu, v>|, |<u, Hv>|)`` for random pairs."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_pairs):
        u, v = _direction(rng, problem), _direction(rng, problem)
        a = problem.inner(problem.hess_vec(f, u), v)
        b = problem.inner(u, problem.hess_vec(f, v))
        out.append(abs(a - b) / max(abs(a), abs(b)))
    return np.array(out)


@dataclass
class CurvatureFit:
    slope: float
    intercept: float
    steps_used: int
    max_energy_increase: float


def mean_curvature_fit(traj: PhaseTrajectory) -> CurvatureFit:
    """Least-squares slope of ``R(t)^2`` while ``R > 3 eps``, plus energy monotonicity."""
    sys = traj.system
    t = sys.time.nodes
    R = np.array([extract_interface(c, sys.grid).radius for c in traj.c])
    keep = R > 3 * sys.epsilon
    slope, intercept = np.polyfit(t[keep], R[keep] ** 2, 1)
    E = np.array([energy(c, sys) for c in traj.c])
    return CurvatureFit(float(slope), float(intercept), int(keep.sum()),
                        float(np.max(np.diff(E))))


@dataclass
class SolverComparison:
    trn_converged: bool
    trn_solves: int
    trn_grad_norm: float
    gd_converged: bool
    gd_solves: int
    gd_grad_norm: float
    trn_history: list
    gd_history: list


def trn_vs_gradient(problem_factory, tol=1e-6, gd_budget_factor=1.0,
                    gd_max_iter=100000) -> SolverComparison:
    """Cumulative PDE solves to reach ``tol``; descent is stopped once it exceeds TRN's count."""
    trn_problem = problem_factory()
    res = trn_minimize(trn_problem, trn_problem.zeros(), TrustRegionState(tol=tol))
    gd_problem = problem_factory()
    budget = int(math.ceil(gd_budget_factor * trn_problem.pde_solves))
    gd = gradient_descent_reference(gd_problem, gd_problem.zeros(), tol, gd_max_iter,
                                    max_solves=budget + 1)
    return SolverComparison(res.converged, trn_problem.pde_solves, res.grad_norm,
                            gd.converged, gd_problem.pde_solves, gd.grad_norm,
                            res.history, gd.history)


def accepted_residuals(history: list[IterRecord]):
    """Gradient norms at the distinct iterates and the status of the step taken from each."""
    rows = [h for h in history if not h.status.endswith(":rejected")]
    return [h.grad_norm for h in rows], [h.status for h in rows]


def superlinear_tail(history: list[IterRecord], n=3):
    """Ratios over the last ``n`` accepted steps and whether they decrease and stay interior."""
    res, status = accepted_residuals(history)
    tail = res[-(n + 1):]
    ratios = [b / a for a, b in zip(tail, tail[1:])]
    steps = status[-(n + 1):-1]
    decreasing = len(ratios) == n and all(b < a for a, b in zip(ratios, ratios[1:]))
    interior = len(steps) == n and all(s == "interior" for s in steps)
    return ratios, steps, decreasing, interior


@dataclass
class TopologyPeak:
    peak_step: int
    change_step: int | None
    counts: list[int]
    norms: np.ndarray


def topology_peak(traj: PhaseTrajectory, f) -> TopologyPeak:
    """Step of the largest ``|f(t_m)|`` and first step where ``{c > 0}`` goes from 1 to 2 parts."""
    counts = component_counts(traj)
    norms = control_norms(f, traj.system.grid)
    change = next((m for m in range(1, len(counts))
                   if counts[m - 1] == 1 and counts[m] == 2), None)
    return TopologyPeak(int(np.argmax(norms)) + 1, change, counts, norms)


def band_averages(field, grid, radii, cx=0.5, cy=0.5, half_width=None):
    """Weighted mean of ``field`` over thin rings ``| |x - x_c| - r | <= half_width``."""
    half_width = 1.5 * max(grid.hx, grid.hy) if half_width is None else half_width
    X, Y = grid.coords
    d = np.hypot(X - cx, Y - cy)
    out = []
    for r in radii:
        mask = np.abs(d - r) <= half_width
        w = grid.weights * mask
        out.append(float(np.sum(field * w) / np.sum(w)))
    return out
