"""Assemble a configured scenario, run it and write its CSV outputs.

Outputs in the run directory (all CSV, see :mod:`acopt.io`):

``history.csv``        optimizer log ``iter,j,grad_norm,delta,cg_iters,status,forward_solves``
``warm_history.csv``   semi-implicit warm-start log (when enabled)
``stages.csv``         one row per homotopy stage (obstacle scenarios)
``control_norm.csv``   ``step,t,norm[,norm_f1,...]`` with ``norm = |f(t_m)|_L2``
``interface.csv``      ``step,t,energy,radius,components,area,velocity`` (scalar)
``phases.csv``         ``step,t,energy,mass_1..N,simplex_drift`` (vector)
``state_MMMM.csv``     state snapshots, ``control_MMMM.csv`` control snapshots
``summary.csv``        ``key,value`` pairs
"""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adjoint import Tracking
from .config import ScenarioConfig
from .forward import AllenCahn, PhaseTrajectory, energy, extract_interface, solve_forward
from .grid import SpatialGrid, TimeGrid
from .io import write_field, write_history, write_table
from .mpec import HomotopySchedule, StageRecord, solve_mpec
from .potentials import DoubleWell, RegularizedObstacle
from .reduced import ReducedProblem
from .trn import TrustRegionState, trn_minimize, warm_start

log = logging.getLogger(__name__)

SCHEME_ALIASES = {"implicit": "implicit", "semi": "semi-implicit", "semi-implicit": "semi-implicit"}


@dataclass
class Scenario:
    config: ScenarioConfig
    system: AllenCahn
    c0: np.ndarray
    tracking: Tracking
    scheme: str

    @property
    def grid(self) -> SpatialGrid:
        return self.system.grid

    def problem(self, **kw) -> ReducedProblem:
        return ReducedProblem(self.system, self.tracking, self.c0, self.scheme, **kw)

    def trust_region(self) -> TrustRegionState:
        cfg = self.config
        return TrustRegionState(tol=cfg.tol, tol_cg=cfg.tol_cg, forcing=cfg.forcing,
                                max_iter=cfg.max_iter)

    def schedule(self) -> HomotopySchedule:
        cfg = self.config
        return HomotopySchedule(cfg.sigma_0, cfg.sigma_factor, cfg.sigma_min, cfg.alpha_0,
                                cfg.alpha_min)


def build(cfg: ScenarioConfig, scheme: str | None = None) -> Scenario:
    grid = cfg.grid()
    potential = RegularizedObstacle(cfg.sigma, cfg.N) if cfg.obstacle else DoubleWell()
    system = AllenCahn(grid, TimeGrid(cfg.T, cfg.M), cfg.epsilon, potential)
    eps = cfg.epsilon
    c0 = cfg.c0.build(grid, eps)
    c_d = None if cfg.c_d is None else cfg.c_d.build(grid, eps)
    tracking = Tracking(cfg.nu_T, cfg.nu_d, cfg.nu_f, cfg.target.build(grid, eps), c_d)
    scheme = SCHEME_ALIASES[scheme or cfg.scheme]
    if not cfg.obstacle and scheme == "implicit" and system.tau > eps**2:
        log.warning("tau = %.3g exceeds eps^2 = %.3g: the implicit step may not be unique",
                    system.tau, eps**2)
    return Scenario(cfg, system, c0, tracking, scheme)


@dataclass
class RunReport:
    scenario: str
    exit_code: int
    message: str
    outputs: list[Path] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def control_norms(f, grid: SpatialGrid) -> np.ndarray:
    """``|f(t_m)|_L2(Omega)`` for ``m = 1..M`` (all components together)."""
    f = np.asarray(f, dtype=float)
    axes = tuple(range(1, f.ndim))
    return np.sqrt(np.sum(f * f * grid.weights, axis=axes))


def component_counts(traj: PhaseTrajectory, level: float = 0.0) -> list[int]:
    return [extract_interface(c, traj.system.grid, level).components for c in traj.c]


def _state_rows(traj: PhaseTrajectory):
    sys = traj.system
    t = sys.time.nodes
    if sys.vector:
        header = ["step", "t", "energy"] + [f"mass_{i + 1}" for i in range(sys.potential.N)] \
            + ["simplex_drift"]
        rows = []
        for m, c in enumerate(traj.c):
            masses = np.sum(c * sys.grid.weights, axis=(-2, -1))
            rows.append([m, t[m], energy(c, sys), *masses,
                         float(np.max(np.abs(c.sum(axis=0) - 1.0)))])
        return "phases.csv", header, rows
    header = ["step", "t", "energy", "radius", "components", "area", "velocity"]
    rows = []
    prev = None
    for m, c in enumerate(traj.c):
        info = extract_interface(c, sys.grid)
        vel = "" if prev is None else -(info.radius - prev) / sys.tau
        rows.append([m, t[m], energy(c, sys), info.radius, info.components, info.area, vel])
        prev = info.radius
    return "interface.csv", header, rows


def _write_common(sc: Scenario, traj: PhaseTrajectory, f, out: Path, summary: dict):
    outputs = []
    name, header, rows = _state_rows(traj)
    outputs.append(write_table(header, rows, out / name))
    for m in sc.config.snapshot_steps():
        outputs.append(write_field(traj.c[m], sc.grid, out / f"state_{m:04d}.csv"))
        if f is not None and m >= 1:
            outputs.append(write_field(f[m - 1], sc.grid, out / f"control_{m:04d}.csv"))
    if f is not None:
        norms = control_norms(f, sc.grid)
        header = ["step", "t", "norm"]
        comps = []
        if sc.system.vector:
            header += [f"norm_f{i + 1}" for i in range(f.shape[1])]
            comps = [np.sqrt(np.sum(f[:, i] ** 2 * sc.grid.weights, axis=(-2, -1)))
                     for i in range(f.shape[1])]
        t = sc.system.time.nodes
        rows = [[m, t[m], norms[m - 1], *(c[m - 1] for c in comps)]
                for m in range(1, sc.system.time.M + 1)]
        outputs.append(write_table(header, rows, out / "control_norm.csv"))
        summary["peak_control_step"] = int(np.argmax(norms)) + 1
    outputs.append(write_table(["key", "value"], sorted(summary.items()), out / "summary.csv"))
    return outputs


def run_scenario(cfg: ScenarioConfig, out_dir, forward_only: bool = False,
                 scheme: str | None = None) -> RunReport:
    out = Path(out_dir)
    sc = build(cfg, scheme)
    summary = {"scenario": cfg.scenario, "scheme": sc.scheme, "nx": cfg.nx, "ny": cfg.ny,
               "M": cfg.M}
    if forward_only or cfg.mode == "forward":
        f = np.zeros((cfg.M, *sc.system.field_shape))
        traj = solve_forward(sc.c0, f, sc.system, sc.scheme)
        summary["mode"] = "forward"
        summary["substepped"] = len(traj.substepped)
        outputs = _write_common(sc, traj, None, out, summary)
        return RunReport(cfg.scenario, 0, "forward run complete", outputs, summary)
    if cfg.obstacle:
        return _run_mpec(sc, out, summary)
    return _run_trn(sc, out, summary)


def _run_trn(sc: Scenario, out: Path, summary: dict) -> RunReport:
    problem = sc.problem()
    outputs = []
    f0 = problem.zeros()
    summary["mode"] = "optimize"
    summary["j_initial"] = problem.objective(f0)
    if sc.config.warm_start:
        f0, wres = warm_start(problem, f0, state=sc.trust_region())
        if wres is not None:
            outputs.append(write_history(wres.history, out / "warm_history.csv"))
            summary["warm_start_solves"] = wres.extra_solves
    res = trn_minimize(problem, f0, sc.trust_region())
    traj = problem.state(res.f)
    outputs.append(write_history(res.history, out / "history.csv"))
    summary.update(j_final=res.j, grad_norm=res.grad_norm, converged=res.converged,
                   iterations=len(res.history) - 1, pde_solves=problem.pde_solves,
                   substepped=len(traj.substepped))
    outputs += _write_common(sc, traj, res.f, out, summary)
    if not res.converged:
        return RunReport(sc.config.scenario, 2,
                         f"TRN stopped at |grad j| = {res.grad_norm:.3e} without converging",
                         outputs, summary)
    return RunReport(sc.config.scenario, 0, "converged", outputs, summary)


STAGE_COLUMNS = tuple(f.name for f in dataclasses.fields(StageRecord))


def _run_mpec(sc: Scenario, out: Path, summary: dict) -> RunReport:
    res = solve_mpec(sc.system, sc.tracking, sc.c0, sc.schedule(), sc.trust_region(),
                     scheme=sc.scheme)
    outputs = [write_table(STAGE_COLUMNS, [[getattr(s, k) for k in STAGE_COLUMNS]
                                           for s in res.stages], out / "stages.csv")]
    for k, hist in enumerate(res.histories):
        outputs.append(write_history(hist, out / f"history_stage{k}.csv"))
    outputs.append(write_history(res.histories[-1], out / "history.csv"))
    last = res.stages[-1]
    summary.update(mode="mpec", stages=len(res.stages), sigma_final=last.sigma,
                   J_final=last.J, pairing=last.pairing, min_c=last.min_c,
                   alpha_reached=res.alpha_reached, floor_hit=res.floor_hit,
                   simplex_drift=max(s.simplex_drift for s in res.stages))
    outputs += _write_common(sc, res.trajectory, res.f, out, summary)
    if res.failed_stage is not None:
        return RunReport(sc.config.scenario, 2,
                         f"homotopy stage {res.failed_stage} failed; kept stage "
                         f"{res.failed_stage - 1}", outputs, summary)
    msg = "sigma floor reached before alpha_min" if res.floor_hit else "homotopy complete"
    if not math.isnan(res.alpha_reached):
        msg += f" (alpha = {res.alpha_reached:.0e})"
    return RunReport(sc.config.scenario, 0, msg, outputs, summary)
