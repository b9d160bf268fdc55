"""Trust-region Newton with a Steihaug truncated-cg subproblem solver.

Also provides the Armijo steepest-descent baseline and the semi-implicit
warm start.  All three write the same history records so convergence logs
can be compared directly; ``forward_solves`` there counts every PDE solve
(nonlinear state, adjoint and each linearized sweep) as one unit.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

STATUSES = ("interior", "boundary", "negative_curvature", "max_cg")


@dataclass
class IterRecord:
    iter: int
    j: float
    grad_norm: float
    delta: float
    cg_iters: int
    status: str
    forward_solves: int


@dataclass
class TrustRegionState:
    delta: float = 1.0
    delta_max: float = 1e3
    eta_accept: float = 0.1
    eta_shrink: float = 0.25
    eta_expand: float = 0.75
    shrink: float = 0.25
    expand: float = 2.0
    tol: float = 1e-8
    tol_cg: float = 1e-13
    forcing: bool = False
    max_iter: int = 200
    max_cg: int = 1000
    history: list[IterRecord] = field(default_factory=list)
    converged: bool = False

    def __post_init__(self):
        if not (0 < self.eta_accept <= self.eta_shrink < self.eta_expand < 1):
            raise ValueError("need 0 < eta_accept <= eta_shrink < eta_expand < 1")
        if not (0 < self.delta <= self.delta_max):
            raise ValueError("need 0 < delta <= delta_max")


def _euclid(a, b):
    return float(np.vdot(a, b))


def steihaug_cg(grad, hess_apply, delta, tol_cg, max_iter, inner=_euclid):
    """Approximately minimise ``<g,s> + <Hs,s>/2`` subject to ``|s| <= delta``.

    Returns ``(step, status, cg_count, model_decrease)``.
    """
    g = np.asarray(grad, dtype=float)
    z = np.zeros_like(g)
    hz = np.zeros_like(g)
    r = g.copy()
    rr = inner(r, r)
    gnorm = math.sqrt(rr)
    if gnorm == 0.0:
        return z, "interior", 0, 0.0

    def decrease(s, hs):
        return -(inner(g, s) + 0.5 * inner(hs, s))

    def to_boundary(d):
        # largest theta >= 0 with |z + theta d| = delta
        zd, dd, zz = inner(z, d), inner(d, d), inner(z, z)
        disc = zd * zd + dd * (delta * delta - zz)
        return (-zd + math.sqrt(max(disc, 0.0))) / dd

    d = -r
    for k in range(1, max_iter + 1):
        hd = hess_apply(d)
        curv = inner(d, hd)
        if curv <= 0.0:
            theta = to_boundary(d)
            s, hs = z + theta * d, hz + theta * hd
            return s, "negative_curvature", k, decrease(s, hs)
        alpha = rr / curv
        z_next = z + alpha * d
        if math.sqrt(inner(z_next, z_next)) >= delta:
            theta = to_boundary(d)
            s, hs = z + theta * d, hz + theta * hd
            return s, "boundary", k, decrease(s, hs)
        z = z_next
        hz = hz + alpha * hd
        r = r + alpha * hd
        rr_new = inner(r, r)
        if math.sqrt(rr_new) <= tol_cg * gnorm:
            return z, "interior", k, decrease(z, hz)
        d = -r + (rr_new / rr) * d
        rr = rr_new
    return z, "max_cg", max_iter, decrease(z, hz)


@dataclass
class OptimResult:
    f: np.ndarray
    history: list[IterRecord]
    converged: bool
    j: float
    grad_norm: float
    extra_solves: int = 0


def trn_minimize(problem, f0, state: TrustRegionState | None = None) -> OptimResult:
    state = TrustRegionState() if state is None else state
    f = np.array(f0, dtype=float)
    j = problem.objective(f)
    g = problem.gradient(f)
    gn = problem.norm(g)
    delta = state.delta
    hist = state.history
    for k in range(state.max_iter):
        if gn < state.tol:
            hist.append(IterRecord(k, j, gn, delta, 0, "converged", problem.pde_solves))
            state.converged = True
            break
        tol_cg = min(0.5, math.sqrt(gn)) if state.forcing else state.tol_cg
        tol_cg = max(tol_cg, state.tol_cg)
        s, status, ncg, pred = steihaug_cg(
            g, lambda v: problem.hess_vec(f, v), delta, tol_cg, state.max_cg, problem.inner)
        f_trial = f + s
        j_trial = problem.objective(f_trial)
        ared = j - j_trial
        noise = 1e-14 * max(abs(j), 1e-300)
        if pred <= noise and abs(ared) <= 10 * noise:
            rho = 1.0 if ared >= 0 else 0.0
        else:
            rho = ared / pred if pred > 0 else -np.inf
        accepted = rho >= state.eta_accept and ared >= 0
        hist.append(IterRecord(k, j, gn, delta, ncg,
                               status if accepted else f"{status}:rejected",
                               problem.pde_solves))
        log.debug("trn %d j=%.6e |g|=%.3e delta=%.3e cg=%d %s rho=%.3f",
                  k, j, gn, delta, ncg, status, rho)
        snorm = problem.norm(s)
        if rho < state.eta_shrink:
            delta = state.shrink * min(delta, snorm) if snorm > 0 else state.shrink * delta
        elif rho > state.eta_expand and status != "interior":
            delta = min(state.expand * delta, state.delta_max)
        if accepted:
            f, j = f_trial, j_trial
            g = problem.gradient(f)
            gn = problem.norm(g)
        if delta < 1e-300:
            break
    else:
        if gn < state.tol:
            state.converged = True
            hist.append(IterRecord(state.max_iter, j, gn, delta, 0, "converged",
                                   problem.pde_solves))
    if not state.converged:
        hist.append(IterRecord(len(hist), j, gn, delta, 0, "max_iter", problem.pde_solves))
    state.delta = delta
    return OptimResult(f, hist, state.converged, j, gn)


def gradient_descent_reference(problem, f0, tol, max_iter=10000, c1=1e-4,
                               max_solves=None) -> OptimResult:
    """Steepest descent with Armijo backtracking; ``cg_iters`` holds backtracks.

    ``max_solves`` caps the cumulative PDE solves (status ``"budget"``).
    """
    f = np.array(f0, dtype=float)
    j = problem.objective(f)
    g = problem.gradient(f)
    gn = problem.norm(g)
    t = 1.0
    hist: list[IterRecord] = []
    for k in range(max_iter):
        if gn < tol:
            hist.append(IterRecord(k, j, gn, t, 0, "converged", problem.pde_solves))
            return OptimResult(f, hist, True, j, gn)
        if max_solves is not None and problem.pde_solves >= max_solves:
            hist.append(IterRecord(k, j, gn, t, 0, "budget", problem.pde_solves))
            return OptimResult(f, hist, False, j, gn)
        backtracks = 0
        while True:
            f_trial = f - t * g
            j_trial = problem.objective(f_trial)
            if j_trial <= j - c1 * t * gn * gn:
                break
            t *= 0.5
            backtracks += 1
            if t < 1e-20:
                hist.append(IterRecord(k, j, gn, t, backtracks, "line_search_failed",
                                       problem.pde_solves))
                return OptimResult(f, hist, False, j, gn)
        hist.append(IterRecord(k, j, gn, t, backtracks, "armijo", problem.pde_solves))
        f, j = f_trial, j_trial
        g = problem.gradient(f)
        gn = problem.norm(g)
        t *= 2.0
    hist.append(IterRecord(max_iter, j, gn, t, 0, "max_iter", problem.pde_solves))
    return OptimResult(f, hist, gn < tol, j, gn)


def warm_start(problem, f0, tol=1e-3, state: TrustRegionState | None = None):
    """Approximate minimiser of the semi-implicit reduced problem.

    Returns ``(f, result)``; ``result`` is ``None`` when ``f0`` already meets
    ``tol`` or when the semi-implicit run fails (``f0`` is returned then).
    """
    semi = problem.with_scheme("semi-implicit")
    try:
        if semi.norm(semi.gradient(f0)) < tol:
            return np.array(f0, dtype=float), None
        state = state or TrustRegionState()
        state.tol = tol
        res = trn_minimize(semi, f0, state)
    except Exception as exc:  # noqa: BLE001 - any failure falls back to f0
        warnings.warn(f"warm start failed ({exc}); using the initial control", RuntimeWarning,
                      stacklevel=2)
        return np.array(f0, dtype=float), None
    res.extra_solves = semi.pde_solves
    return res.f, res
