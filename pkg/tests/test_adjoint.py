import numpy as np
import pytest

from acopt.adjoint import Tracking, linearized_forward, solve_adjoint
from acopt.forward import AllenCahn, solve_forward
from acopt.grid import SpatialGrid, TimeGrid
from acopt.potentials import DoubleWell, RegularizedObstacle, project_tangent
from acopt.profiles import rings3


def _system(M=4, T=4e-3, eps=0.2, n=9):
    return AllenCahn(SpatialGrid.square(-1.0, 1.0, n), TimeGrid(T, M), eps, DoubleWell())


def test_adjoint_vanishes_on_target():
    s = _system()
    c0 = np.ones(s.grid.shape)
    traj = solve_forward(c0, np.zeros((4, *s.grid.shape)), s)
    adj = solve_adjoint(traj, Tracking(1.0, 0.0, 0.01, c0))
    np.testing.assert_array_equal(adj.p, 0.0)
    # nu_d > 0 with c_d = c: the running source vanishes as well
    adj = solve_adjoint(traj, Tracking(1.0, 5.0, 0.01, c0, c_d=c0))
    np.testing.assert_array_equal(adj.p, 0.0)


@pytest.mark.parametrize("scheme", ["implicit", "semi-implicit"])
def test_spatially_constant_recursion(scheme):
    # constant fields see no Laplacian, so the sweep collapses to a scalar recursion
    M, T, eps = 5, 5e-3, 0.2
    s = _system(M=M, T=T, eps=eps)
    tau, a = s.tau, eps / s.tau
    f = np.array([0.3, -0.1, 0.2, 0.0, 0.5])
    control = f[:, None, None] * np.ones((M, *s.grid.shape))
    traj = solve_forward(np.full(s.grid.shape, 0.2), control, s, scheme)
    c = traj.c[:, 0, 0]
    nu_T, nu_d, cT, cd = 2.0, 3.0, 0.7, -0.4
    tr = Tracking(nu_T, nu_d, 0.0, np.full(s.grid.shape, cT), c_d=np.full(s.grid.shape, cd))
    p = solve_adjoint(traj, tr).p
    d2 = 3 * c**2 - 1
    ref = np.zeros(M + 1)
    ref[M] = nu_T * (c[M] - cT) / eps
    for m in range(M, 0, -1):
        if scheme == "implicit":
            ref[m - 1] = (a * ref[m] + nu_d * (c[m] - cd)) / (a + d2[m] / eps)
        else:
            lag = d2[m] * ref[m] / eps if m < M else 0.0
            ref[m - 1] = (a * ref[m] + nu_d * (c[m] - cd) - lag) / a
    np.testing.assert_allclose(p[:, 0, 0], ref, rtol=1e-11)
    np.testing.assert_allclose(p, ref[:, None, None] * np.ones_like(p), rtol=1e-11)
    assert tau > 0


def test_adjoint_is_linear_in_weights(rng):
    s = _system()
    X, Y = s.grid.coords
    c0 = np.tanh((0.5 - np.hypot(X, Y)) / 0.3)
    traj = solve_forward(c0, 0.1 * rng.standard_normal((4, *s.grid.shape)), s)
    cT = -c0
    p1 = solve_adjoint(traj, Tracking(1.0, 2.0, 0.0, cT, c_d=c0)).p
    p2 = solve_adjoint(traj, Tracking(3.0, 6.0, 0.0, cT, c_d=c0)).p
    np.testing.assert_allclose(p2, 3 * p1, rtol=1e-10, atol=1e-12)
    pa = solve_adjoint(traj, Tracking(1.0, 0.0, 0.0, cT)).p
    pb = solve_adjoint(traj, Tracking(0.0, 2.0, 0.0, cT, c_d=c0)).p
    np.testing.assert_allclose(p1, pa + pb, rtol=1e-9, atol=1e-11)


@pytest.mark.parametrize("scheme", ["implicit", "semi-implicit"])
def test_linearized_forward_matches_differences(scheme, rng):
    s = _system(M=4, T=4e-3)
    X, Y = s.grid.coords
    c0 = np.tanh((0.5 - np.hypot(X, Y)) / 0.3)
    f = 0.5 * rng.standard_normal((4, *s.grid.shape))
    d = rng.standard_normal(f.shape)
    h = 1e-5
    plus = solve_forward(c0, f + h * d, s, scheme).c
    minus = solve_forward(c0, f - h * d, s, scheme).c
    dc = linearized_forward(solve_forward(c0, f, s, scheme), d)
    fd = (plus - minus) / (2 * h)
    assert np.max(np.abs(fd - dc)) <= 1e-7 * np.max(np.abs(dc))


def test_vector_adjoint_stays_tangent(rng):
    g = SpatialGrid.square(0.0, 1.0, 16)
    s = AllenCahn(g, TimeGrid(3e-4, 3), 0.1, RegularizedObstacle(0.05, 3))
    c0 = rings3(g, 0.1, width=0.15)
    f = project_tangent(rng.standard_normal((3, 3, *g.shape)), axis=1)
    traj = solve_forward(c0, f, s)
    p = solve_adjoint(traj, Tracking(1.0, 10.0, 0.0, np.roll(c0, 1, axis=0), c_d=c0)).p
    assert np.max(np.abs(p.sum(axis=1))) <= 1e-10 * np.max(np.abs(p))


def test_unknown_scheme_rejected():
    s = _system()
    traj = solve_forward(np.ones(s.grid.shape), np.zeros((4, *s.grid.shape)), s)
    with pytest.raises(ValueError):
        solve_adjoint(traj, Tracking(1.0, 0.0, 0.0, np.ones(s.grid.shape)), "explicit")
    with pytest.raises(ValueError):
        Tracking(-1.0, 0.0, 0.0, np.ones(3))
