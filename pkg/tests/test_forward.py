import math

import numpy as np
import pytest

from acopt.forward import (AllenCahn, energy, extract_interface, solve_forward, step_implicit,
                           step_semi_implicit)
from acopt.grid import SpatialGrid, TimeGrid, inner_product
from acopt.potentials import DoubleWell, RegularizedObstacle, project_tangent
from acopt.profiles import circle, rings3

from conftest import EPS_REF


def scalar_system(n=17, T=1e-3, M=1, eps=0.2, lo=-1.0, hi=1.0):
    return AllenCahn(SpatialGrid.square(lo, hi, n), TimeGrid(T, M), eps, DoubleWell())


def test_pure_phase_and_unstable_equilibrium():
    s = scalar_system()
    for val in (1.0, 0.0, -1.0):
        c = np.full(s.grid.shape, val)
        np.testing.assert_array_equal(step_implicit(c, np.zeros_like(c), s), c)
    c = np.ones(s.grid.shape)
    np.testing.assert_allclose(step_semi_implicit(c, np.zeros_like(c), s), 1.0, atol=1e-14)


def test_barycenter_is_stationary():
    g = SpatialGrid.square(0.0, 1.0, 9)
    s = AllenCahn(g, TimeGrid(1e-3, 1), 0.1, RegularizedObstacle(0.05, 3))
    c = np.full((3, *g.shape), 1 / 3)
    np.testing.assert_allclose(step_implicit(c, np.zeros_like(c), s), c, atol=1e-15)
    np.testing.assert_allclose(step_semi_implicit(c, np.zeros_like(c), s), c, atol=1e-15)


def test_implicit_step_residual():
    s = scalar_system(n=21, T=0.01, eps=0.15)
    X, Y = s.grid.coords
    c_prev = 0.8 * np.cos(np.pi * X) * np.sin(np.pi * Y / 2)
    f = 0.3 * X
    c = step_implicit(c_prev, f, s)
    assert np.max(np.abs(s.residual(c, c_prev, f, s.tau))) <= 1e-12


def _smooth_field(s):
    X, Y = s.grid.coords
    return 0.5 * np.cos(np.pi * X) * np.cos(np.pi * Y) + 0.2


def test_semi_implicit_consistency_first_order():
    diffs = []
    for tau in (1e-3, 5e-4, 2.5e-4):
        s = scalar_system(T=tau)
        c = _smooth_field(s)
        diffs.append(np.max(np.abs(step_semi_implicit(c, np.zeros_like(c), s) - c)))
    assert 1.8 < diffs[0] / diffs[1] < 2.2
    assert 1.8 < diffs[1] / diffs[2] < 2.2


def test_single_step_schemes_agree_to_second_order():
    gaps = []
    for tau in (1e-3, 5e-4):
        s = scalar_system(T=tau)
        c = _smooth_field(s)
        zero = np.zeros_like(c)
        gaps.append(np.max(np.abs(step_implicit(c, zero, s) - step_semi_implicit(c, zero, s))))
    assert 3.5 < gaps[0] / gaps[1] < 4.5


def test_constant_trajectory():
    s = scalar_system(M=5)
    c0 = np.ones(s.grid.shape)
    traj = solve_forward(c0, np.zeros((5, *s.grid.shape)), s)
    np.testing.assert_array_equal(traj.c, 1.0)
    with pytest.raises(ValueError):
        traj.c[0, 0, 0] = 2.0


def test_forward_rejects_bad_shapes():
    s = scalar_system(M=3)
    with pytest.raises(ValueError):
        solve_forward(np.ones((4, 4)), np.zeros((3, *s.grid.shape)), s)
    with pytest.raises(ValueError):
        solve_forward(np.ones(s.grid.shape), np.zeros((2, *s.grid.shape)), s)
    with pytest.raises(ValueError):
        solve_forward(np.ones(s.grid.shape), np.zeros((3, *s.grid.shape)), s, "explicit")


@pytest.mark.parametrize("scheme", ["implicit", "semi-implicit"])
def test_simplex_conservation(scheme, rng):
    g = SpatialGrid.square(0.0, 1.0, 24)
    s = AllenCahn(g, TimeGrid(5e-4, 5), 0.1, RegularizedObstacle(0.01, 3))
    c0 = rings3(g, 0.1, r1=0.2, r2=0.35, width=0.1)
    f = project_tangent(50.0 * rng.standard_normal((5, 3, *g.shape)), axis=1)
    traj = solve_forward(c0, f, s, scheme)
    assert np.max(np.abs(traj.c.sum(axis=1) - 1.0)) <= 1e-12


def test_rings_inner_phases_shrink():
    # three-phase circle-in-annulus without control on h = 1/59
    g = SpatialGrid.square(0.0, 1.0, 60)
    s = AllenCahn(g, TimeGrid(5e-4, 5), 0.1, RegularizedObstacle(0.01, 3))
    c0 = rings3(g, 0.1, r1=0.15, r2=0.32, width=0.1)
    traj = solve_forward(c0, np.zeros((5, 3, *g.shape)), s)
    inner_mass = [float(np.sum(c[0] * g.weights)) for c in traj.c]
    assert all(b < a for a, b in zip(inner_mass, inner_mass[1:]))
    assert np.max(np.abs(traj.c.sum(axis=1) - 1.0)) <= 1e-12


def test_energy_examples():
    s = scalar_system(n=33, eps=0.1)
    assert energy(np.ones(s.grid.shape), s) == 0.0
    assert energy(np.zeros(s.grid.shape), s) == pytest.approx(1.0 / 0.1, rel=1e-14)


def test_energy_gradient_part_matches_operator(rng):
    g = SpatialGrid(0.0, 2.0, -1.0, 0.5, 9, 7)
    s = AllenCahn(g, TimeGrid(1.0, 1), 0.3, DoubleWell())
    c = rng.standard_normal(g.shape)
    bulk = float(np.sum(DoubleWell().value(c) * g.weights)) / 0.3
    grad_part = 0.5 * 0.3 * inner_product(s.neg_lap(c), c, g)
    assert energy(c, s) == pytest.approx(grad_part + bulk, rel=1e-13)


def test_planar_interface_energy_is_eps_independent():
    # a straight tanh interface across (-1,1)^2 has energy ~ 2 * 2*sqrt(2)/3
    vals = []
    for eps in (0.05, 0.025):
        nx = int(round(2.0 / (eps / 8))) + 1
        g = SpatialGrid(-1.0, 1.0, -1.0, 1.0, nx, 3)
        s = AllenCahn(g, TimeGrid(1.0, 1), eps, DoubleWell())
        X, _ = g.coords
        vals.append(energy(np.tanh(X / (math.sqrt(2) * eps)), s))
    assert abs(vals[0] - vals[1]) / vals[1] < 0.05
    assert vals[1] == pytest.approx(2 * 2 * math.sqrt(2) / 3, rel=0.02)


def test_energy_decay_and_bounds_on_shrinking_circle():
    g = SpatialGrid.square(-1.0, 1.0, 48)
    eps = EPS_REF
    M = 30
    s = AllenCahn(g, TimeGrid(M * eps**2, M), eps, DoubleWell())
    c0 = circle(g, eps, r=0.4)
    traj = solve_forward(c0, np.zeros((M, *g.shape)), s)
    E = [energy(c, s) for c in traj.c]
    assert all(b <= a + 1e-10 for a, b in zip(E, E[1:]))
    assert traj.c.min() >= -1 - 1e-8 and traj.c.max() <= 1 + 1e-8


def test_extract_interface_examples():
    g = SpatialGrid.square(-1.0, 1.0, 101)
    X, Y = g.coords
    disk = np.where(np.hypot(X, Y) < 0.5, 1.0, -1.0)
    info = extract_interface(disk, g)
    assert abs(info.radius - 0.5) <= g.hx and info.components == 1
    empty = extract_interface(-np.ones(g.shape), g)
    assert (empty.radius, empty.components) == (0.0, 0)
    two = np.where((np.hypot(X - 0.5, Y) < 0.25) | (np.hypot(X + 0.5, Y) < 0.25), 1.0, -1.0)
    assert extract_interface(two, g).components == 2


def test_scheme_trajectories_converge_first_order():
    gaps = []
    for M in (8, 16, 32):
        s = scalar_system(n=17, T=0.02, M=M, eps=0.2)
        c0 = _smooth_field(s)
        f = np.zeros((M, *s.grid.shape))
        a = solve_forward(c0, f, s, "implicit").final
        b = solve_forward(c0, f, s, "semi-implicit").final
        gaps.append(np.max(np.abs(a - b)))
    assert 1.6 < gaps[0] / gaps[1] < 2.4 and 1.6 < gaps[1] / gaps[2] < 2.4
