import math

import numpy as np
import pytest
from scipy import linalg

from pamcat.cauchy import (
    Boundary,
    BoxConfig,
    Path,
    ScalarTrace,
    TrajectorySet,
    apply_heat,
    default_dt,
    duhamel_residual,
    heat_step_matrix,
    laplacian_matrix,
    pinned_trajectory,
    solve_w,
    solve_w_bar,
    solve_w_bar_volterra,
    w_bar_limit,
)
from pamcat.errors import DomainError, NumericalError
from pamcat.feynman_kac import sample_srw, substream
from pamcat.lattice_green import INF, r_d
from pamcat.params import ModelParams


def test_path_validation():
    with pytest.raises(DomainError):
        Path([0], [0.5, 0.4], [[1], [2]])        # times not increasing
    with pytest.raises(DomainError):
        Path([0], [0.5], [[2]])                  # not a neighbor step
    pa = Path([0, 0], [0.3, 0.9], [[1, 0], [1, 1]])
    assert np.array_equal(pa.position(0.1), [0, 0])
    assert np.array_equal(pa.position(0.5), [1, 0])
    assert np.array_equal(pa.position(2.0), [1, 1])
    got = pa.positions(np.array([0.0, 0.4, 1.0]))
    assert np.array_equal(got, [[0, 0], [1, 0], [1, 1]])
    assert pa.max_abs_coordinate() == 1


def test_trajectory_set_validation():
    pa = Path([0], [0.5], [[1]])
    with pytest.raises(DomainError):
        TrajectorySet([pa], 0.3)   # jump beyond horizon
    with pytest.raises(DomainError):
        TrajectorySet([], 1.0)
    ts = TrajectorySet([pa, pa], 1.0)
    assert ts.p == 2 and ts.d == 1


def test_scalar_trace_integral():
    tr = ScalarTrace(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 2.0]))
    assert tr.value_at(0.5) == 1.0
    assert tr.time_integral(2.0) == pytest.approx(3.0)
    assert tr.time_integral(1.0) == pytest.approx(1.0)


def test_heat_step_matrix_is_exact_exponential():
    # the factorized Bessel kernel must equal expm(c_dt * Delta_1d) exactly
    side, c_dt = 9, 0.37
    lap = laplacian_matrix(1, side // 2).toarray()
    exact = linalg.expm(c_dt * lap)
    kern = heat_step_matrix(side, c_dt)
    # truncation (absorbing) differs from the Toeplitz kernel only near the
    # boundary; compare on the inner block
    assert np.allclose(kern[2:-2, 2:-2], exact[2:-2, 2:-2], atol=1e-9)


def test_apply_heat_matches_full_exponential_2d():
    radius, c_dt = 3, 0.21
    side = 2 * radius + 1
    rng = np.random.default_rng(0)
    w = rng.random((side**2, 4))
    kern = heat_step_matrix(side, c_dt)
    out, _ = apply_heat(w.copy(), kern, side, 2, np.empty_like(w))
    full = np.kron(kern, kern)   # row-major flattening
    assert np.allclose(out, full @ w, atol=1e-12)


def test_periodic_kernel_conserves_mass():
    side, c_dt = 7, 0.4
    kern = heat_step_matrix(side, c_dt, Boundary.Periodic)
    assert np.allclose(kern.sum(axis=0), 1.0, atol=1e-10)
    absorbing = heat_step_matrix(side, c_dt, Boundary.Absorbing)
    assert np.all(absorbing.sum(axis=0) <= 1.0 + 1e-12)


def test_default_dt():
    params = ModelParams(d=3, kappa=2.0, rho=1.0)
    assert default_dt(params) == pytest.approx(1.0 / (12 * 2.0))
    slow = ModelParams(d=2, kappa=0.1, rho=1.0)
    assert default_dt(slow) == pytest.approx(1.0 / 8.0)


def test_w_bar_limit_values():
    assert w_bar_limit(ModelParams(d=3)) == pytest.approx(
        1.0 / (r_d(3) - 1.0), rel=1e-10)
    assert w_bar_limit(ModelParams(d=2)) == INF
    assert w_bar_limit(ModelParams(d=3, gamma=5.0)) == INF


def test_pinned_solution_monotone_and_bounded():
    params = ModelParams(d=3)
    box = BoxConfig(radius=12, dt=default_dt(params))
    trace = solve_w_bar(params, 20.0, box)
    vals = trace.values
    assert vals[0] == 0.0
    assert np.all(np.diff(vals) > -1e-13)
    assert vals[-1] < w_bar_limit(params)
    # already most of the way to the limit at T = 20
    assert vals[-1] > 0.8 * w_bar_limit(params)


def test_volterra_agrees_with_pde():
    params = ModelParams(d=3)
    T = 20.0
    box = BoxConfig(radius=12, dt=default_dt(params) / 2)
    pde = solve_w_bar(params, T, box)
    vol = solve_w_bar_volterra(params, T, dt=0.025)
    assert vol.values[-1] == pytest.approx(pde.values[-1], rel=0.01)


def test_volterra_rejects_coarse_grid():
    params = ModelParams(d=3, gamma=3.5)
    with pytest.raises(NumericalError):
        solve_w_bar_volterra(params, 10.0, dt=2.5, rel_tol=1e-6)


def test_moving_source_concentration_quick():
    # w(x, t) <= w_bar(0, t) along random trajectories
    params = ModelParams(d=3, p=2)
    T = 2.0
    box = BoxConfig(radius=7, dt=default_dt(params))
    bar = solve_w_bar(params, T, box)
    rng = substream(123, 9, 0)
    rate = 2.0 * params.d * params.rho
    for _ in range(3):
        paths = [sample_srw(np.zeros(3, dtype=int), rate, T, rng)
                 for _ in range(params.p)]
        if max(pa.max_abs_coordinate() for pa in paths) > box.radius:
            continue
        traj = TrajectorySet(paths, T)
        trace = solve_w(traj, params, box)
        for i, t in enumerate(trace.times):
            assert float(np.max(trace.fields[i].values)) <= \
                bar.value_at(t) * (1 + 1e-9) + 1e-12


def test_frozen_trajectory_matches_pinned():
    # a trajectory that never moves is exactly the pinned problem
    params = ModelParams(d=2, p=1, gamma=0.8)
    T = 3.0
    box = BoxConfig(radius=8, dt=default_dt(params))
    traj = pinned_trajectory(params, T)
    trace = solve_w(traj, params, box)
    bar = solve_w_bar(params, T, box)
    assert trace.origin_values[-1] == pytest.approx(bar.values[-1], rel=1e-12)


def test_duhamel_residual_small():
    params = ModelParams(d=2, p=2)
    T = 1.5
    box = BoxConfig(radius=9, dt=1.0 / 16)
    rng = substream(7, 9, 1)
    paths = [sample_srw(np.zeros(2, dtype=int), 4.0, T, rng)
             for _ in range(2)]
    traj = TrajectorySet(paths, T)
    trace = solve_w(traj, params, box)
    assert duhamel_residual(trace, traj, params) < 5e-4


def test_walker_outside_box_rejected():
    params = ModelParams(d=1)
    pa = Path([3], np.empty(0), np.empty((0, 1)))
    traj = TrajectorySet([pa], 1.0)
    box = BoxConfig(radius=2, dt=0.05)
    with pytest.raises(DomainError):
        solve_w(traj, params, box)


def test_box_config_validation():
    with pytest.raises(DomainError):
        BoxConfig(radius=0, dt=0.1)
    with pytest.raises(DomainError):
        BoxConfig(radius=3, dt=-0.1)
    assert BoxConfig(radius=3, dt=0.1).side == 7
