import math

import numpy as np
import pytest

from pamcat.errors import DomainError
from pamcat.params import ModelParams
from pamcat.polaron import (
    DEFAULT_GRID,
    P_p_full,
    P_p_truncated,
    RadialGrid,
    RadialProfile,
    Spacing,
    coulomb_energy,
    coupling_coefficient,
    gradient_energy,
    maximize_P,
    truncated_kernel_energy,
)

# frozen from a converged run, cross-checked against a second internal
# coefficient, a doubled grid and the virial identity
P_ANCHOR = 6.8716520764688e-4


def _unit_gaussian(grid=None):
    grid = grid or DEFAULT_GRID
    r = grid.nodes()
    return RadialProfile(grid, np.pi ** -0.75 * np.exp(-0.5 * r * r))


def test_grid_construction():
    g = RadialGrid(r_max=10.0, n=100, spacing=Spacing.Uniform)
    r = g.nodes()
    assert r[0] > 0 and r[-1] == 10.0
    assert np.allclose(np.diff(r), r[1] - r[0])
    graded = RadialGrid(r_max=10.0, n=100).nodes()
    assert np.all(np.diff(np.diff(graded)) > 0)   # spacing grows outward
    # total weight is r_max minus half the stub below the first node
    # (integrands vanish like r^2 there)
    assert np.sum(g.weights()) == pytest.approx(10.0 - 0.05, rel=1e-12)
    with pytest.raises(DomainError):
        RadialGrid(r_max=-1.0)
    with pytest.raises(DomainError):
        RadialGrid(n=4)


def test_gaussian_energy_oracles():
    # for f(r) = pi^(-3/4) exp(-r^2/2):
    #   |f|_2 = 1, B = 3/2,
    #   A = (1/4pi) * sqrt(2/pi)  (Coulomb self-energy of a unit Gaussian)
    f = _unit_gaussian()
    assert f.norm2() == pytest.approx(1.0, rel=1e-10)
    assert gradient_energy(f) == pytest.approx(1.5, rel=1e-6)
    exact_A = math.sqrt(2.0 / math.pi) / (4.0 * math.pi)
    assert coulomb_energy(f) == pytest.approx(exact_A, rel=1e-5)


def test_truncated_kernel_limits():
    f = _unit_gaussian()
    A = coulomb_energy(f)
    # wide truncation window converges to the Coulomb value
    wide = truncated_kernel_energy(f, 1e-6, 1e6, rho=1.0)
    assert wide == pytest.approx(A, rel=2e-3)
    # empty window is zero, and the energy grows with the window
    assert truncated_kernel_energy(f, 1.0, 1.0, rho=1.0) == 0.0
    narrow = truncated_kernel_energy(f, 1e-2, 1e2, rho=1.0)
    assert 0.0 < narrow < wide
    with pytest.raises(DomainError):
        truncated_kernel_energy(f, 1e-2, 1e-3, rho=1.0)


def test_maximizer_value_and_virial():
    res = maximize_P()
    assert res.P == pytest.approx(P_ANCHOR, rel=1e-6)
    A, B = res.coulomb_term, res.gradient_term
    assert abs(A - 2.0 * B) / A < 0.01
    assert res.P == pytest.approx(A - B, rel=1e-12)
    assert res.residual < 1e-11
    # returned profile is the unit-coefficient one: normalized, broad
    assert res.profile.norm2() == pytest.approx(1.0, rel=1e-8)


def test_two_starts_agree():
    a = maximize_P(start="gaussian")
    b = maximize_P(start="exponential")
    assert abs(a.P - b.P) / a.P < 5e-3


def test_grid_doubling_stable():
    a = maximize_P()
    b = maximize_P(grid=RadialGrid(r_max=20.0, n=4000))
    assert abs(a.P - b.P) / a.P < 1e-2


def test_prefactor_scaling_law():
    # P_p = c_p^2 * P; doubling gamma quadruples c_p, so 16x the constant
    base = ModelParams(d=3, gamma=1.0)
    doubled = ModelParams(d=3, gamma=2.0)
    assert coupling_coefficient(doubled) == 4.0 * coupling_coefficient(base)
    grid = RadialGrid(r_max=20.0, n=800)
    a = P_p_full(base, grid=grid)
    b = P_p_full(doubled, grid=grid)
    assert b["value"] == pytest.approx(16.0 * a["value"], rel=1e-10)
    # independent-route diagnostic stays within 1%
    assert a["diagnostic_value"] == pytest.approx(a["value"], rel=1e-2)


def test_truncated_below_full():
    params = ModelParams(d=3)
    full = P_p_full(params)["value"]
    for eps, K in ((1e-3, 1e3), (1e-2, 1e2), (1e-6, 1e6)):
        trunc = P_p_truncated(eps, K, params)
        assert 0.0 <= trunc <= full * (1 + 1e-9)
    # the wide window recovers most of the full constant
    assert P_p_truncated(1e-8, 1e8, params) > 0.9 * full


def test_profile_is_decreasing():
    res = maximize_P()
    v = res.profile.values
    assert v[0] > 0
    assert np.all(np.diff(v) <= 1e-12)
