import math

import numpy as np
import pytest

from pamcat.cauchy import BoxConfig, default_dt, solve_w_bar
from pamcat.errors import DomainError
from pamcat.feynman_kac import (
    TAG_FIELD,
    TAG_LAMBDA,
    CatalystField,
    McConfig,
    _occupation_integral,
    default_box_radius,
    estimate_Lambda_p,
    estimate_Lambda_p_pinned,
    exceedance_set,
    rescaled_params,
    sample_catalyst_field,
    sample_srw,
    scaling_identity_check,
    simulate_quenched_u,
    substream,
)
from pamcat.fields import LatticeField
from pamcat.params import ModelParams


def test_substreams_are_deterministic_and_distinct():
    a = substream(42, TAG_LAMBDA, 7).random(4)
    b = substream(42, TAG_LAMBDA, 7).random(4)
    assert np.array_equal(a, b)
    c = substream(42, TAG_LAMBDA, 8).random(4)
    d = substream(42, TAG_FIELD, 7).random(4)
    e = substream(43, TAG_LAMBDA, 7).random(4)
    for other in (c, d, e):
        assert not np.array_equal(a, other)


def test_srw_jump_count_statistics():
    # number of jumps in [0, T] is Poisson(rate * T)
    rate, T = 4.0, 2.5
    counts = [len(sample_srw(np.zeros(2, dtype=int), rate, T,
                             substream(5, 9, i)).jump_times)
              for i in range(400)]
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - rate * T) < 4 * se
    frozen = sample_srw(np.zeros(3, dtype=int), 0.0, T, substream(5, 9, 0))
    assert len(frozen.jump_times) == 0


def test_default_box_radius_formula():
    params = ModelParams(d=3, kappa=4.0, rho=1.0)
    assert default_box_radius(params, 2.0) == \
        math.ceil(6.0 * math.sqrt(4.0 * 2.0)) + 2


def test_kappa_zero_is_exact_and_deterministic():
    params = ModelParams(d=3, kappa=0.0)
    t = 2.0
    est = estimate_Lambda_p(params, t, McConfig(replicas=50))
    assert est.std_error == 0.0
    assert est.diagnostics.get("deterministic") is True
    box = BoxConfig(radius=default_box_radius(params, t),
                    dt=default_dt(params))
    bar = solve_w_bar(params, t, box)
    direct = params.nu * params.gamma * bar.time_integral(t) / t
    assert est.value == direct   # bit-for-bit, same code path


def test_estimates_are_reproducible():
    params = ModelParams(d=3)
    mc = McConfig(replicas=64, master_seed=9)
    a = estimate_Lambda_p(params, 1.0, mc)
    b = estimate_Lambda_p(params, 1.0, mc)
    assert a.value == b.value and a.std_error == b.std_error
    c = estimate_Lambda_p(params, 1.0, McConfig(replicas=64, master_seed=10))
    assert c.value != a.value


def test_scaling_identity_exact_at_kappa_one():
    params = ModelParams(d=3, kappa=1.0)
    lhs, rhs = scaling_identity_check(params, 1.0, McConfig(replicas=64))
    assert lhs.value == rhs.value


def test_scaling_identity_statistical():
    params = ModelParams(d=3, kappa=2.0)
    lhs, rhs = scaling_identity_check(params, 1.0,
                                      McConfig(replicas=600, master_seed=1))
    sigma = math.hypot(lhs.std_error, rhs.std_error)
    assert abs(lhs.value - rhs.value) < 3.5 * sigma


def test_rescaled_params():
    params = ModelParams(d=3, kappa=2.0, gamma=1.0, rho=4.0, nu=0.5)
    other = rescaled_params(params)
    assert other.kappa == 1.0
    assert other.gamma == 0.5 and other.rho == 2.0 and other.nu == 0.5
    with pytest.raises(DomainError):
        rescaled_params(ModelParams(d=3, kappa=0.0))


def test_pinned_below_unpinned():
    params = ModelParams(d=3)
    mc = McConfig(replicas=800, master_seed=2)
    t = 1.0
    pinned = estimate_Lambda_p_pinned(params, t, mc)
    unpinned = estimate_Lambda_p(params, t, mc)
    sigma = math.hypot(pinned.std_error, unpinned.std_error)
    assert pinned.value <= unpinned.value + 3 * sigma
    assert 0 < pinned.diagnostics["acceptance"] <= 1


def test_quenched_empty_medium_is_one():
    params = ModelParams(d=2, nu=1.0)
    field_ = CatalystField(walkers=[], intensity=0.0, radius=10, horizon=2.0)
    est = simulate_quenched_u(field_, params, 1.5, McConfig(replicas=20))
    assert est.value == 1.0
    assert est.std_error == 0.0


def test_catalyst_field_sampling():
    params = ModelParams(d=2, nu=2.0, rho=1.0)
    rng = substream(3, TAG_FIELD, 0)
    field_ = sample_catalyst_field(params, 4, 1.0, rng)
    n_sites = 9 * 9
    # Poisson(2) per site; crude 5-sigma sanity band on the total
    assert abs(len(field_.walkers) - 2 * n_sites) < 5 * math.sqrt(2 * n_sites)
    assert all(pa.d == 2 for pa in field_.walkers)
    # occupation counts walkers on the site at the given time
    x0 = field_.walkers[0].position(0.0)
    assert field_.occupation(x0, 0.0) >= 1


def test_occupation_integral_against_riemann_oracle():
    params = ModelParams(d=2, nu=1.0)
    rng = substream(42, TAG_FIELD, 0)
    field_ = sample_catalyst_field(params, 3, 2.0, rng)
    pa = sample_srw(np.zeros(2, dtype=int), 4.0, 2.0, substream(42, 9, 0))
    exact = _occupation_integral(field_, pa, 1.0, 2.0)
    n = 100001
    s = np.linspace(0.0, 2.0, n)
    mids = 0.5 * (s[:-1] + s[1:])
    xs = pa.positions(mids)
    riemann = 0.0
    for w in field_.walkers:
        ys = w.positions(2.0 - mids)
        riemann += np.sum(np.all(xs == ys, axis=1)) * (2.0 / (n - 1))
    assert exact == pytest.approx(riemann, abs=2e-4)


def test_quenched_grows_with_coupling():
    params_lo = ModelParams(d=2, gamma=0.2)
    params_hi = ModelParams(d=2, gamma=0.8)
    rng = substream(8, TAG_FIELD, 0)
    field_ = sample_catalyst_field(params_lo, 6, 1.0, rng)
    mc = McConfig(replicas=150, master_seed=8)
    lo = simulate_quenched_u(field_, params_lo, 1.0, mc)
    hi = simulate_quenched_u(field_, params_hi, 1.0, mc)
    assert 1.0 < lo.value < hi.value   # same paths, larger coupling


def test_exceedance_set():
    vals = np.ones((5, 5))
    vals[2, 2] = 100.0
    vals[0, 4] = 50.0
    snap = LatticeField(2, 2, vals)
    count, sites = exceedance_set(snap, alpha=1.4, t=3.0)  # level ~ 66.7
    assert count == 1 and sites == [(0, 0)]
    count, sites = exceedance_set(snap, alpha=0.5, t=3.0)
    assert count == 2 and (0, 0) in sites and (-2, 2) in sites


def test_mc_config_validation():
    with pytest.raises(DomainError):
        McConfig(replicas=0)
    with pytest.raises(DomainError):
        McConfig(replicas=10, master_seed=-1)
