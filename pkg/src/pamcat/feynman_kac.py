"""Monte Carlo layer: moment growth rates via the path-integral
representation, the endpoint-pinned variant, quenched simulation against a
sampled catalyst field, superlevel diagnostics, and the diffusion-rescaling
self-test.

The annealed p-th moment growth rate at horizon t is

    (1/(p t)) log E exp[nu*gamma int_0^t sum_q w(X_q(s), s) ds],

with X_1, ..., X_p independent rate-2*d*kappa walks from the origin and w
the field integrated by the cauchy module along those same walks.  The
estimator works in the log domain with a max shift, and every replica draws
its randomness from a counter-keyed Philox substream, so results are
bit-identical no matter how the replicas are scheduled.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .cauchy import (BoxConfig, Path, TrajectorySet, default_dt,
                     evolve_sources, solve_w_bar)
from .errors import DomainError, NumericalError
from .fields import LatticeField, box_sites, flat_index
from .params import ModelParams

STREAM_SCHEME = ("philox4x64: key = (master_seed, "
                 "stream_tag * 2^32 + replica_index)")

# stream tags keep the independent randomness pools of one run disjoint
TAG_LAMBDA = 1
TAG_PINNED = 2
TAG_FIELD = 3
TAG_QUENCHED_PATH = 4
TAG_SCALED_SIDE = 5

_CHUNK = 512


@dataclass(frozen=True)
class McConfig:
    replicas: int
    master_seed: int = 0
    stream_scheme: str = STREAM_SCHEME

    def __post_init__(self):
        if self.replicas < 1:
            raise DomainError(f"replicas must be >= 1, got {self.replicas}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must fit in 64 unsigned bits")


@dataclass
class McEstimate:
    value: float
    std_error: float
    replicas_used: int
    log_domain: bool
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.std_error < 0:
            raise DomainError("std_error must be >= 0")


def substream(master_seed, tag, replica):
    """Deterministic per-replica generator; see STREAM_SCHEME."""
    key = np.array([master_seed, (tag << 32) + replica], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_srw(start, rate, T, rng):
    """Continuous-time simple random walk path on Z^d up to horizon T.

    rate is the total jump rate (2*d*kappa); rate 0 gives the frozen path.
    """
    start = np.atleast_1d(np.asarray(start, dtype=int))
    d = len(start)
    if rate < 0:
        raise DomainError(f"jump rate must be >= 0, got {rate}")
    if rate == 0:
        return Path(start, np.empty(0), np.empty((0, d)))
    times = []
    sites = []
    t = 0.0
    x = start
    while True:
        t += rng.exponential(1.0 / rate)
        if t >= T:
            break
        step = np.zeros(d, dtype=int)
        axis = int(rng.integers(d))
        step[axis] = 1 if rng.integers(2) else -1
        x = x + step
        times.append(t)
        sites.append(x)
    return Path(start, np.asarray(times), np.asarray(sites).reshape(len(times), d))


def default_box_radius(params, t):
    """ceil(6 sqrt(max(kappa, rho) t)) + 2, keeping exits negligible."""
    rate = max(params.kappa, params.rho, 1e-12)
    return int(math.ceil(6.0 * math.sqrt(rate * t))) + 2


def default_box(params, t):
    return BoxConfig(radius=default_box_radius(params, t),
                     dt=default_dt(params))


def _log_mean_exp(y):
    """log of the mean of exp(y), max-shifted, plus its delta-method error."""
    m = float(np.max(y))
    z = np.exp(y - m)
    mean = float(np.mean(z))
    se = float(np.std(z, ddof=1) / math.sqrt(len(z))) if len(z) > 1 else 0.0
    return m + math.log(mean), se / mean


def _exponents(params, t, mc, box, tag, keep_endpoints=False):
    """Per-replica path exponents nu*gamma*int sum_q w(X_q) and diagnostics.

    Replicas whose walkers leave the box are aborted and counted; their
    substreams are consumed identically regardless of scheduling.
    """
    d, p = params.d, params.p
    rate = 2.0 * d * params.kappa
    n_steps = max(1, int(round(t / box.dt)))
    dt = t / n_steps
    times = dt * np.arange(n_steps + 1)
    exponents = np.full(mc.replicas, np.nan)
    endpoints = np.zeros((mc.replicas, p, d), dtype=int) if keep_endpoints else None
    exits = 0
    for lo in range(0, mc.replicas, _CHUNK):
        hi = min(lo + _CHUNK, mc.replicas)
        keep = []
        src = np.empty((n_steps + 1, p, hi - lo), dtype=np.int64)
        for r in range(lo, hi):
            rng = substream(mc.master_seed, tag, r)
            ok = True
            for q in range(p):
                pa = sample_srw(np.zeros(d, dtype=int), rate, t, rng)
                if pa.max_abs_coordinate() > box.radius:
                    ok = False
                    continue
                pos = pa.positions(times)
                src[:, q, r - lo] = flat_index(pos, box.radius, d)
                if keep_endpoints:
                    endpoints[r, q] = pos[-1]
            if ok:
                keep.append(r - lo)
            else:
                exits += 1
        if not keep:
            continue
        keep = np.asarray(keep)
        _, line, _ = evolve_sources(box, d, src[:, :, keep], params.gamma,
                                    params.rho, dt, check_every=8)
        exponents[lo + keep] = params.nu * params.gamma * line
    used = np.flatnonzero(~np.isnan(exponents))
    return exponents, used, exits, endpoints


def estimate_Lambda_p(params, t, mc, box=None):
    """Annealed growth-rate estimate at horizon t.

    kappa = 0 is exact and deterministic: all walks are frozen at the
    origin, so the exponent reduces to the pinned-source trace integral
    nu*gamma*(1/t) int_0^t w_bar(0, s) ds, with zero variance.
    """
    if not t > 0:
        raise DomainError(f"horizon must be > 0, got {t}")
    box = box or default_box(params, t)
    if params.kappa == 0.0:
        trace = solve_w_bar(params, t, box)
        value = params.nu * params.gamma * trace.time_integral(t) / t
        return McEstimate(value=value, std_error=0.0, replicas_used=1,
                          log_domain=False,
                          diagnostics={"exits": 0, "deterministic": True})
    exponents, used, exits, _ = _exponents(params, t, mc, box, TAG_LAMBDA)
    if len(used) == 0:
        raise NumericalError("all replicas left the box; enlarge the radius",
                             exits=exits)
    log_mean, se = _log_mean_exp(exponents[used])
    pt = params.p * t
    return McEstimate(value=log_mean / pt, std_error=se / pt,
                      replicas_used=int(len(used)), log_domain=True,
                      diagnostics={"exits": exits})


def _neighborhood(d):
    pts = [np.zeros(d, dtype=int)]
    for axis in range(d):
        for sgn in (1, -1):
            e = np.zeros(d, dtype=int)
            e[axis] = sgn
            pts.append(e)
    return pts


def estimate_Lambda_p_pinned(params, t, mc, box=None, endpoint=None):
    """Endpoint-pinned growth-rate estimate (indicator weighting).

    The pinned functional fixes every walk's endpoint; with endpoint=None
    the estimator scans the origin and its nearest neighbors and reports the
    best, approximating the maximum over endpoints.  Never exceeds the
    unpinned estimate beyond Monte Carlo error.
    """
    if not t > 0:
        raise DomainError(f"horizon must be > 0, got {t}")
    box = box or default_box(params, t)
    if params.kappa == 0.0:
        est = estimate_Lambda_p(params, t, mc, box)
        est.diagnostics["acceptance"] = 1.0
        return est
    exponents, used, exits, endpoints = _exponents(
        params, t, mc, box, TAG_PINNED, keep_endpoints=True)
    if len(used) == 0:
        raise NumericalError("all replicas left the box; enlarge the radius",
                             exits=exits)
    scan = [np.atleast_1d(np.asarray(endpoint, dtype=int))] \
        if endpoint is not None else _neighborhood(params.d)
    pt = params.p * t
    best = None
    for x in scan:
        hit = used[np.all(endpoints[used] == x[None, None, :], axis=(1, 2))]
        if len(hit) == 0:
            continue
        # unnormalized: mean over all surviving replicas of exp * indicator
        y = np.exp(exponents[hit] - np.max(exponents[hit]))
        mean_all = float(np.sum(y)) / len(used)
        log_mean = float(np.max(exponents[hit])) + math.log(mean_all)
        se_log = float(np.std(np.concatenate(
            [y, np.zeros(len(used) - len(hit))]), ddof=1)) \
            / (math.sqrt(len(used)) * mean_all)
        cand = (log_mean / pt, se_log / pt, len(hit))
        if best is None or cand[0] > best[0]:
            best = cand
    if best is None:
        raise NumericalError(
            "no replica hit any scanned endpoint; increase replicas or "
            "shrink t", exits=exits)
    value, se, hits = best
    return McEstimate(value=value, std_error=se, replicas_used=int(len(used)),
                      log_domain=True,
                      diagnostics={"exits": exits,
                                   "acceptance": hits / len(used)})


@dataclass
class CatalystField:
    """A realization of the catalytic medium on a finite window."""

    walkers: list            # Path objects with rate-2*d*rho dynamics
    intensity: float
    radius: int
    horizon: float

    def occupation(self, x, s):
        """Number of walkers at site x at time s."""
        x = np.atleast_1d(np.asarray(x, dtype=int))
        return sum(1 for pa in self.walkers
                   if np.array_equal(pa.position(s), x))


def sample_catalyst_field(params, radius, horizon, rng):
    """Poisson(nu) walkers per window site, each moving at rate 2*d*rho."""
    d = params.d
    sites = box_sites(d, radius)
    counts = rng.poisson(params.nu, size=len(sites))
    walkers = []
    rate = 2.0 * d * params.rho
    for site, c in zip(sites, counts):
        for _ in range(int(c)):
            walkers.append(sample_srw(site, rate, horizon, rng))
    return CatalystField(walkers=walkers, intensity=params.nu,
                         radius=radius, horizon=horizon)


def _path_bbox(path):
    pts = np.vstack([path.start[None, :], path.sites]) \
        if len(path.sites) else path.start[None, :]
    return pts.min(axis=0), pts.max(axis=0)


def _pair_meeting_time(path, walker, t):
    """int_0^t 1{path(s) = walker(t - s)} ds for one (path, walker) pair.

    Both sides are piecewise constant, so the indicator is constant between
    the merged breakpoints of the path and the time-reversed walker.
    """
    br = [0.0, t]
    br.extend(float(u) for u in path.jump_times if 0.0 < u < t)
    br.extend(t - float(v) for v in walker.jump_times if 0.0 < t - float(v) < t)
    br = np.unique(np.asarray(br))
    mids = 0.5 * (br[:-1] + br[1:])
    same = np.all(path.positions(mids) == walker.positions(t - mids), axis=1)
    return float(np.sum((br[1:] - br[:-1])[same]))


def _occupation_integral(field_, path, gamma, t):
    """int_0^t gamma * (number of walkers meeting the path, time-reversed) ds.

    Summed walker by walker; walkers whose bounding box never intersects the
    path's are skipped outright, which removes almost all of them.
    """
    lo, hi = _path_bbox(path)
    total = 0.0
    for pa in field_.walkers:
        wlo, whi = _path_bbox(pa)
        if np.any(whi < lo) or np.any(wlo > hi):
            continue
        total += _pair_meeting_time(path, pa, t)
    return gamma * total


def simulate_quenched_u(field_, params, t, mc):
    """Feynman-Kac average of the solution at the origin for a FIXED medium.

    u(0, t) = E exp[int_0^t xi(X(s), t - s) ds] over rate-2*d*kappa walks X
    from the origin, with xi = gamma * occupation.  Empty medium gives
    exactly 1 with zero variance.
    """
    if not t > 0:
        raise DomainError(f"horizon must be > 0, got {t}")
    if field_.horizon < t:
        raise DomainError("catalyst field horizon shorter than t")
    d = params.d
    rate = 2.0 * d * params.kappa
    vals = np.empty(mc.replicas)
    exits = 0
    n_used = 0
    for r in range(mc.replicas):
        rng = substream(mc.master_seed, TAG_QUENCHED_PATH, r)
        pa = sample_srw(np.zeros(d, dtype=int), rate, t, rng)
        if pa.max_abs_coordinate() > field_.radius:
            exits += 1
            continue
        vals[n_used] = math.exp(_occupation_integral(field_, pa,
                                                     params.gamma, t))
        n_used += 1
    if n_used == 0:
        raise NumericalError("all replicas left the window", exits=exits)
    vals = vals[:n_used]
    se = float(np.std(vals, ddof=1) / math.sqrt(n_used)) if n_used > 1 else 0.0
    return McEstimate(value=float(np.mean(vals)), std_error=se,
                      replicas_used=n_used, log_domain=False,
                      diagnostics={"exits": exits})


def exceedance_set(u_snapshot, alpha, t):
    """Sites of the snapshot where u(x, t) > e^(alpha t)."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    level = math.exp(alpha * t)
    sites = box_sites(u_snapshot.d, u_snapshot.radius)
    mask = u_snapshot.values.ravel() > level
    hits = sites[mask]
    return int(mask.sum()), [tuple(int(c) for c in x) for x in hits]


def rescaled_params(params):
    """The diffusion rescaling (kappa,gamma,rho,nu) -> (1, g/k, r/k, nu)."""
    if params.kappa <= 0:
        raise DomainError("rescaling requires kappa > 0")
    k = params.kappa
    return ModelParams(d=params.d, p=params.p, kappa=1.0,
                       gamma=params.gamma / k, rho=params.rho / k,
                       nu=params.nu)


def scaling_identity_check(params, T, mc):
    """Self-test of the exact-in-law identity

        Lambda_p(T; kappa, gamma, rho, nu)
            = kappa * Lambda_p(kappa T; 1, gamma/kappa, rho/kappa, nu).

    Returns (lhs, rhs) as McEstimates with the rhs already multiplied by
    kappa.  At kappa = 1 both sides share the same substreams and must be
    identical; otherwise the rhs uses an independent stream tag and the two
    sides agree statistically.
    """
    lhs = estimate_Lambda_p(params, T, mc)
    other = rescaled_params(params)
    k = params.kappa
    if k == 1.0:
        mc_b = mc
    else:
        mc_b = McConfig(replicas=mc.replicas,
                        master_seed=(mc.master_seed + TAG_SCALED_SIDE) % 2**64,
                        stream_scheme=mc.stream_scheme)
    inner = estimate_Lambda_p(other, k * T, mc_b)
    rhs = McEstimate(value=k * inner.value, std_error=k * inner.std_error,
                     replicas_used=inner.replicas_used,
                     log_domain=inner.log_domain,
                     diagnostics=dict(inner.diagnostics))
    return lhs, rhs
