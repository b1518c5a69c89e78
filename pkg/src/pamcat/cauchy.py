"""Finite-box solvers for the catalyst-driven linear reaction-diffusion
problems.

Two objects are computed here.  First, the field w(x, t) that solves

    dw/dt = rho * Delta w + gamma * [sum_q delta_{X_q(t)}(x)] * (w + 1),
    w(., 0) = 0,

for a given set of walker trajectories X_1, ..., X_p.  Second, its pinned
majorant w_bar(0, t), the same problem with all p sources held at the origin,
which is also accessible through a renewal-type Volterra equation that needs
no spatial box at all.

Time stepping is operator splitting: a half-step of the exact exponential
source update at the walker sites, the exact diffusion semigroup
exp(dt * rho * Delta) applied as a product of 1-D Bessel kernels (one dense
Toeplitz multiply per axis, truncated at the box edge), and another source
half-step, with walker positions read at the endpoints of the step.  The
exact substep is unconditionally stable and positivity preserving, and
leaves only the O(dt^2) splitting error.  The stepper is batched over
replicas (the field array is (n_sites, n_replicas)) because the Monte Carlo
layer runs thousands of these solves with different trajectories on a
shared box.
"""

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sparse
from scipy import special

from .errors import DomainError, NumericalError
from .fields import LatticeField, box_sites, flat_index
from .lattice_green import DEFAULT_CFG, INF, r_d
from .params import ModelParams, check_dimension


class Boundary(enum.Enum):
    Absorbing = "absorbing"
    Periodic = "periodic"


@dataclass(frozen=True)
class BoxConfig:
    radius: int
    dt: float
    boundary: Boundary = Boundary.Absorbing

    def __post_init__(self):
        if self.radius < 1:
            raise DomainError(f"box radius must be >= 1, got {self.radius}")
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")

    @property
    def side(self):
        return 2 * self.radius + 1


def default_dt(params):
    """Step size 1/(4 d max(rho, kappa)), half the explicit stability limit.

    Tying dt to kappa as well as rho makes the two sides of the diffusion
    rescaling (kappa, gamma, rho, T) -> (1, gamma/kappa, rho/kappa, kappa T)
    use exactly corresponding time grids, so their discretization bias
    cancels in comparisons.
    """
    rate = max(params.rho, params.kappa)
    return 1.0 / (4.0 * params.d * rate)


@lru_cache(maxsize=None)
def laplacian_matrix(d, radius, boundary=Boundary.Absorbing):
    """Sparse lattice Laplacian on the box, as a kron sum of 1-D stencils."""
    check_dimension(d)
    side = 2 * radius + 1
    one = sparse.diags([np.ones(side - 1), -2.0 * np.ones(side),
                        np.ones(side - 1)], offsets=[-1, 0, 1], format="lil")
    if boundary is Boundary.Periodic and side > 2:
        one[0, -1] += 1.0
        one[-1, 0] += 1.0
    one = one.tocsr()
    eye = sparse.identity(side, format="csr")
    lap = None
    for axis in range(d):
        term = None
        for j in range(d):
            block = one if j == axis else eye
            term = block if term is None else sparse.kron(term, block, format="csr")
        lap = term if lap is None else lap + term
    return lap.tocsr()


@lru_cache(maxsize=None)
def heat_step_matrix(side, c_dt, boundary=Boundary.Absorbing):
    """One-axis kernel of exp(c_dt * Delta_1d): T[i, j] = e^(-2c) I_{i-j}(2c).

    Truncation at the box edge loses the mass that would diffuse outside
    (absorbing); the periodic variant folds the lost mass back in by summing
    over lattice images.
    """
    i = np.arange(side)
    gap = np.abs(i[:, None] - i[None, :])
    if boundary is Boundary.Periodic:
        mat = np.zeros((side, side))
        for m in (-2, -1, 0, 1, 2):
            mat += special.ive(np.abs(gap + m * side), 2.0 * c_dt)
        return mat
    return special.ive(gap, 2.0 * c_dt)


def apply_heat(w, kernel, side, d, scratch=None):
    """Multiply the 1-D heat kernel along each spatial axis of the flat field.

    w has shape (side**d, n_replicas); the spatial axes factorize, so the
    full d-dimensional semigroup is d dense Toeplitz multiplies.  A scratch
    buffer of the same shape can be supplied to avoid reallocation in tight
    loops; returns (result, free_buffer).
    """
    if scratch is None:
        scratch = np.empty_like(w)
    for axis in range(d):
        lead = side**axis
        np.matmul(kernel, w.reshape(lead, side, -1),
                  out=scratch.reshape(lead, side, -1))
        w, scratch = scratch, w
    return w, scratch


@dataclass
class Path:
    """A single continuous-time nearest-neighbor path on Z^d."""

    start: np.ndarray
    jump_times: np.ndarray
    sites: np.ndarray  # position after each jump, shape (n_jumps, d)

    def __post_init__(self):
        self.start = np.atleast_1d(np.asarray(self.start, dtype=int))
        self.jump_times = np.asarray(self.jump_times, dtype=float)
        self.sites = np.asarray(self.sites, dtype=int).reshape(
            len(self.jump_times), len(self.start))
        if len(self.jump_times) and np.any(np.diff(self.jump_times) <= 0):
            raise DomainError("jump times must be strictly increasing")
        if len(self.jump_times) and self.jump_times[0] <= 0:
            raise DomainError("jump times must be positive")
        prev = self.start
        for s in self.sites:
            if int(np.sum(np.abs(s - prev))) != 1:
                raise DomainError(
                    f"consecutive sites {prev} -> {s} are not lattice neighbors")
            prev = s

    @property
    def d(self):
        return len(self.start)

    def position(self, t):
        i = int(np.searchsorted(self.jump_times, t, side="right"))
        return self.start if i == 0 else self.sites[i - 1]

    def positions(self, times):
        """Positions at an array of times, shape (len(times), d)."""
        idx = np.searchsorted(self.jump_times, times, side="right")
        out = np.empty((len(times), self.d), dtype=int)
        out[idx == 0] = self.start
        hit = idx > 0
        out[hit] = self.sites[idx[hit] - 1]
        return out

    def max_abs_coordinate(self):
        m = int(np.max(np.abs(self.start)))
        if len(self.sites):
            m = max(m, int(np.max(np.abs(self.sites))))
        return m


@dataclass
class TrajectorySet:
    paths: list
    horizon: float

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError(f"horizon must be > 0, got {self.horizon}")
        if not self.paths:
            raise DomainError("trajectory set must contain at least one path")
        d = self.paths[0].d
        for pa in self.paths:
            if pa.d != d:
                raise DomainError("paths live in different dimensions")
            if len(pa.jump_times) and pa.jump_times[-1] > self.horizon:
                raise DomainError("jump time beyond the declared horizon")

    @property
    def p(self):
        return len(self.paths)

    @property
    def d(self):
        return self.paths[0].d


@dataclass
class ScalarTrace:
    """A scalar time series with trapezoidal integration."""

    times: np.ndarray
    values: np.ndarray

    def value_at(self, t):
        return float(np.interp(t, self.times, self.values))

    def time_integral(self, t=None):
        if t is None:
            t = self.times[-1]
        n = int(np.searchsorted(self.times, t, side="right"))
        ts = np.append(self.times[:n], t)
        vs = np.append(self.values[:n], self.value_at(t))
        return float(np.trapezoid(vs, ts))


@dataclass
class FieldTrace:
    times: np.ndarray                       # decimated snapshot times
    fields: list                            # matching LatticeField snapshots
    running_time_integral_at_walkers: float  # int_0^T sum_q w(X_q(s), s) ds
    step_times: np.ndarray                  # full-resolution grid
    walker_values: np.ndarray               # (n_steps + 1, p) w at walkers
    origin_values: np.ndarray               # (n_steps + 1,) w(0, .)

    def origin_trace(self):
        return ScalarTrace(self.step_times, self.origin_values)


def _source_half_step(w, rows, cols, factor):
    """Apply the exact point-source update w <- (w + 1) * factor - 1 at the
    given (row, replica) pairs.

    One scatter per walker; applying the walkers sequentially makes
    coincident walkers compound into factor^count, which is the exact
    multi-occupancy update.
    """
    for q in range(rows.shape[0]):
        r = rows[q]
        w[r, cols] = (w[r, cols] + 1.0) * factor - 1.0


def evolve_sources(box, d, src_idx, gamma, rho, dt, w0=None, check_every=1):
    """Batched splitting integrator for the moving-source problem.

    src_idx   int array (n_steps + 1, p, R): flat site index of each of the
              p walkers in each of the R replicas, at every step time
    w0        optional initial field (n_sites, R); zeros by default

    Returns (w, line_integral, walker_vals) where line_integral[r] is the
    trapezoidal accumulation of sum_q w(X_q(t), t) over the grid and
    walker_vals has shape (n_steps + 1, p, R).
    """
    side = box.side
    n_sites = side**d
    n_steps = src_idx.shape[0] - 1
    p, n_rep = src_idx.shape[1], src_idx.shape[2]
    w = np.zeros((n_sites, n_rep)) if w0 is None else w0.copy()
    kernel = heat_step_matrix(side, rho * dt, box.boundary)
    cols = np.arange(n_rep)
    cols2 = np.broadcast_to(cols, (p, n_rep))
    half = math.exp(gamma * dt / 2.0)
    walker_vals = np.empty((n_steps + 1, p, n_rep))
    walker_vals[0] = w[src_idx[0], cols2]
    line = np.zeros(n_rep)
    scratch = np.empty_like(w)
    for j in range(n_steps):
        _source_half_step(w, src_idx[j], cols, half)
        w, scratch = apply_heat(w, kernel, side, d, scratch)
        _source_half_step(w, src_idx[j + 1], cols, half)
        walker_vals[j + 1] = w[src_idx[j + 1], cols2]
        if check_every and (j + 1) % check_every == 0 and np.min(w) < 0.0:
            raise NumericalError(
                "negative field value appeared during time stepping",
                step=j + 1, dt=dt)
        line += 0.5 * dt * (walker_vals[j].sum(axis=0)
                            + walker_vals[j + 1].sum(axis=0))
    return w, line, walker_vals


def solve_w(traj, params, box, initial=None, snapshot_stride=None):
    """Integrate the moving-source problem along one trajectory set.

    Walkers must stay inside the box for the whole horizon.  Snapshots are
    stored every snapshot_stride steps (default: about 32 snapshots); the
    walker-line integral is accumulated at full resolution.
    """
    if traj.d != params.d:
        raise DomainError("trajectory dimension does not match params")
    for pa in traj.paths:
        if pa.max_abs_coordinate() > box.radius:
            raise DomainError(
                "walker leaves the box; increase the box radius")
    n_steps = max(1, int(round(traj.horizon / box.dt)))
    dt = traj.horizon / n_steps
    times = dt * np.arange(n_steps + 1)
    d = params.d
    src = np.empty((n_steps + 1, traj.p, 1), dtype=np.int64)
    for q, pa in enumerate(traj.paths):
        src[:, q, 0] = flat_index(pa.positions(times), box.radius, d)
    kernel = heat_step_matrix(box.side, params.rho * dt, box.boundary)
    n_sites = box.side**d
    w0 = None
    if initial is not None:
        if initial.values.shape != (box.side,) * d:
            raise DomainError("initial field does not match the box")
        w0 = initial.values.reshape(n_sites, 1).astype(float)
    w_hist = []
    stride = snapshot_stride or max(1, n_steps // 32)
    # step manually to collect decimated snapshots
    shape = (box.side,) * d
    snap_times = [0.0]
    w_hist.append(LatticeField(d, box.radius,
                               np.zeros(shape) if w0 is None
                               else w0.reshape(shape).copy()))
    cols = np.arange(1)
    cols2 = np.broadcast_to(cols, (traj.p, 1))
    w = np.zeros((n_sites, 1)) if w0 is None else w0.copy()
    half = math.exp(params.gamma * dt / 2.0)
    walker_vals = np.empty((n_steps + 1, traj.p))
    origin_vals = np.empty(n_steps + 1)
    origin_flat = flat_index(np.zeros(d, dtype=int), box.radius, d)
    walker_vals[0] = w[src[0], cols2][:, 0]
    origin_vals[0] = w[origin_flat, 0]
    line = 0.0
    scratch = np.empty_like(w)
    for j in range(n_steps):
        _source_half_step(w, src[j], cols, half)
        w, scratch = apply_heat(w, kernel, box.side, d, scratch)
        _source_half_step(w, src[j + 1], cols, half)
        if np.min(w) < 0.0:
            raise NumericalError(
                "negative field value appeared during time stepping",
                step=j + 1, dt=dt)
        walker_vals[j + 1] = w[src[j + 1], cols2][:, 0]
        origin_vals[j + 1] = w[origin_flat, 0]
        line += 0.5 * dt * (walker_vals[j].sum() + walker_vals[j + 1].sum())
        if (j + 1) % stride == 0 or j + 1 == n_steps:
            snap_times.append(times[j + 1])
            w_hist.append(LatticeField(d, box.radius,
                                       w[:, 0].reshape(shape).copy()))
    return FieldTrace(
        times=np.asarray(snap_times), fields=w_hist,
        running_time_integral_at_walkers=float(line),
        step_times=times, walker_values=walker_vals,
        origin_values=origin_vals,
    )


def pinned_trajectory(params, T, p=None):
    """All p walkers sitting at the origin for the whole horizon."""
    p = p or params.p
    zero = np.zeros(params.d, dtype=int)
    paths = [Path(zero, np.empty(0), np.empty((0, params.d)))
             for _ in range(p)]
    return TrajectorySet(paths, T)


def solve_w_bar(params, T, box):
    """Trace of the pinned majorant w_bar(0, t) on [0, T].

    Same integrator as solve_w, with the p sources fused into one origin
    source of strength p * gamma.
    """
    fused = ModelParams(d=params.d, p=1, kappa=params.kappa,
                        gamma=params.p * params.gamma, rho=params.rho,
                        nu=params.nu)
    trace = solve_w(pinned_trajectory(fused, T, p=1), fused, box)
    return trace.origin_trace()


def w_bar_limit(params, cfg=None):
    """Long-time limit of w_bar(0, t): ratio/(r_d - ratio), else +inf."""
    rd = r_d(params.d, cfg or DEFAULT_CFG)
    if params.d >= 3 and params.ratio < rd:
        return params.ratio / (rd - params.ratio)
    return INF


def _volterra_run(params, T, dt):
    n = max(1, int(round(T / dt)))
    dt = T / n
    times = dt * np.arange(n + 1)
    # lattice return kernel of the rate-2*d*rho walk; bounded, k(0) = 1
    kernel = special.ive(0, 2.0 * params.rho * times) ** params.d
    a = params.p * params.gamma
    w = np.zeros(n + 1)
    denom = 1.0 - a * dt * 0.5 * kernel[0]
    if denom <= 0.0:
        raise NumericalError("Volterra step too coarse: implicit weight >= 1",
                             dt=dt)
    for i in range(1, n + 1):
        conv = 0.5 * kernel[0] + 0.5 * kernel[i] * (w[0] + 1.0)
        if i > 1:
            conv += np.dot(kernel[1:i], w[i - 1:0:-1] + 1.0)
        w[i] = a * dt * conv / denom
    return ScalarTrace(times, w)


def solve_w_bar_volterra(params, T, dt, rel_tol=0.02):
    """w_bar(0, .) from its renewal equation, with a halved-dt verification.

    w(t) = p*gamma int_0^t k(s) (w(t - s) + 1) ds with the lattice return
    kernel k; trapezoidal discretization, solving for the implicit s = 0
    endpoint term.  Raises if the halved-dt rerun moves the endpoint by more
    than rel_tol.
    """
    if not T > 0:
        raise DomainError(f"horizon must be > 0, got {T}")
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    coarse = _volterra_run(params, T, dt)
    fine = _volterra_run(params, T, dt / 2.0)
    a, b = coarse.values[-1], fine.values[-1]
    scale = max(abs(b), 1e-12)
    if abs(a - b) > rel_tol * scale:
        raise NumericalError(
            "Volterra discretization has not converged; reduce dt",
            coarse=a, fine=b, dt=dt)
    return fine


def duhamel_residual(trace, traj, params, sample_sites=None,
                     sample_times=None):
    """Consistency check of the implicit integral representation.

    The field must satisfy w(x, t) = gamma sum_q int_0^t
    p_rho(x - X_q(s), t - s) (w(X_q(s), s) + 1) ds.  The left side comes
    from the stored snapshots, the right side from the full-resolution
    walker values; the sup of the absolute mismatch over the sampled (x, t)
    is returned.
    """
    d = params.d
    if sample_sites is None:
        sample_sites = [np.zeros(d, dtype=int),
                        np.eye(d, dtype=int)[0]]
    if sample_times is None:
        sample_times = [trace.times[len(trace.times) // 2], trace.times[-1]]
    worst = 0.0
    ts = trace.step_times
    for t in sample_times:
        i_snap = int(np.argmin(np.abs(trace.times - t)))
        t = trace.times[i_snap]
        snap = trace.fields[i_snap]
        n = int(np.searchsorted(ts, t, side="right"))
        sub = ts[:n]
        for x in sample_sites:
            rhs = 0.0
            for q, pa in enumerate(traj.paths):
                pos = pa.positions(sub)
                dx = np.abs(x[None, :] - pos)
                dtau = 2.0 * params.rho * (t - sub)
                ker = np.ones(len(sub))
                for axis in range(d):
                    ker *= special.ive(dx[:, axis], dtau)
                integrand = ker * (trace.walker_values[:n, q] + 1.0)
                rhs += float(np.trapezoid(integrand, sub))
            rhs *= params.gamma
            worst = max(worst, abs(snap.at(x) - rhs))
    return worst
