"""Verification engine: sweeps, pair checks, and machine-readable reports.

Every check evaluates a family of signed slacks (LHS - RHS, nonpositive when
the inequality holds), counts violations against a tolerance, and returns a
``VerificationReport``.  Reports are deterministic: the same ``SweepSpec``
(including the seed) produces byte-identical serialized output, worst
locations break ties toward the lowest linear index, and each report's worst
slack can be reproduced by re-evaluating the single reported location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError
from .kernels import Convention, KernelJet, euclid_jet, h2_kernel, h3_jet, periodic_jet
from .bounds import (Estimate, GRADIENT_ESTIMATES, alpha_phi, dm_h, estimate_sides,
                     kernel_lower_bound, log_harnack_factor, lyh_kinematics,
                     monotone_weight)
from .solvers import PeriodicSolution, RadialGrid, solve_radial
from .special import log_sinh_ratio
from .spaces import (CIRCLE, EUCLIDEAN, FLAT_TORUS, HYPERBOLIC, ModelSpace,
                     radial_laplacian_coefficient, ricci_lower_bound)

CHECKS = ("gradient", "perelman", "harnack", "lyh", "kernel-bounds",
          "residuals", "monotone")

#: default tolerances: analytic jets vs solver/finite-difference backed checks
TOL_ANALYTIC = 1e-7
TOL_FD = 1e-4


@dataclass
class SweepSpec:
    space: ModelSpace
    check: str
    estimate: Estimate | None = None
    r_grid: np.ndarray | None = None
    t_grid: np.ndarray | None = None
    pair_count: int = 10000
    seed: int = 20240
    tol: float | None = None
    k: float | None = None               # None: use the space's sharp bound
    alpha: float | None = None           # li-yau / davies parameter
    sup_bound_factor: float = 1.0        # hamilton-log ceiling scale (negative control < 1)
    branch: str = "energy"               # s-branch for the lyh check
    fd_dt: float = 1e-4                  # time step for finite-difference residuals
    fd_tol: float = 1e-5                 # tolerance for finite-difference residuals
    sample_rows: int = 12                # worst rows echoed into the JSON report

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ContractError(f"unknown check {self.check!r}")
        if self.tol is not None and not 0 < self.tol < 1:
            raise ContractError("tol must lie in (0, 1)")
        if self.t_grid is not None:
            tg = np.asarray(self.t_grid, dtype=float)
            if np.any(tg <= 0) or np.any(np.diff(tg) <= 0):
                raise ContractError("t_grid must be positive and strictly increasing")
        if self.pair_count <= 0:
            raise ContractError("pair_count must be positive")

    def resolved_tol(self, default: float) -> float:
        return default if self.tol is None else self.tol

    def resolved_k(self) -> float:
        return ricci_lower_bound(self.space).k if self.k is None else float(self.k)


@dataclass
class VerificationReport:
    check: str
    params: dict
    tolerance: float
    n_samples: int
    violations: int
    worst_slack: float
    worst_location: tuple
    columns: tuple
    rows: list = field(repr=False, default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def worst_rows(self, count: int) -> list:
        order = sorted(range(len(self.rows)), key=lambda i: (-self.rows[i][-1], i))
        return [self.rows[i] for i in order[:count]]

    def to_json_dict(self, sample_rows: int = 12) -> dict:
        return {
            "command": self.check,
            "params": self.params,
            "tolerance": self.tolerance,
            "n_samples": self.n_samples,
            "violations": self.violations,
            "worst_slack": self.worst_slack,
            "worst_location": list(self.worst_location),
            "pass": self.passed,
            "columns": list(self.columns),
            "samples": self.worst_rows(sample_rows),
            "notes": self.notes,
        }


def run_check(spec: SweepSpec) -> VerificationReport:
    """Dispatch a SweepSpec to its check implementation."""
    return {
        "gradient": sweep_gradient_estimate,
        "perelman": sweep_perelman,
        "harnack": check_harnack_pairs,
        "lyh": check_lyh_harnack,
        "kernel-bounds": check_kernel_bounds,
        "residuals": check_evolution_residuals,
        "monotone": check_monotone_weight,
    }[spec.check](spec)


# ---------------------------------------------------------------------------
# grids and jet supply
# ---------------------------------------------------------------------------


def geometric_grid(lo: float, hi: float, ratio: float = 1.2) -> np.ndarray:
    vals = [lo]
    while vals[-1] * ratio < hi * (1.0 - 1e-12):
        vals.append(vals[-1] * ratio)
    if vals[-1] < hi:
        vals.append(hi)
    return np.asarray(vals)


def default_space_grid(space: ModelSpace, hi: float = 8.0, num: int = 400) -> np.ndarray:
    if space.is_radial:
        return np.linspace(0.05, hi, num)
    half = min(space.lengths) / 2.0
    return np.linspace(-half, half, 201)


class JetSource:
    """Supplies log-derivative jets for a space on a fixed coordinate grid.

    Closed forms serve Euclidean space, H^3 and the periodic spaces; H^2
    falls back to the Crank-Nicolson solver with finite-difference time
    derivatives (checks using it default to the coarser tolerance).
    """

    def __init__(self, space: ModelSpace, coord_grid: np.ndarray,
                 t_values=(), fd_dt: float = 1e-4):
        self.space = space
        self.grid = np.asarray(coord_grid, dtype=float)
        self.fd_backed = space.kind == HYPERBOLIC and space.dim == 2
        self._solver_snaps = None
        if self.fd_backed:
            self._prepare_solver(sorted(set(float(t) for t in t_values)), fd_dt)
        elif space.kind == HYPERBOLIC and space.dim != 3:
            raise ContractError("hyperbolic jets are available for dim 2 and 3 only")

    def jets(self, t: float, convention: Convention = Convention.LN_U) -> KernelJet:
        sp = self.space
        if sp.kind == EUCLIDEAN:
            jet = euclid_jet(sp.dim, self.grid, t)
        elif sp.kind == HYPERBOLIC and sp.dim == 3:
            jet = h3_jet(self.grid, t, sp.curvature_scale)
        elif sp.is_periodic:
            jet = periodic_jet(sp.lengths, self._periodic_coords(), t)
        else:
            jet = self._solver_jet(t)
        return jet.to(convention)

    def distances(self) -> np.ndarray:
        """Geodesic distance of each grid node from the pole."""
        if self.space.is_radial:
            return self.grid
        if self.space.kind == CIRCLE:
            return np.abs(self.grid)
        coords = self._periodic_coords()
        return np.sqrt(sum(np.abs(c) ** 2 for c in coords))

    def _periodic_coords(self):
        if self.space.kind == CIRCLE:
            return self.grid
        # torus: mesh the same 1-d grid scaled to each axis, flattened
        axes = [self.grid * (L / (np.max(np.abs(self.grid)) * 2.0)) for L in self.space.lengths]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [m.ravel() for m in mesh]

    def _prepare_solver(self, t_values, fd_dt):
        if not t_values:
            raise ContractError("solver-backed jets need the t values up front")
        t0 = min(0.05, t_values[0] / 2.0)
        snap_times = sorted({round(s, 12) for t in t_values
                             for s in (t - fd_dt, t, t + fd_dt)})
        grid = RadialGrid(r_min=1e-3, r_max=max(14.0, float(self.grid.max()) + 8.0),
                          dr=2e-3, dt=2e-3)
        # segmented solve that lands exactly on every snapshot time: the
        # finite-difference step is far below the nominal dt, so snapping to
        # step times would destroy the time derivative
        r = grid.nodes()
        u = np.maximum(_h2_series_start(r, t0), 1e-300)
        snaps = {}
        t_prev = t0
        sol = None
        for s in snap_times:
            u_prev = u
            sol = solve_radial(self.space, lambda _: u_prev, grid, t_prev, s)
            u = sol.u
            snaps[s] = u
            t_prev = s
        sol.snapshots = snaps
        self._solver_snaps = (sol, fd_dt)

    def _solver_jet(self, t: float) -> KernelJet:
        sol, fd = self._solver_snaps
        key = lambda s: min(sol.snapshots, key=lambda q: abs(q - s))
        u0, um, up = (sol.snapshots[key(s)] for s in (t, t - fd, t + fd))
        r, dr = sol.r, sol.r[1] - sol.r[0]
        f = np.log(u0)
        f_r = np.gradient(f, dr, edge_order=2)
        f_rr = np.gradient(f_r, dr, edge_order=2)
        f_t = (np.log(up) - np.log(um)) / (2.0 * fd)
        lap = f_rr + radial_laplacian_coefficient(self.space, r) * f_r
        jet = KernelJet(u=np.interp(self.grid, r, u0), f=np.interp(self.grid, r, f),
                        f_r=np.interp(self.grid, r, f_r), f_rr=np.interp(self.grid, r, f_rr),
                        f_t=np.interp(self.grid, r, f_t), lap_f=np.interp(self.grid, r, lap),
                        gradsq=np.interp(self.grid, r, f_r) ** 2,
                        convention=Convention.LN_U, n=self.space.dim, t=t)
        return jet


def _h2_series_start(r, t0):
    """Small-time start profile for the H^2 solver runs (exact kernel values)."""
    return np.array([h2_kernel(float(ri), t0) for ri in np.asarray(r)])


# ---------------------------------------------------------------------------
# gradient-estimate sweeps
# ---------------------------------------------------------------------------


def sweep_gradient_estimate(spec: SweepSpec) -> VerificationReport:
    """Evaluate one gradient estimate's slack on the space-time grid."""
    if spec.estimate is None or spec.estimate not in GRADIENT_ESTIMATES:
        raise ContractError("gradient sweep needs a gradient-estimate tag")
    space, est = spec.space, spec.estimate
    n, k = space.dim, spec.resolved_k()
    r_grid = default_space_grid(space) if spec.r_grid is None else np.asarray(spec.r_grid, float)
    t_grid = geometric_grid(0.05, 8.0) if spec.t_grid is None else np.asarray(spec.t_grid, float)
    source = JetSource(space, r_grid, t_values=t_grid, fd_dt=spec.fd_dt)
    tol = spec.resolved_tol(TOL_FD if source.fd_backed else TOL_ANALYTIC)

    sup_bound = None
    if est is Estimate.HAMILTON_LOG:
        if not space.is_periodic:
            raise ContractError("hamilton-log is certified on compact spaces only")
        # ceiling A = sup of the solution at the earliest sweep time (the
        # maximum principle propagates it forward); the factor scales it for
        # negative controls
        sup_bound = float(np.max(source.jets(float(t_grid[0])).u)) * spec.sup_bound_factor

    dist = source.distances()
    rows = []
    for t in t_grid:
        jet = source.jets(float(t))
        lhs, rhs = estimate_sides(est, jet, n, k, float(t),
                                  alpha=spec.alpha, sup_bound=sup_bound)
        lhs, rhs = np.broadcast_to(lhs, dist.shape), np.broadcast_to(rhs, dist.shape)
        for i in range(dist.size):
            rows.append((float(dist[i]), float(t), float(lhs[i]), float(rhs[i]),
                         float(lhs[i] - rhs[i])))
    return _finish(spec, rows, ("r", "t", "lhs", "rhs", "slack"), tol,
                   params=dict(space=_space_id(space), estimate=est.value, n=n, k=k,
                               alpha=spec.alpha, sup_bound_factor=spec.sup_bound_factor,
                               seed=spec.seed))


def sweep_perelman(spec: SweepSpec) -> VerificationReport:
    """Check the normalized-kernel differential inequality v/u <= 0, plus its
    evolution identity (by finite differences in time) on periodic spaces."""
    space = spec.space
    n, k = space.dim, spec.resolved_k()
    r_grid = default_space_grid(space) if spec.r_grid is None else np.asarray(spec.r_grid, float)
    t_grid = geometric_grid(0.05, 5.0) if spec.t_grid is None else np.asarray(spec.t_grid, float)
    source = JetSource(space, r_grid, t_values=t_grid, fd_dt=spec.fd_dt)
    tol = spec.resolved_tol(TOL_FD if source.fd_backed else TOL_ANALYTIC)
    est = Estimate.NI if k == 0.0 else Estimate.PERELMAN

    dist = source.distances()
    rows = []
    for t in t_grid:
        jet = source.jets(float(t), Convention.MINUS_LN)
        lhs, rhs = estimate_sides(est, jet, n, k, float(t))
        lhs = np.broadcast_to(lhs, dist.shape)
        rhs = np.broadcast_to(rhs, dist.shape)
        for i in range(dist.size):
            rows.append((float(dist[i]), float(t), float(lhs[i]), float(rhs[i]),
                         float(lhs[i] - rhs[i])))
    report = _finish(spec, rows, ("r", "t", "lhs", "rhs", "slack"), tol,
                     params=dict(space=_space_id(space), estimate=est.value, n=n, k=k,
                                 seed=spec.seed))

    if space.kind == CIRCLE:
        worst = _perelman_evolution_residual(space, k, t_grid, spec.fd_dt)
        report.notes.append(
            f"evolution-identity residual (fd dt={spec.fd_dt:g}): worst {worst:.3e}")
        if worst > spec.fd_tol:
            report.violations += 1
            report.notes.append(
                f"evolution-identity residual exceeded fd_tol={spec.fd_tol:g}")
    return report


def _perelman_evolution_residual(space, k, t_grid, fd_dt) -> float:
    """Worst residual of (d/dt - Laplacian) v = -2t |hess f - (1/2t + k/2) g|^2 u
    - 2t (Ric + k)(grad f, grad f) u for the circle kernel (Ric = 0)."""
    L = space.lengths[0]
    m = 256
    x = -L / 2.0 + L * np.arange(m) / m

    def v_field(t):
        jet = periodic_jet(space.lengths, x, t).to(Convention.MINUS_LN)
        bracket = (t * jet.lap_f + t * (1.0 + k * t) * (jet.lap_f - jet.gradsq)
                   + jet.f - 1.0 * (1.0 + 0.5 * k * t) ** 2)
        return bracket * jet.u, jet

    worst = 0.0
    for t in t_grid[::max(1, len(t_grid) // 6)]:
        t = float(t)
        v0, jet = v_field(t)
        vp, _ = v_field(t + fd_dt)
        vm, _ = v_field(t - fd_dt)
        dv_dt = (vp - vm) / (2.0 * fd_dt)
        lap_v = _spectral_laplacian(v0, L)
        hess_term = (jet.f_rr - (1.0 / (2.0 * t) + 0.5 * k)) ** 2
        rhs = -2.0 * t * hess_term * jet.u - 2.0 * t * k * jet.gradsq * jet.u
        worst = max(worst, float(np.abs(dv_dt - lap_v - rhs).max()))
    return worst


def _spectral_laplacian(values, length):
    xi = 2.0 * math.pi * np.fft.fftfreq(values.size, d=length / values.size)
    return -np.real(np.fft.ifft(np.fft.fft(values) * xi ** 2))


def _spectral_derivative(values, length):
    xi = 2.0 * math.pi * np.fft.fftfreq(values.size, d=length / values.size)
    return np.real(np.fft.ifft(np.fft.fft(values) * 1j * xi))



# ---------------------------------------------------------------------------
# Harnack pair checks
# ---------------------------------------------------------------------------


def _draw_pairs(spec: SweepSpec, t_lo: float, t_hi: float, r_hi: float):
    """Deterministic space-time pairs with t1 < t2 from the spec's seed."""
    rng = np.random.default_rng(spec.seed)
    npairs = spec.pair_count
    t1 = rng.uniform(t_lo, t_hi, npairs)
    t2 = t1 + rng.uniform(1e-3, t_hi - t_lo, npairs)
    if spec.space.is_radial:
        # pairs on a single ray through the pole: the geodesic distance is
        # exactly |r1 - r2|, which matters because the factor is exponential
        # in d^2
        r1 = rng.uniform(0.0, r_hi, npairs)
        r2 = rng.uniform(0.0, r_hi, npairs)
        d = np.abs(r1 - r2)
    else:
        halves = [L / 2.0 for L in spec.space.lengths]
        x1 = np.stack([rng.uniform(-h, h, npairs) for h in halves])
        x2 = np.stack([rng.uniform(-h, h, npairs) for h in halves])
        diff = np.abs(x1 - x2)
        for i, L in enumerate(spec.space.lengths):
            diff[i] = np.minimum(diff[i], L - diff[i])
        d = np.sqrt((diff ** 2).sum(axis=0))
        r1, r2 = (x1[0], x2[0]) if len(halves) == 1 else (x1, x2)
    return t1, t2, r1, r2, d


def _kernel_values(space: ModelSpace, pos, t):
    if space.kind == EUCLIDEAN:
        return _per_time(lambda p, s: euclid_jet(space.dim, p, s).u, pos, t)
    if space.kind == HYPERBOLIC and space.dim == 3:
        return _per_time(lambda p, s: h3_jet(p, s, space.curvature_scale).u, pos, t)
    if space.kind == HYPERBOLIC and space.dim == 2:
        return np.array([h2_kernel(float(p), float(s)) for p, s in zip(np.atleast_1d(pos), np.atleast_1d(t))])
    if space.kind == CIRCLE:
        return _per_time(lambda p, s: periodic_jet(space.lengths, p, s).u, pos, t)
    # torus: pos has one row per axis
    return _per_time(lambda p, s: periodic_jet(space.lengths, list(p), s).u,
                     pos, t, axis=1)


def _per_time(fn, pos, t, axis=0):
    pos = np.asarray(pos, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape)
    # kernel constructors take scalar t; group positions by time value
    order = np.argsort(t, kind="stable")
    sorted_t = t[order]
    start = 0
    while start < t.size:
        stop = start
        while stop < t.size and sorted_t[stop] == sorted_t[start]:
            stop += 1
        idx = order[start:stop]
        sel = pos[:, idx] if axis == 1 else pos[idx]
        out[idx] = fn(sel, float(sorted_t[start]))
        start = stop
    return out


def check_harnack_pairs(spec: SweepSpec) -> VerificationReport:
    """u(x1,t1) <= factor * u(x2,t2) on seeded pairs, for both factor variants.

    Slack is the relative excess u1 / (factor * u2) - 1, computed in log
    space because the factor's exponent can overflow for distant pairs.
    """
    space = spec.space
    n, k = space.dim, spec.resolved_k()
    tol = spec.resolved_tol(TOL_ANALYTIC)
    t1, t2, p1, p2, d = _draw_pairs(spec, 0.1, 5.0, 6.0)
    log_u1 = np.log(_kernel_values(space, p1, t1))
    log_u2 = np.log(_kernel_values(space, p2, t2))
    if space.kind == FLAT_TORUS:  # label multi-axis points by distance from the pole
        r1 = np.sqrt((np.asarray(p1) ** 2).sum(axis=0))
        r2 = np.sqrt((np.asarray(p2) ** 2).sum(axis=0))
    else:
        r1, r2 = p1, p2

    rows = []
    for variant in ("main", "linearized"):
        log_bound = log_harnack_factor(variant, n, k, t1, t2, d) + log_u2
        slack = np.expm1(log_u1 - log_bound)
        for i in range(slack.size):
            rows.append((variant, float(r1[i]), float(t1[i]), float(r2[i]),
                         float(t2[i]), float(log_u1[i]), float(log_bound[i]),
                         float(slack[i])))
    report = _finish(spec, rows, ("variant", "r1", "t1", "r2", "t2", "log_u1",
                                  "log_bound", "slack"),
                     tol, params=dict(space=_space_id(space), n=n, k=k,
                                      pair_count=spec.pair_count, seed=spec.seed))
    report.notes.append(
        "pair times start at t1 = 0.1; the time-coupling factor degenerates "
        "as t1 -> 0 and stays untested below that")
    return report


# ---------------------------------------------------------------------------
# weighted log-kernel Harnack (the t-tilde / s / Phi comparison)
# ---------------------------------------------------------------------------


def check_lyh_harnack(spec: SweepSpec) -> VerificationReport:
    """Three-part check of the weighted log-kernel comparison.

    (a) pairwise: sqrt(tt2) f2 - sqrt(tt1) f1 <= d^2/(4 (s2 - s1)) + (n/4)(Phi2 - Phi1)
    (b) pointwise: f <= d^2/(4t) for k = 0, else f <= d^2/(4 sqrt(tt) s) + (n/4) Phi / sqrt(tt)
    (c) the pointwise Hamilton-Jacobi inequality
        |grad f|^2 + (2 + kt) f_t + f/t <= nk (2 + kt)/4

    all with f in the normalized convention.  Assertions use the spec's
    s-branch (default "energy"); outcomes under the other branches are
    recorded in the notes without being asserted.
    """
    space = spec.space
    if not (space.kind == EUCLIDEAN or (space.kind == HYPERBOLIC and space.dim == 3)):
        raise ContractError("lyh check needs Euclidean space or H^3 (kernel with a pole)")
    n, k = space.dim, spec.resolved_k()
    tol = spec.resolved_tol(1e-6)
    r_grid = np.linspace(0.05, 6.0, 200) if spec.r_grid is None else np.asarray(spec.r_grid, float)
    t_grid = geometric_grid(0.05, 6.0) if spec.t_grid is None else np.asarray(spec.t_grid, float)
    source = JetSource(space, r_grid, t_values=t_grid)

    def f_of(r, t):
        # normalized log-kernel f with u = e^{-f}/(4 pi t)^{n/2}, vectorized in t
        if space.kind == EUCLIDEAN:
            return r ** 2 / (4.0 * t)
        K = space.curvature_scale
        return log_sinh_ratio(math.sqrt(K) * r) + K * t + r ** 2 / (4.0 * t)

    rows = []
    branch_worst = {b: -math.inf for b in ("energy", "integral", "sqrt-t")}

    # (a) seeded pairs
    t1, t2, r1, r2, d = _draw_pairs(spec, 0.1, 5.0, 6.0)
    f1, f2 = f_of(r1, t1), f_of(r2, t2)
    for branch in branch_worst:
        tt1, s1, ph1 = lyh_kinematics(k, t1, branch)
        tt2, s2, ph2 = lyh_kinematics(k, t2, branch)
        lhs = np.sqrt(tt2) * f2 - np.sqrt(tt1) * f1
        rhs = d ** 2 / (4.0 * (s2 - s1)) + 0.25 * n * (ph2 - ph1)
        slack = lhs - rhs
        branch_worst[branch] = max(branch_worst[branch], float(slack.max()))
        if branch == spec.branch:
            for i in range(slack.size):
                rows.append(("pair", float(r1[i]), float(t1[i]), float(r2[i]),
                             float(t2[i]), float(lhs[i]), float(rhs[i]), float(slack[i])))

    # (b) pointwise kernel upper bound, (c) Hamilton-Jacobi inequality
    for t in t_grid:
        t = float(t)
        jet = source.jets(t, Convention.MINUS_LN)
        for branch in branch_worst:
            tt, s, ph = lyh_kinematics(k, t, branch)
            if k == 0.0:
                bound = r_grid ** 2 / (4.0 * t)
            else:
                bound = r_grid ** 2 / (4.0 * math.sqrt(tt) * s) + 0.25 * n * ph / math.sqrt(tt)
            slack = jet.f - bound
            branch_worst[branch] = max(branch_worst[branch], float(slack.max()))
            if branch == spec.branch:
                for i in range(slack.size):
                    rows.append(("pointwise", float(r_grid[i]), t, math.nan, math.nan,
                                 float(jet.f[i]), float(bound[i]), float(slack[i])))
        lhs = jet.gradsq + (2.0 + k * t) * jet.f_t + jet.f / t
        rhs = 0.25 * n * k * (2.0 + k * t)
        slack = lhs - rhs
        for i in range(slack.size):
            rows.append(("hji", float(r_grid[i]), t, math.nan, math.nan,
                         float(lhs[i]), float(rhs), float(slack[i])))

    report = _finish(spec, rows, ("part", "r1", "t1", "r2", "t2", "lhs", "rhs", "slack"),
                     tol, params=dict(space=_space_id(space), n=n, k=k,
                                      branch=spec.branch, pair_count=spec.pair_count,
                                      seed=spec.seed))
    for branch, worst in sorted(branch_worst.items()):
        tag = "asserted" if branch == spec.branch else "recorded, not asserted"
        report.notes.append(f"s-branch {branch!r}: worst slack {worst:.6e} ({tag})")
    return report


# ---------------------------------------------------------------------------
# kernel lower bounds
# ---------------------------------------------------------------------------


def check_kernel_bounds(spec: SweepSpec) -> VerificationReport:
    """Lower bounds below the exact kernel; two-sided comparison constants scanned."""
    space = spec.space
    if not space.is_radial:
        raise ContractError("kernel-bounds needs a Euclidean or hyperbolic space")
    n, k = space.dim, spec.resolved_k()
    tol = spec.resolved_tol(TOL_ANALYTIC)
    d_grid = np.linspace(0.0, 5.0, 251) if spec.r_grid is None else np.asarray(spec.r_grid, float)
    t_grid = geometric_grid(0.05, 5.0) if spec.t_grid is None else np.asarray(spec.t_grid, float)

    rows = []
    ratio_lo, ratio_hi = math.inf, -math.inf
    for t in t_grid:
        t = float(t)
        u = _kernel_values(space, d_grid, np.full_like(d_grid, t))
        for variant in ("main", "linearized"):
            b = kernel_lower_bound(variant, n, k, d_grid, t)
            slack = b / u - 1.0
            for i in range(d_grid.size):
                rows.append((f"lower-{variant}", float(d_grid[i]), t,
                             float(b[i]), float(u[i]), float(slack[i])))
        if space.kind == HYPERBOLIC:
            # cross-space domination: the flat kernel lies above at equal (d, t)
            ue = euclid_jet(n, d_grid, t).u
            slack = u / ue - 1.0
            for i in range(d_grid.size):
                rows.append(("cross-space", float(d_grid[i]), t,
                             float(u[i]), float(ue[i]), float(slack[i])))
            mask = d_grid >= 0.1
            ratio = u[mask] / dm_h(n, space.curvature_scale, d_grid[mask], t)
            ratio_lo = min(ratio_lo, float(ratio.min()))
            ratio_hi = max(ratio_hi, float(ratio.max()))

    report = _finish(spec, rows, ("kind", "d", "t", "lhs", "rhs", "slack"), tol,
                     params=dict(space=_space_id(space), n=n, k=k, seed=spec.seed))
    if space.kind == HYPERBOLIC:
        c = max(ratio_hi, 1.0 / ratio_lo)
        report.notes.append(
            f"two-sided comparison profile: kernel/h ratio in [{ratio_lo:.6f}, "
            f"{ratio_hi:.6f}], scanned c = {c:.6f} (reported, not asserted)")
        if not (0.0 < ratio_lo <= ratio_hi < math.inf):
            report.violations += 1
            report.notes.append("comparison ratio scan produced a non-finite bracket")
    return report


# ---------------------------------------------------------------------------
# evolution identities (periodic, spectral space / finite-difference time)
# ---------------------------------------------------------------------------


def check_evolution_residuals(spec: SweepSpec) -> VerificationReport:
    """Residuals of the pointwise evolution identities on the circle.

    Spatial derivatives are spectral (exact for the trigonometric
    interpolant); time derivatives of composite quantities use central
    differences with step ``fd_dt``.  Checked for the heat kernel and for a
    non-kernel positive solution, each under k = 0 and one k > 0 (the
    identities hold for every k; curvature only enters through the
    (Ric + k) term, and Ric = 0 here).
    """
    space = spec.space
    if space.kind != CIRCLE:
        raise ContractError("residual checks run on the circle")
    tol = spec.resolved_tol(spec.fd_tol)
    L = space.lengths[0]
    m = 256
    x = -L / 2.0 + L * np.arange(m) / m
    t_values = (0.3, 1.0, 2.0) if spec.t_grid is None else tuple(float(t) for t in spec.t_grid)
    fd = spec.fd_dt

    base = PeriodicSolution.from_function(
        lambda xx: 1.0 + 0.5 * np.cos(2.0 * math.pi * xx / L), (L,), m, 0.05)
    base = replace_coefficients_unit_mass(base, L)

    def jets_at(solution_kind, t):
        if solution_kind == "kernel":
            return periodic_jet((L,), x, t)
        return base.evolve(t).jet()

    rows = []
    for solution_kind in ("kernel", "non-kernel"):
        for k in (0.0, 0.5):
            for t in t_values:
                for name, resid in _identity_residuals(jets_at, solution_kind,
                                                       t, k, L, fd):
                    rows.append((f"{name}", solution_kind, float(k), float(t),
                                 float(np.abs(resid).max())))
    # the residual magnitude is the slack: it must stay below the fd tolerance
    columns = ("identity", "solution", "k", "t", "slack")
    params = dict(space=_space_id(space), fd_dt=fd, t_values=list(t_values),
                  seed=spec.seed)
    return _finish(spec, rows, columns, tol, params=params)


def replace_coefficients_unit_mass(sol: PeriodicSolution, L: float) -> PeriodicSolution:
    c = sol.coefficients / (sol.mean() * L)
    return PeriodicSolution(sol.lengths, c, sol.t0)


def _identity_residuals(jets_at, solution_kind, t, k, L, fd):
    """Yield (name, residual array) for each evolution identity at time t.

    Time derivatives of composite quantities use a fourth-order central
    stencil with step h = 1e-3: the second-order one would need a step small
    enough that its truncation error crosses the 1e-5 target right where the
    integrands are largest.
    """
    h = 1e-3
    jet0 = jets_at(solution_kind, t)
    jets = {s: jets_at(solution_kind, t + s * h) for s in (-2, -1, 1, 2)}

    def ddt(field):
        return (field(jets[-2], t - 2 * h) - 8.0 * field(jets[-1], t - h)
                + 8.0 * field(jets[1], t + h) - field(jets[2], t + 2 * h)) / (12.0 * h)

    def lap(values):
        return _spectral_laplacian(values, L)

    def dx(values):
        return _spectral_derivative(values, L)

    f, fx, fxx, ft, gs = jet0.f, jet0.f_r, jet0.f_rr, jet0.f_t, jet0.gradsq

    # log heat equation (no finite differences needed)
    yield "log-heat", ft - (fxx + gs)

    # (lap - d/dt) f_t = -2 grad f grad f_t
    lhs = lap(ft) - ddt(lambda j, s: j.f_t)
    yield "ft-evolution", lhs + 2.0 * fx * dx(ft)

    # (lap - d/dt) |grad f|^2 = 2 f_xx^2 - 2 grad(|grad f|^2) grad f  (Ric = 0)
    lhs = lap(gs) - ddt(lambda j, s: j.gradsq)
    yield "gradsq-evolution", lhs - (2.0 * fxx ** 2 - 2.0 * dx(gs) * fx)

    # F-evolution for both coefficient pairs:
    # (lap - d/dt) F = 2 |f_xx + b|^2 - 2 F_x f_x + c F + 2 k f_x^2
    for variant in ("linearized", "main"):
        if variant == "main" and k == 0.0:
            continue  # degenerates to the linearized identity at k = 0
        def F_of(j, s):
            pair = alpha_phi(variant, 1, k, s)
            return j.gradsq - pair.alpha * j.f_t - pair.phi
        F = F_of(jet0, t)
        if variant == "linearized":
            b = 1.0 / (2.0 * t) + 0.5 * k
            c = 2.0 / t
        else:
            pair = alpha_phi("main", 1, k, t)
            b = pair.phi  # phi/n with n = 1
            c = 2.0 * k / math.tanh(k * t)
        lhs = lap(F) - ddt(F_of)
        rhs = 2.0 * (fxx + b) ** 2 - 2.0 * dx(F) * fx + c * F + 2.0 * k * gs
        yield f"F-evolution-{variant}", lhs - rhs

    # weighted-product identities, f_bar = -ln u:
    # (lap - d/dt)(beta F u) = 2 beta |f_bar_xx - b|^2 u + 2 beta k f_bar_x^2 u
    u = jet0.u
    for variant in ("linearized", "main"):
        if variant == "main" and k == 0.0:
            continue
        def Fu_of(j, s):
            pair = alpha_phi(variant, 1, k, s)
            beta = s ** 2 if variant == "linearized" else math.sinh(k * s) ** 2
            # in terms of the ln-u jet: |grad fbar|^2 + alpha fbar_t - phi
            #   with fbar = -f: gradsq same, fbar_t = -f_t
            return beta * (j.gradsq - pair.alpha * j.f_t - pair.phi) * j.u
        beta0 = t ** 2 if variant == "linearized" else math.sinh(k * t) ** 2
        if variant == "linearized":
            b = 1.0 / (2.0 * t) + 0.5 * k
        else:
            b = alpha_phi("main", 1, k, t).phi
        lhs = lap(Fu_of(jet0, t)) - ddt(Fu_of)
        fbar_xx = -fxx
        rhs = 2.0 * beta0 * (fbar_xx - b) ** 2 * u + 2.0 * beta0 * k * gs * u
        yield f"weighted-product-{variant}", lhs - rhs


# ---------------------------------------------------------------------------
# monotone weight
# ---------------------------------------------------------------------------


def check_monotone_weight(spec: SweepSpec) -> VerificationReport:
    """t -> weight(t) u(x, t) must be nondecreasing; also the pointwise form
    -alpha f_t <= phi for both coefficient pairs."""
    space = spec.space
    n, k = space.dim, spec.resolved_k()
    tol = spec.resolved_tol(TOL_ANALYTIC)
    t_grid = geometric_grid(0.05, 5.0) if spec.t_grid is None else np.asarray(spec.t_grid, float)
    if spec.r_grid is None:
        if space.is_radial:
            points = np.array([0.5, 1.0, 2.0, 3.0, 5.0])
        else:
            half = min(space.lengths) / 2.0
            points = np.linspace(-0.9 * half, 0.9 * half, 5)
    else:
        points = np.asarray(spec.r_grid, float)
    source = JetSource(space, points, t_values=t_grid, fd_dt=spec.fd_dt)

    values = np.empty((t_grid.size, points.size))
    rows = []
    for it, t in enumerate(t_grid):
        t = float(t)
        jet = source.jets(t)
        values[it] = monotone_weight(n, k, t) * jet.u
        for variant in ("main", "linearized"):
            pair = alpha_phi(variant, n, k, t)
            lhs = np.broadcast_to(-pair.alpha * jet.f_t, points.shape)
            slack = lhs - pair.phi
            for i in range(points.size):
                rows.append((f"pointwise-{variant}", float(points[i]), t,
                             float(lhs[i]), float(slack[i])))
    # relative forward differences of the weighted values
    for i in range(points.size):
        for it in range(t_grid.size - 1):
            rel = values[it + 1, i] / values[it, i] - 1.0
            rows.append(("weighted-monotone", float(points[i]), float(t_grid[it]),
                         float(values[it, i]), float(-rel)))
    return _finish(spec, rows, ("kind", "x", "t", "value", "slack"), tol,
                   params=dict(space=_space_id(space), n=n, k=k, seed=spec.seed))


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _space_id(space: ModelSpace) -> str:
    if space.kind == EUCLIDEAN:
        return f"euclidean{space.dim}"
    if space.kind == HYPERBOLIC:
        return f"h{space.dim}" + (f"-K{space.curvature_scale:g}" if space.curvature_scale != 1.0 else "")
    if space.kind == CIRCLE:
        return f"circle-L{space.lengths[0]:g}"
    return "torus-" + "x".join(f"{L:g}" for L in space.lengths)


def _finish(spec: SweepSpec, rows, columns, tol, params) -> VerificationReport:
    slacks = np.array([row[-1] for row in rows])
    violations = int(np.sum(slacks > tol))
    worst = int(np.argmax(slacks)) if rows else 0
    worst_slack = float(slacks[worst]) if rows else math.nan
    worst_location = tuple(rows[worst][:-1]) if rows else ()
    return VerificationReport(
        check=spec.check,
        params=params,
        tolerance=tol,
        n_samples=len(rows),
        violations=violations,
        worst_slack=worst_slack,
        worst_location=worst_location,
        columns=tuple(columns),
        rows=rows,
    )


def reevaluate_worst(spec: SweepSpec, report: VerificationReport) -> float:
    """Recompute the report's worst slack from its recorded location alone."""
    loc = report.worst_location
    space = spec.space
    n, k = space.dim, spec.resolved_k()
    if spec.check == "gradient":
        r, t = loc[0], loc[1]
        source = JetSource(space, np.asarray([r]), t_values=[t], fd_dt=spec.fd_dt)
        jet = source.jets(t)
        sup_bound = None
        if spec.estimate is Estimate.HAMILTON_LOG:
            t0 = float((geometric_grid(0.05, 8.0) if spec.t_grid is None
                        else np.asarray(spec.t_grid, float))[0])
            full = JetSource(space, default_space_grid(space) if spec.r_grid is None
                             else np.asarray(spec.r_grid, float), t_values=[t0])
            sup_bound = float(np.max(full.jets(t0).u)) * spec.sup_bound_factor
        lhs, rhs = estimate_sides(spec.estimate, jet, n, k, t,
                                  alpha=spec.alpha, sup_bound=sup_bound)
        return float(np.asarray(lhs - rhs).ravel()[0])
    if spec.check == "perelman":
        r, t = loc[0], loc[1]
        source = JetSource(space, np.asarray([r]), t_values=[t])
        jet = source.jets(t, Convention.MINUS_LN)
        est = Estimate.NI if k == 0.0 else Estimate.PERELMAN
        lhs, rhs = estimate_sides(est, jet, n, k, t)
        return float(np.asarray(lhs - rhs).ravel()[0])
    if spec.check == "harnack":
        variant, r1, t1, r2, t2 = loc[0], loc[1], loc[2], loc[3], loc[4]
        d = _pair_distance(space, r1, r2)
        log_u1 = float(np.log(_kernel_values(space, np.asarray([r1]), np.asarray([t1]))[0]))
        log_u2 = float(np.log(_kernel_values(space, np.asarray([r2]), np.asarray([t2]))[0]))
        return float(np.expm1(log_u1 - log_harnack_factor(variant, n, k, t1, t2, d) - log_u2))
    raise ContractError(f"reevaluation not implemented for check {spec.check!r}")


def _pair_distance(space, a, b):
    if space.is_radial:
        return abs(a - b)
    L = space.lengths[0]
    d = abs(a - b)
    return min(d, L - d)
