"""Independent heat-flow oracles.

Two solvers that never look at the closed-form kernels:

* a Crank-Nicolson scheme for radial flow u_t = u_rr + a(r) u_r on Euclidean
  or hyperbolic space, discretized in flux form so that the weighted mass
  sum_i w_i u_i dr is conserved to solver precision, and
* an exact spectral evolver for circles and flat tori, where every Fourier
  mode just decays by e^{-|xi|^2 dt}.

They validate the analytic kernels and supply non-kernel positive solutions
for the compact-space checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ContractError, NumericalFailure
from .kernels import Convention, KernelJet
from .spaces import ModelSpace, volume_weight

# ---------------------------------------------------------------------------
# radial Crank-Nicolson solver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    r_min: float = 1e-3
    r_max: float = 15.0
    dr: float = 5e-3
    dt: float = 5e-3

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ContractError("need 0 < r_min < r_max")
        if self.dr <= 0 or self.dt <= 0:
            raise ContractError("dr and dt must be positive")
        if self.dt > self.dr:
            # accuracy headroom for the implicit scheme, not a stability limit
            raise ContractError("need dt <= dr")

    def nodes(self) -> np.ndarray:
        n = int(round((self.r_max - self.r_min) / self.dr)) + 1
        return self.r_min + self.dr * np.arange(n)

    def halved(self) -> "RadialGrid":
        return RadialGrid(self.r_min, self.r_max, self.dr / 2.0, self.dt / 2.0)


@dataclass
class RadialSolution:
    space: ModelSpace
    r: np.ndarray
    t: float
    u: np.ndarray
    mass_history: np.ndarray
    min_u: float
    snapshots: dict = field(default_factory=dict)

    def interp(self, r):
        return np.interp(r, self.r, self.u)


def solve_radial(space: ModelSpace, init, grid: RadialGrid, t_from: float,
                 t_to: float, snapshot_times=()) -> RadialSolution:
    """Evolve radial data under the heat flow from t_from to t_to.

    ``init`` maps the node array to positive initial values at t_from.  Both
    ends carry the zero-flux (Neumann) closure: r_min stands in for the pole,
    r_max truncates the domain and must stay essentially massless, which is
    checked (boundary mass fraction above 1e-10 raises NumericalFailure).
    """
    if not space.is_radial:
        raise ContractError("solve_radial needs a Euclidean or hyperbolic space")
    if t_to < t_from:
        raise ContractError("t_to must be >= t_from")

    r = grid.nodes()
    u = np.asarray(init(r), dtype=float).copy()
    if u.shape != r.shape or np.any(u < 0) or not np.all(np.isfinite(u)) or u.max() <= 0:
        raise ContractError("init must return positive finite values on the node array")
    # far-field kernel tails underflow to exact zero in double precision;
    # floor them so the log-field diagnostics stay defined
    u = np.maximum(u, 1e-300)

    w = volume_weight(space, r)
    w_mid = volume_weight(space, 0.5 * (r[:-1] + r[1:]))
    lower, diag, upper = _flux_operator(w, w_mid, grid.dr)

    steps = max(1, int(math.ceil((t_to - t_from) / grid.dt - 1e-12)))
    dt = (t_to - t_from) / steps if t_to > t_from else 0.0

    # Crank-Nicolson: (I - dt/2 L) u_new = (I + dt/2 L) u_old
    ab = np.zeros((3, r.size))
    ab[0, 1:] = -0.5 * dt * upper
    ab[1, :] = 1.0 - 0.5 * dt * diag
    ab[2, :-1] = -0.5 * dt * lower

    snapshot_times = sorted(float(s) for s in snapshot_times)
    for s in snapshot_times:
        if not (t_from <= s <= t_to + 1e-12):
            raise ContractError("snapshot times must lie in [t_from, t_to]")

    mass = [float(np.sum(w * u) * grid.dr)]
    # the escape check below only makes sense for data that starts localized
    initially_localized = float(u[-1] * w[-1] * grid.dr / mass[0]) <= 1e-10
    min_u = float(u.min())
    snaps = {}
    t = t_from
    snap_iter = iter(snapshot_times)
    next_snap = next(snap_iter, None)
    while next_snap is not None and next_snap <= t + 1e-12:
        snaps[next_snap] = u.copy()
        next_snap = next(snap_iter, None)

    for _ in range(steps if dt > 0 else 0):
        rhs = u + 0.5 * dt * _apply_tridiag(lower, diag, upper, u)
        u = solve_banded((1, 1), ab, rhs)
        t += dt
        mass.append(float(np.sum(w * u) * grid.dr))
        min_u = min(min_u, float(u.min()))
        while next_snap is not None and next_snap <= t + 0.5 * dt:
            snaps[next_snap] = u.copy()
            next_snap = next(snap_iter, None)

    tail_fraction = float(u[-1] * w[-1] * grid.dr / mass[-1])
    if initially_localized and tail_fraction > 1e-10:
        raise NumericalFailure(
            f"mass reached the truncation boundary: boundary fraction {tail_fraction:.3e} "
            f"(r_max={grid.r_max} too small for t={t_to})"
        )
    return RadialSolution(space=space, r=r, t=t_to, u=u,
                          mass_history=np.asarray(mass), min_u=min_u, snapshots=snaps)


def _flux_operator(w, w_mid, dr):
    """Tridiagonal L with (L u)_i = [flux_out - flux_in]/(w_i dr^2), zero-flux ends.

    This is the divergence form (1/w)(w u')' of u_rr + (w'/w) u_r, and w'/w is
    exactly the radial Laplacian coefficient of the space.
    """
    n = w.size
    lower = np.zeros(n - 1)
    diag = np.zeros(n)
    upper = np.zeros(n - 1)
    inv = 1.0 / (w * dr * dr)
    # interior
    diag[1:-1] = -(w_mid[1:] + w_mid[:-1]) * inv[1:-1]
    upper[1:] = w_mid[1:] * inv[1:-1]
    lower[:-1] = w_mid[:-1] * inv[1:-1]
    # zero-flux closures
    diag[0] = -w_mid[0] * inv[0]
    upper[0] = w_mid[0] * inv[0]
    diag[-1] = -w_mid[-1] * inv[-1]
    lower[-1] = w_mid[-1] * inv[-1]
    return lower, diag, upper


def _apply_tridiag(lower, diag, upper, u):
    out = diag * u
    out[:-1] += upper * u[1:]
    out[1:] += lower * u[:-1]
    return out


# ---------------------------------------------------------------------------
# spectral evolution on circles and tori
# ---------------------------------------------------------------------------


@dataclass
class PeriodicSolution:
    """Heat solution on a circle/torus held as its Fourier coefficients.

    Coefficients follow numpy fft layout, one axis per circle factor, sampled
    on the uniform grid x_j = -L/2 + L j / m.  The zero mode is the spatial
    mean and is invariant under evolution.
    """

    lengths: tuple
    coefficients: np.ndarray
    t0: float

    def __post_init__(self):
        self.lengths = tuple(float(L) for L in self.lengths)
        if self.coefficients.ndim != len(self.lengths):
            raise ContractError("need one coefficient axis per length")
        if self.t0 < 0:
            raise ContractError("t0 must be nonnegative")

    # -- construction -----------------------------------------------------
    @classmethod
    def from_samples(cls, values, lengths, t0) -> "PeriodicSolution":
        values = np.asarray(values, dtype=float)
        return cls(tuple(lengths), np.fft.fftn(values) / values.size, float(t0))

    @classmethod
    def from_function(cls, fn, lengths, num_points, t0) -> "PeriodicSolution":
        grids = cls._grids_static(lengths, num_points)
        mesh = np.meshgrid(*grids, indexing="ij") if len(grids) > 1 else [grids[0]]
        return cls.from_samples(fn(*mesh), lengths, t0)

    # -- geometry ----------------------------------------------------------
    @staticmethod
    def _grids_static(lengths, num_points):
        if np.ndim(num_points) == 0:
            num_points = [int(num_points)] * len(lengths)
        return [(-L / 2.0 + L * np.arange(m) / m) for L, m in zip(lengths, num_points)]

    def grids(self):
        return self._grids_static(self.lengths, self.coefficients.shape)

    def frequencies(self):
        return [2.0 * math.pi * np.fft.fftfreq(m, d=L / m)
                for m, L in zip(self.coefficients.shape, self.lengths)]

    # -- evolution and evaluation -------------------------------------------
    def evolve(self, t: float) -> "PeriodicSolution":
        """Exact evolution to time t >= t0: each mode decays by e^{-|xi|^2 dt}."""
        if t < self.t0 - 1e-15:
            raise ContractError("backward evolution is not defined")
        xi2 = _freq_norm2(self.frequencies())
        c = self.coefficients * np.exp(-xi2 * (t - self.t0))
        return PeriodicSolution(self.lengths, c, float(t))

    def mean(self) -> float:
        return float(self.coefficients[(0,) * self.coefficients.ndim].real)

    def values_on_grid(self) -> np.ndarray:
        return np.real(np.fft.ifftn(self.coefficients)) * self.coefficients.size

    def derivative_on_grid(self, axis: int, order: int = 1) -> np.ndarray:
        xi = self.frequencies()[axis]
        shape = [1] * self.coefficients.ndim
        shape[axis] = xi.size
        mult = (1j * xi.reshape(shape)) ** order
        return np.real(np.fft.ifftn(self.coefficients * mult)) * self.coefficients.size

    def time_derivative_on_grid(self) -> np.ndarray:
        xi2 = _freq_norm2(self.frequencies())
        return -np.real(np.fft.ifftn(self.coefficients * xi2)) * self.coefficients.size

    def evaluate(self, *points):
        """Fourier synthesis at arbitrary points (one coordinate array per axis)."""
        if len(points) != len(self.lengths):
            raise ContractError("need one coordinate per axis")
        # the sample grid starts at -L/2, so synthesis carries that offset
        pts = [np.asarray(p, dtype=float) + L / 2.0 for p, L in zip(points, self.lengths)]
        freqs = self.frequencies()
        if len(self.lengths) == 1:
            out = np.exp(1j * np.multiply.outer(pts[0], freqs[0])) @ self.coefficients
        else:
            mesh = np.meshgrid(*freqs, indexing="ij")
            acc = sum(np.multiply.outer(p, f) for p, f in zip(pts, mesh))
            out = np.sum(np.exp(1j * acc) * self.coefficients,
                         axis=tuple(range(-self.coefficients.ndim, 0)))
        out = np.real(out)
        return out if np.ndim(out) else float(out)

    def jet(self, convention: Convention = Convention.LN_U) -> KernelJet:
        """Log-derivative jet of the solution on its own grid (spectral, exact
        for the trigonometric interpolant)."""
        u = self.values_on_grid()
        if np.any(u <= 0):
            raise NumericalFailure("solution is not positive on the grid")
        naxes = len(self.lengths)
        fx, fxx = [], []
        ut = self.time_derivative_on_grid()
        for ax in range(naxes):
            ux = self.derivative_on_grid(ax, 1)
            uxx = self.derivative_on_grid(ax, 2)
            gx = ux / u
            fx.append(gx)
            fxx.append(uxx / u - gx ** 2)
        gradsq = sum(g ** 2 for g in fx)
        lap = sum(fxx)
        jet = KernelJet(
            u=u, f=np.log(u),
            f_r=fx[0] if naxes == 1 else np.stack(fx),
            f_rr=fxx[0] if naxes == 1 else np.stack(fxx),
            f_t=ut / u, lap_f=lap, gradsq=gradsq,
            convention=Convention.LN_U, n=naxes, t=self.t0,
        )
        return jet.to(convention)


def _freq_norm2(freqs):
    if len(freqs) == 1:
        return freqs[0] ** 2
    mesh = np.meshgrid(*freqs, indexing="ij")
    return sum(m ** 2 for m in mesh)


def evolve_periodic(solution: PeriodicSolution, t: float) -> PeriodicSolution:
    """Functional wrapper around PeriodicSolution.evolve."""
    return solution.evolve(t)
