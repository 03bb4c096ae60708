"""Closed-form heat kernels on the model spaces, exposed as log-derivative jets.

A jet bundles the kernel value u together with f = log u (or the normalized
variant), its radial derivatives, time derivative, Laplacian and squared
gradient at one space-time point, all from analytic formulas.  Inequality
evaluation then never touches finite differences, which matters because
several estimates have exact equality cases.

Two log conventions coexist:

* ``LN_U``: f = ln u.  The heat equation reads f_t = Delta f + |grad f|^2.
* ``MINUS_LN``: u = e^{-f} / (4 pi t)^{n/2}.  The heat equation reads
  f_t = Delta f - |grad f|^2 - n/(2t).

Conversion negates the spatial quantities, shifts f by (n/2) ln(4 pi t) and
shifts f_t by n/(2t).  Functions that need one convention reject the other.

All constructors accept numpy arrays for the spatial coordinate and
broadcast; fields of the returned jet are then arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import ContractError, NumericalFailure
from . import special as sp


class Convention(Enum):
    LN_U = "ln-u"
    MINUS_LN = "minus-ln-normalized"


@dataclass
class KernelJet:
    u: object          # kernel value (float or ndarray)
    f: object          # log quantity in the stated convention
    f_r: object        # radial/spatial first derivative of f
    f_rr: object       # radial/spatial second derivative of f
    f_t: object        # time derivative of f
    lap_f: object      # Laplacian of f
    gradsq: object     # |grad f|^2
    convention: Convention
    n: int             # dimension
    t: object          # evaluation time

    def require(self, convention: Convention, who: str = "operation"):
        if self.convention is not convention:
            raise ContractError(
                f"{who} needs a {convention.value} jet, got {self.convention.value}"
            )

    def to(self, convention: Convention) -> "KernelJet":
        """Return this jet converted to the requested log convention."""
        if convention is self.convention:
            return self
        t = float(self.t)
        return replace(
            self,
            f=-self.f - 0.5 * self.n * math.log(4.0 * math.pi * t),
            f_r=-self.f_r,
            f_rr=-self.f_rr,
            f_t=-self.f_t - self.n / (2.0 * t),
            lap_f=-self.lap_f,
            convention=convention,
        )

    def heat_residual(self):
        """Residual of the heat equation in this jet's convention; 0 for exact jets."""
        if self.convention is Convention.LN_U:
            return self.f_t - self.lap_f - self.gradsq
        t = np.asarray(self.t, dtype=float)
        return self.f_t - self.lap_f + self.gradsq + self.n / (2.0 * t)


def euclid_jet(n: int, d, t) -> KernelJet:
    """Gaussian heat kernel jet on R^n: u = (4 pi t)^{-n/2} exp(-d^2 / 4t)."""
    if not 1 <= n <= 8:
        raise ContractError("euclid_jet supports n in 1..8")
    t = float(t)
    if t <= 0:
        raise ContractError("t must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ContractError("d must be nonnegative")
    gradsq = d ** 2 / (4.0 * t ** 2)
    f = -0.5 * n * math.log(4.0 * math.pi * t) - d ** 2 / (4.0 * t)
    jet = KernelJet(
        u=np.exp(f),
        f=f,
        f_r=-d / (2.0 * t),
        f_rr=np.full_like(d, -1.0 / (2.0 * t)),
        f_t=gradsq - n / (2.0 * t),
        lap_f=np.full_like(d, -n / (2.0 * t)),
        gradsq=gradsq,
        convention=Convention.LN_U,
        n=n,
        t=t,
    )
    return _collapse_scalar(jet, d)


def h3_jet(d, t, curvature_scale: float = 1.0) -> KernelJet:
    """Heat kernel jet on H^3 of curvature -K.

    For K = 1 the kernel is u = (4 pi t)^{-3/2} (r / sinh r) exp(-t - r^2/4t);
    general K follows by the scaling u_K(r, t) = K^{3/2} u_1(sqrt(K) r, K t).
    The removable singularity at r = 0 is filled by series.
    """
    K = float(curvature_scale)
    if K <= 0:
        raise ContractError("curvature_scale K must be positive")
    t = float(t)
    if t <= 0:
        raise ContractError("t must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ContractError("d must be nonnegative")

    rk = math.sqrt(K)
    r, tau = rk * d, K * t  # K = 1 coordinates

    g = sp.coth_minus_inv(r)          # coth r - 1/r
    g_over_r = sp.coth_minus_inv_over_x(r)
    f1 = -1.5 * np.log(4.0 * math.pi * tau) - sp.log_sinh_ratio(r) - tau - r ** 2 / (4.0 * tau)
    f1_r = -g - r / (2.0 * tau)
    f1_rr = -sp.d_coth_minus_inv(r) - 1.0 / (2.0 * tau)
    f1_t = -1.5 / tau + r ** 2 / (4.0 * tau ** 2) - 1.0
    # lap f = f_rr + 2 coth(r) f_r, composed from singularity-free pieces
    lap1 = f1_rr - 2.0 * (g ** 2 + g * r / (2.0 * tau) + g_over_r + 1.0 / (2.0 * tau))
    u1 = (4.0 * math.pi * tau) ** -1.5 * sp.sinh_ratio(r) * np.exp(-tau - r ** 2 / (4.0 * tau))

    jet = KernelJet(
        u=K ** 1.5 * u1,
        f=f1 + 1.5 * math.log(K),
        f_r=rk * f1_r,
        f_rr=K * f1_rr,
        f_t=K * f1_t,
        lap_f=K * lap1,
        gradsq=K * f1_r ** 2,
        convention=Convention.LN_U,
        n=3,
        t=t,
    )
    return _collapse_scalar(jet, d)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (0 < self.rel_tol < 1 and 0 < self.abs_tol < 1):
            raise ContractError("tolerances must lie in (0, 1)")
        if not 0 < self.max_subdivisions <= 10 ** 6:
            raise ContractError("max_subdivisions out of range")


def h2_kernel(d, t, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Heat kernel value on H^2 (curvature -1) via the integral representation

        u = sqrt(2) e^{-t/4} (4 pi t)^{-3/2} \\int_d^inf s e^{-s^2/4t}
            / sqrt(cosh s - cosh d) ds.

    The substitution s = d + v^2 removes the inverse-square-root endpoint
    singularity; adaptive quadrature then converges fast.
    """
    d = float(d)
    t = float(t)
    if d < 0:
        raise ContractError("d must be nonnegative")
    if t <= 0:
        raise ContractError("t must be positive")

    def integrand(v):
        s = d + v * v
        den = math.cosh(s) - math.cosh(d)
        if den <= 0.0:  # only possible from rounding at v ~ 0
            if d == 0.0:
                return 0.0
            return 2.0 * d * math.exp(-d * d / (4.0 * t)) / math.sqrt(math.sinh(d))
        return 2.0 * s * v * math.exp(-s * s / (4.0 * t)) / math.sqrt(den)

    # e^{-s^2/4t} is negligible past s_max; integrate v in [0, sqrt(s_max - d)]
    s_max = d + math.sqrt(4.0 * t * 60.0) + 5.0
    v_max = math.sqrt(s_max - d)
    val, err = integrate.quad(
        integrand, 0.0, v_max,
        epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions,
    )
    if not math.isfinite(val) or (err > max(quad.abs_tol, 10 * quad.rel_tol * abs(val)) and err > 1e-8 * abs(val)):
        raise NumericalFailure(
            f"H^2 kernel quadrature did not converge at d={d}, t={t}: value={val}, err={err}"
        )
    pref = math.sqrt(2.0) * math.exp(-t / 4.0) * (4.0 * math.pi * t) ** -1.5
    return pref * val


def periodic_jet(lengths, d, t, truncation_tol: float = 1e-14) -> KernelJet:
    """Image-sum heat kernel jet on a circle or flat torus.

    ``d`` holds one coordinate per axis (scalar allowed for the circle), each
    in [-L_i/2, L_i/2].  Along each axis the Gaussian image sum is truncated
    once an image pair's relative contribution to the value and to each
    derivative drops below ``truncation_tol``.  The product structure makes
    the log-kernel additive across axes, so the jet combines per-axis pieces.

    For a single axis f_r / f_rr are that axis' derivatives; for several axes
    they hold one row per axis.
    """
    lengths = tuple(float(L) for L in lengths)
    if not lengths or any(L <= 0 for L in lengths):
        raise ContractError("lengths must be a nonempty tuple of positive reals")
    t = float(t)
    if t <= 0:
        raise ContractError("t must be positive")
    if not 0 < truncation_tol < 1:
        raise ContractError("truncation_tol must lie in (0, 1)")

    if len(lengths) == 1:
        coords = [np.asarray(d, dtype=float)]
    else:
        if len(d) != len(lengths):
            raise ContractError("need one coordinate (or array) per axis")
        coords = [np.asarray(di, dtype=float) for di in d]
    for L, x in zip(lengths, coords):
        if np.any(np.abs(x) > L / 2 + 1e-12):
            raise ContractError("coordinates must lie in [-L/2, L/2]")

    f = 0.0
    f_t = 0.0
    lap = 0.0
    gradsq = 0.0
    fx_list, fxx_list = [], []
    for L, x in zip(lengths, coords):
        u, ux, uxx, ut = _image_sum_1d(L, x, t, truncation_tol)
        fx = ux / u
        fxx = uxx / u - fx ** 2
        f = f + np.log(u)
        f_t = f_t + ut / u
        lap = lap + fxx
        gradsq = gradsq + fx ** 2
        fx_list.append(fx)
        fxx_list.append(fxx)

    if len(lengths) == 1:
        f_r, f_rr = fx_list[0], fxx_list[0]
    else:
        f_r, f_rr = np.stack(fx_list), np.stack(fxx_list)

    jet = KernelJet(
        u=np.exp(f),
        f=f,
        f_r=f_r,
        f_rr=f_rr,
        f_t=f_t,
        lap_f=lap,
        gradsq=gradsq,
        convention=Convention.LN_U,
        n=len(lengths),
        t=t,
    )
    return _collapse_scalar(jet, coords[0])


def periodic_kernel_value(lengths, d, t, truncation_tol: float = 1e-14):
    """Kernel value alone on a circle/flat torus (no log-derivative fields,
    so it stays finite even where the value underflows to zero)."""
    lengths = tuple(float(L) for L in lengths)
    t = float(t)
    if t <= 0:
        raise ContractError("t must be positive")
    coords = [np.asarray(d, dtype=float)] if len(lengths) == 1 else [
        np.asarray(di, dtype=float) for di in d]
    out = 1.0
    for L, x in zip(lengths, coords):
        out = out * _image_sum_1d(L, x, t, truncation_tol)[0]
    return out if np.ndim(out) else float(out)


def _image_sum_1d(L, x, t, tol):
    """One-axis image sum and its x/t derivatives, truncated pairwise."""

    def term(z):
        w = np.exp(-z ** 2 / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        wx = -z / (2.0 * t) * w
        wt = (z ** 2 / (4.0 * t ** 2) - 1.0 / (2.0 * t)) * w
        return w, wx, wt  # u_xx == u_t for Gaussian images

    u, ux, ut = term(x)
    for m in range(1, 10000):
        du = dux = dut = 0.0
        for sgn in (1.0, -1.0):
            w, wx, wt = term(x + sgn * m * L)
            du, dux, dut = du + w, dux + wx, dut + wt
        u = u + du
        ux = ux + dux
        ut = ut + dut
        scale_u = np.max(u)
        rel = max(
            np.max(np.abs(du)) / scale_u,
            np.max(np.abs(dux)) / (np.max(np.abs(ux)) + scale_u / math.sqrt(4.0 * t)),
            np.max(np.abs(dut)) / (np.max(np.abs(ut)) + scale_u / (4.0 * t)),
        )
        if rel < tol:
            break
    else:
        raise NumericalFailure("image sum did not truncate; t or L out of sensible range")
    return u, ux, ut, ut


def _collapse_scalar(jet: KernelJet, ref) -> KernelJet:
    """Collapse 0-d array fields to floats when the input coordinate was scalar."""
    if np.ndim(ref) != 0:
        return jet
    for name in ("u", "f", "f_r", "f_rr", "f_t", "lap_f", "gradsq"):
        val = getattr(jet, name)
        if np.ndim(val) == 0:
            setattr(jet, name, float(val))
    return jet
