"""Entropy functionals along the heat flow and their monotonicity data.

Four functionals of a positive unit-mass solution u on a space with
Ricci >= -k:

* ``wp``          integral of (t |grad f|^2 + f - n(1 + kt/2)^2) u with the
                  normalized log-kernel f (u = e^{-f}/(4 pi t)^{n/2})
* ``wly-linear``  - integral of t^2 [lap ln u + n/(2t) + (nk/2)(1 + kt/3)] u
* ``wly-sinh``    - integral of sinh^2(kt) [lap ln u + (nk/2)(coth kt + 1)] u;
                  its k -> 0 normalized limit coincides with the k = 0 form
                  of ``wly-linear`` and is used at k = 0
* ``nash``        - integral of u ln u, recentered by (n/2) ln(4 pi t)
                  + (n/2) kt (1 + kt/6) + n/2 so the kernel value tends to 0
                  as t -> 0

All four are nonpositive (``nash``: decreasing) on the compact model spaces
with the sharp k, and nonincreasing in t.  Where a closed-form time
derivative exists it is evaluated alongside finite differences and the
residual is reported.

Convention guard: the pointwise integrand helpers reject jets in the wrong
log convention instead of converting silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import xlogy

from .errors import ContractError, NumericalFailure
from .kernels import (Convention, KernelJet, euclid_jet, h3_jet, periodic_jet,
                      periodic_kernel_value)
from .solvers import PeriodicSolution
from .spaces import CIRCLE, EUCLIDEAN, HYPERBOLIC, ModelSpace, ricci_lower_bound, volume_weight
from . import special as sp

FUNCTIONALS = ("wp", "wly-linear", "wly-sinh", "nash")

MASS_TOL = 1e-6


@dataclass
class EntropyTrace:
    functional: str
    t_values: np.ndarray
    values: np.ndarray
    discrete_derivatives: np.ndarray  # interval differences, one shorter
    identity_residuals: np.ndarray    # |difference - formula| at interval midpoints (nan: no formula)
    normalization_checks: np.ndarray  # measured mass at each sample


def wp_integrand(jet: KernelJet, k: float):
    """Pointwise integrand of ``wp``: t |grad f|^2 + f - n (1 + kt/2)^2."""
    jet.require(Convention.MINUS_LN, "wp integrand")
    t = float(jet.t)
    return t * jet.gradsq + jet.f - jet.n * (1.0 + 0.5 * k * t) ** 2


def wly_bracket(variant: str, jet: KernelJet, k: float):
    """Pointwise bracket of ``wly``: the negated integrand is bracket * weight.

    linear: [lap ln u + n/(2t) + (nk/2)(1 + kt/3)] with weight t^2;
    sinh:   [lap ln u + (nk/2)(coth kt + 1)] with weight sinh^2(kt)
            (k = 0: the linear k = 0 form, weight t^2).
    Returns (bracket, weight).
    """
    jet.require(Convention.LN_U, "wly bracket")
    t, n = float(jet.t), jet.n
    if variant == "wly-linear":
        return jet.lap_f + n / (2.0 * t) + 0.5 * n * k * (1.0 + k * t / 3.0), t * t
    if variant != "wly-sinh":
        raise ContractError(f"unknown wly variant {variant!r}")
    if k == 0.0:
        return jet.lap_f + n / (2.0 * t), t * t
    return (jet.lap_f + n / (2.0 * t) * (1.0 + sp.xcothx_minus_1(k * t)) + 0.5 * n * k,
            math.sinh(k * t) ** 2)


def entropy_value(functional: str, space: ModelSpace, solution, t: float,
                  k: float | None = None) -> float:
    """Value of one entropy functional at time t.

    ``solution`` is a PeriodicSolution, or None for the space's heat kernel.
    Compact spaces evaluate all four functionals; Euclidean/hyperbolic space
    admits the kernel-based ``wp`` through weighted radial quadrature.
    """
    if functional not in FUNCTIONALS:
        raise ContractError(f"unknown functional {functional!r}")
    k = ricci_lower_bound(space).k if k is None else float(k)
    if space.is_periodic:
        return _periodic_value(functional, space, solution, t, k)
    if functional != "wp" or solution is not None:
        raise ContractError(
            "noncompact spaces evaluate only the kernel-based 'wp' functional")
    return _radial_wp_value(space, t, k)


def entropy_trace(functional: str, space: ModelSpace, solution, t_grid,
                  k: float | None = None) -> EntropyTrace:
    """Trace of one functional over an increasing time grid.

    Discrete derivatives are interval differences, which are second-order
    accurate at interval midpoints; where the functional has a closed-form
    derivative (``wp`` and both ``wly`` variants on the circle), the
    difference between the two is stored at those midpoints.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 3 or np.any(np.diff(t_grid) <= 0):
        raise ContractError("t_grid must be increasing with at least 3 points")
    k = ricci_lower_bound(space).k if k is None else float(k)

    values = np.empty(t_grid.size)
    masses = np.empty(t_grid.size)
    for i, t in enumerate(t_grid):
        values[i] = entropy_value(functional, space, solution, float(t), k)
        masses[i] = _measured_mass(space, solution, float(t))

    diffs = np.diff(values) / np.diff(t_grid)
    residuals = np.full(t_grid.size - 1, math.nan)
    if space.kind == CIRCLE and functional in ("wp", "wly-linear", "wly-sinh"):
        # compare the closed-form derivative against a tight central
        # difference at the interval midpoints (step h independent of the
        # trace grid, so coarse grids do not pollute the identity check)
        h = 1e-3
        mids = 0.5 * (t_grid[:-1] + t_grid[1:])
        for i, tm in enumerate(mids):
            tm = float(tm)
            fd = (entropy_value(functional, space, solution, tm + h, k)
                  - entropy_value(functional, space, solution, tm - h, k)) / (2.0 * h)
            formula = _derivative_formula(functional, space, solution, tm, k)
            residuals[i] = abs(fd - formula)
    return EntropyTrace(functional=functional, t_values=t_grid, values=values,
                        discrete_derivatives=diffs, identity_residuals=residuals,
                        normalization_checks=masses)


# ---------------------------------------------------------------------------
# periodic evaluation
# ---------------------------------------------------------------------------


def _grid_coords(space: ModelSpace, num_points: int = 2048):
    if space.kind == CIRCLE:
        L = space.lengths[0]
        return (-L / 2.0 + L * np.arange(num_points) / num_points), L / num_points
    m = 64
    grids = [(-L / 2.0 + L * np.arange(m) / m) for L in space.lengths]
    mesh = np.meshgrid(*grids, indexing="ij")
    coords = [g.ravel() for g in mesh]
    return coords, float(np.prod(space.lengths)) / mesh[0].size


def _periodic_u_for(space: ModelSpace, solution, t: float):
    """Solution values and the grid volume element, mass-checked."""
    if solution is None:
        coords, volume_element = _grid_coords(space)
        u = np.asarray(periodic_kernel_value(space.lengths, coords, t))
    else:
        if not isinstance(solution, PeriodicSolution):
            raise ContractError("periodic spaces take a PeriodicSolution (or None for the kernel)")
        evolved = solution.evolve(t)
        u = evolved.values_on_grid().ravel()
        volume_element = float(np.prod(space.lengths)) / u.size
    mass = float(u.sum() * volume_element)
    if abs(mass - 1.0) > MASS_TOL:
        raise ContractError(f"solution mass {mass} is not 1 within {MASS_TOL}")
    return u, volume_element


def _periodic_jet_for(space: ModelSpace, solution, t: float):
    if solution is None:
        coords, volume_element = _grid_coords(space)
        jet = periodic_jet(space.lengths, coords, t)
    else:
        if not isinstance(solution, PeriodicSolution):
            raise ContractError("periodic spaces take a PeriodicSolution (or None for the kernel)")
        evolved = solution.evolve(t)
        jet = evolved.jet()
        volume_element = float(np.prod(space.lengths)) / evolved.coefficients.size
    return jet, volume_element


def _periodic_value(functional: str, space: ModelSpace, solution, t: float, k: float) -> float:
    if functional == "nash":
        u, volume_element = _periodic_u_for(space, solution, t)
        n = space.dim
        value = -float(np.sum(xlogy(u, u)) * volume_element)
        return (value - 0.5 * n * math.log(4.0 * math.pi * t)
                - 0.5 * n * k * t * (1.0 + k * t / 6.0) - 0.5 * n)
    _periodic_u_for(space, solution, t)  # mass guard
    jet, volume_element = _periodic_jet_for(space, solution, t)
    u = np.asarray(jet.u)
    if functional == "wp":
        integrand = wp_integrand(jet.to(Convention.MINUS_LN), k) * u
    else:
        bracket, weight = wly_bracket(functional, jet, k)
        integrand = -weight * bracket * u
    return float(np.sum(integrand) * volume_element)


def _measured_mass(space: ModelSpace, solution, t: float) -> float:
    if space.is_periodic:
        u, volume_element = _periodic_u_for(space, solution, t)
        return float(u.sum() * volume_element)
    val, _ = _radial_quad(space, t, lambda jet: np.ones_like(np.asarray(jet.u)))
    return val


def _derivative_formula(functional: str, space: ModelSpace, solution, t: float,
                        k: float) -> float:
    """Closed-form d/dt of the functional on the circle (Ric = 0):

        -2 w(t) * integral of [ (fbar_xx - b)^2 + k fbar_x^2 ] u
        with fbar = -ln u, w and b per functional.
    """
    jet, volume_element = _periodic_jet_for(space, solution, t)
    u = np.asarray(jet.u)
    fbar_xx = -np.asarray(jet.f_rr)
    gradsq = np.asarray(jet.gradsq)
    if functional == "wp":
        weight, b = t, 1.0 / (2.0 * t) + 0.5 * k
    elif functional == "wly-linear":
        weight, b = t * t, 1.0 / (2.0 * t) + 0.5 * k
    else:  # wly-sinh
        if k == 0.0:
            weight, b = t * t, 1.0 / (2.0 * t)
        else:
            weight = math.sinh(k * t) ** 2
            b = 0.5 * k * (1.0 / math.tanh(k * t) + 1.0)  # phi/n with n = 1
    integrand = ((fbar_xx - b) ** 2 + k * gradsq) * u
    return -2.0 * weight * float(np.sum(integrand) * volume_element)


# ---------------------------------------------------------------------------
# radial (noncompact) evaluation of wp for the kernel
# ---------------------------------------------------------------------------


def _radial_jet(space: ModelSpace, r, t: float) -> KernelJet:
    if space.kind == EUCLIDEAN:
        return euclid_jet(space.dim, r, t)
    if space.kind == HYPERBOLIC and space.dim == 3:
        return h3_jet(r, t, space.curvature_scale)
    raise ContractError("radial entropy evaluation needs Euclidean space or H^3")


def _radial_quad(space: ModelSpace, t: float, weight_fn):
    """Integrate weight_fn(jet) * u over the space by radial quadrature."""
    if space.kind == EUCLIDEAN:
        r_cut = math.sqrt(4.0 * t * 45.0) + 1.0
    else:
        # hyperbolic volume growth adds 2r to the decay budget
        r_cut = 4.0 * t + math.sqrt(4.0 * t * 45.0) + 5.0

    def integrand(r):
        jet = _radial_jet(space, r, t)
        return float(weight_fn(jet) * jet.u * volume_weight(space, r))

    val, err = integrate.quad(integrand, 1e-12, r_cut, limit=200,
                              epsabs=1e-12, epsrel=1e-10)
    return val, err


def _radial_wp_value(space: ModelSpace, t: float, k: float) -> float:
    mass, _ = _radial_quad(space, t, lambda jet: np.ones_like(np.asarray(jet.u)))
    if abs(mass - 1.0) > 1e-10:
        raise NumericalFailure(
            f"radial quadrature lost mass: got {mass}, truncation beyond 1e-10")

    def weight(jet):
        return wp_integrand(jet.to(Convention.MINUS_LN), k)

    val, _ = _radial_quad(space, t, weight)
    return val
