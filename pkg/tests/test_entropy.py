import math

import numpy as np
import pytest

from heatbounds import (ContractError, Convention, PeriodicSolution, circle,
                        entropy_trace, entropy_value, euclidean, hyperbolic,
                        periodic_jet)
from heatbounds.entropy import wly_bracket, wp_integrand

CIRC = circle()
T_GRID = np.geomspace(0.2, 3.0, 30)

# frozen from a 40-digit image-sum + quadrature evaluation
WP_CIRCLE_KERNEL_T1 = -0.26840845958375965


def nonkernel_solution():
    return PeriodicSolution.from_function(
        lambda x: (1 + 0.5 * np.cos(x)) / (2 * math.pi), (2 * math.pi,), 512, 0.05)


def test_wp_circle_kernel_golden():
    assert entropy_value("wp", CIRC, None, 1.0) == pytest.approx(WP_CIRCLE_KERNEL_T1, rel=1e-12)


def test_wp_gaussian_equality():
    # the flat kernel sits exactly at the soliton equality
    for t in (0.1, 0.7, 2.0):
        assert entropy_value("wp", euclidean(3), None, t) == pytest.approx(0.0, abs=1e-10)


def test_wp_h3_kernel_nonpositive():
    val = entropy_value("wp", hyperbolic(3), None, 1.0)
    assert val < 0


@pytest.mark.parametrize("functional", ["wp", "wly-linear", "wly-sinh", "nash"])
def test_circle_kernel_trace_sign_and_monotonicity(functional):
    tr = entropy_trace(functional, CIRC, None, T_GRID)
    if functional != "nash":
        assert np.all(tr.values <= 1e-12)
    assert np.all(tr.discrete_derivatives <= 1e-8)
    assert np.abs(tr.normalization_checks - 1.0).max() < 1e-6


def test_wp_derivative_identity_residual():
    tr = entropy_trace("wp", CIRC, None, T_GRID)
    assert np.nanmax(tr.identity_residuals) < 1e-4


def test_wly_variants_coincide_at_k0():
    a = entropy_trace("wly-linear", CIRC, None, T_GRID)
    b = entropy_trace("wly-sinh", CIRC, None, T_GRID)
    assert np.allclose(a.values, b.values, rtol=1e-12)


def test_wly_sinh_distinct_for_positive_k():
    # identities hold for any admissible k >= sharp bound; values differ
    a = entropy_value("wly-linear", CIRC, None, 1.0, k=0.5)
    b = entropy_value("wly-sinh", CIRC, None, 1.0, k=0.5)
    assert a < 0 and b < 0
    assert a != pytest.approx(b, rel=1e-3)


def test_nash_vanishes_at_small_time():
    assert abs(entropy_value("nash", CIRC, None, 1e-3)) <= 5e-3


def test_nonkernel_solution_traces():
    sol = nonkernel_solution()
    # pointwise-nonpositive integrand: sign holds for any positive solution
    tr = entropy_trace("wly-linear", CIRC, sol, T_GRID)
    assert np.all(tr.values <= 1e-12)
    assert np.all(tr.discrete_derivatives <= 1e-8)
    assert np.nanmax(tr.identity_residuals) < 1e-4
    # the normalized-kernel functional is monotone for any solution, but its
    # sign anchor needs kernel-like small-time behaviour
    tr = entropy_trace("wp", CIRC, sol, T_GRID)
    assert np.all(tr.discrete_derivatives <= 1e-8)
    assert np.nanmax(tr.identity_residuals) < 1e-4


def test_mass_guard():
    bad = PeriodicSolution.from_function(lambda x: 1 + 0.5 * np.cos(x), (2 * math.pi,), 256, 0.05)
    with pytest.raises(ContractError):
        entropy_value("wp", CIRC, bad, 1.0)


def test_convention_guards():
    jet = periodic_jet((2 * math.pi,), 0.3, 1.0)
    with pytest.raises(ContractError):
        wp_integrand(jet, 0.0)  # wants the normalized convention
    with pytest.raises(ContractError):
        wly_bracket("wly-linear", jet.to(Convention.MINUS_LN), 0.0)


def test_noncompact_functionals_restricted():
    with pytest.raises(ContractError):
        entropy_value("nash", euclidean(3), None, 1.0)
    with pytest.raises(ContractError):
        entropy_value("wly-linear", hyperbolic(3), None, 1.0)


def test_trace_grid_validation():
    with pytest.raises(ContractError):
        entropy_trace("wp", CIRC, None, np.array([1.0, 0.5, 2.0]))
    with pytest.raises(ContractError):
        entropy_trace("wp", CIRC, None, np.array([1.0, 2.0]))
