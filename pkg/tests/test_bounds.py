import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatbounds import (ContractError, Convention, Estimate, alpha_phi, dm_h,
                        estimate_slack, euclid_jet, h3_jet, harnack_factor,
                        kernel_lower_bound, log_harnack_factor, lyh_kinematics,
                        monotone_weight, technical_inequalities)

# frozen from a 40-digit evaluation of the closed forms
ALPHA_MAIN_AT_1 = 1.5889736245330208
HARNACK_MAIN = 14.871201912476183      # (n,k,t1,t2,d) = (3,2,0.5,1,1)
HARNACK_LIN = 14.347040472810806
KIN_T_TILDE = 1.0 / 3.0                # k = 1, t = 1
KIN_S_ENERGY = 1.3169578969248167
KIN_S_INTEGRAL = 3.049008704493694
KIN_PHI = 0.41509291064406058
SINH_DEFECT_AT_1 = -2.5134679958448674  # x = 1, n = 1
LIN_MARGIN_AT_1 = 7.3399481167894001
WEIGHT_321 = 3.2617481773055087
H3_MAIN_SLACK_11 = -1.2090578993500019  # d=1, t=1, n=3, k=2
H3_PERELMAN_SLACK_11 = -0.9275342629618252


# --- alpha/phi pairs ---------------------------------------------------------


def test_alpha_phi_flat_limit():
    for variant in ("main", "linearized"):
        pair = alpha_phi(variant, 3, 0.0, 0.5)
        assert pair.alpha == pytest.approx(1.0, abs=1e-15)
        assert pair.phi == pytest.approx(3.0, rel=1e-15)  # n/(2t)


def test_alpha_main_golden():
    assert alpha_phi("main", 3, 2.0, 0.5).alpha == pytest.approx(ALPHA_MAIN_AT_1, rel=1e-14)


def test_alpha_phi_large_time_asymptotics():
    pair = alpha_phi("main", 3, 2.0, 200.0)
    assert pair.alpha == pytest.approx(2.0, abs=1e-12)
    assert pair.phi == pytest.approx(3.0 * 2.0, rel=1e-10)  # phi -> n k


@given(st.integers(min_value=1, max_value=8),
       st.floats(min_value=1e-6, max_value=10.0),
       st.floats(min_value=1e-3, max_value=50.0))
@settings(max_examples=200)
def test_main_pair_dominated_by_linearized(n, k, t):
    main = alpha_phi("main", n, k, t)
    lin = alpha_phi("linearized", n, k, t)
    assert main.alpha <= lin.alpha * (1 + 1e-13)
    assert main.phi <= lin.phi * (1 + 1e-13)


def test_alpha_phi_series_switch_continuity():
    # values just below and above kt = 1e-4 agree to 1e-8 relative
    k = 1.0
    for t in (1e-4 * (1 - 1e-9), 1e-4 * (1 + 1e-9)):
        pass
    lo = alpha_phi("main", 3, k, 1e-4 * (1 - 1e-9))
    hi = alpha_phi("main", 3, k, 1e-4 * (1 + 1e-9))
    assert lo.alpha == pytest.approx(hi.alpha, rel=1e-8)
    assert lo.phi == pytest.approx(hi.phi, rel=1e-8)


def test_alpha_phi_derivative_system():
    # phi' = -2 phi^2/n + 2 k phi, the ODE that makes the sinh pair work
    n, k, t, h = 3, 1.7, 0.6, 1e-6
    phi = lambda s: alpha_phi("main", n, k, s).phi
    dphi = (phi(t + h) - phi(t - h)) / (2 * h)
    p = phi(t)
    assert dphi == pytest.approx(-2 * p * p / n + 2 * k * p, rel=1e-8)


# --- slack evaluation --------------------------------------------------------


def test_euclid_equality_cases():
    jet = euclid_jet(3, 1.7, 0.6)
    assert estimate_slack(Estimate.MAIN, jet, 3, 0.0, 0.6) == pytest.approx(0.0, abs=1e-13)
    jm = jet.to(Convention.MINUS_LN)
    assert estimate_slack(Estimate.NI, jm, 3, 0.0, 0.6) == pytest.approx(0.0, abs=1e-13)
    assert estimate_slack(Estimate.PERELMAN, jm, 3, 0.0, 0.6) == pytest.approx(0.0, abs=1e-13)


def test_h3_golden_slacks():
    jet = h3_jet(1.0, 1.0)
    got = estimate_slack(Estimate.MAIN, jet, 3, 2.0, 1.0)
    assert got == pytest.approx(H3_MAIN_SLACK_11, rel=1e-12)
    got = estimate_slack(Estimate.PERELMAN, jet.to(Convention.MINUS_LN), 3, 2.0, 1.0)
    assert got == pytest.approx(H3_PERELMAN_SLACK_11, rel=1e-12)


def test_davies_rhs_at_alpha_two():
    # n alpha^2 k/(4(alpha-1)) + n alpha^2/(2t) = nk + 2n/t at alpha = 2
    jet = euclid_jet(3, 0.0, 1.0)
    n, k, t = 3, 2.0, 1.0
    slack = estimate_slack(Estimate.DAVIES, jet, n, k, t, alpha=2.0)
    lhs = jet.gradsq - 2.0 * jet.f_t
    assert slack == pytest.approx(lhs - (n * k + 2 * n / t), rel=1e-13)


def test_slack_validation():
    jet = euclid_jet(3, 1.0, 1.0)
    with pytest.raises(ContractError):
        estimate_slack(Estimate.LI_YAU, jet, 3, 0.0, 1.0, alpha=1.0)  # needs alpha > 1
    with pytest.raises(ContractError):
        estimate_slack(Estimate.PERELMAN, jet, 3, 0.0, 1.0)  # wrong convention
    with pytest.raises(ContractError):
        estimate_slack(Estimate.MAIN, jet.to(Convention.MINUS_LN), 3, 0.0, 1.0)
    with pytest.raises(ContractError):
        estimate_slack(Estimate.HAMILTON_LOG, jet, 3, 0.0, 1.0)  # needs sup_bound
    with pytest.raises(ContractError):
        estimate_slack(Estimate.MAIN, jet, 3, 0.0, 2.0)  # t mismatches the jet


def test_vector_field_form_spot_checks():
    # alpha u_t + phi u + 2 Du(V) + u |V|^2 >= 0 for arbitrary radial fields
    # V; the scalar estimate is its V = -grad(u)/u optimum
    rng = np.random.default_rng(7)
    r = np.linspace(0.1, 6.0, 50)
    for t in (0.1, 0.7, 3.0):
        jet = h3_jet(r, t)
        u, u_r, u_t = jet.u, jet.u * jet.f_r, jet.u * jet.f_t
        for variant in ("main", "linearized"):
            pair = alpha_phi(variant, 3, 2.0, t)
            for _ in range(20):
                v = rng.normal(scale=5.0, size=r.size)
                expr = pair.alpha * u_t + pair.phi * u + 2.0 * u_r * v + u * v ** 2
                assert np.all(expr >= -1e-12)
            v_opt = -jet.f_r
            expr = pair.alpha * u_t + pair.phi * u + 2.0 * u_r * v_opt + u * v_opt ** 2
            slack = estimate_slack(Estimate(variant if variant != "main" else "main"),
                                   jet, 3, 2.0, t)
            assert np.allclose(expr, -u * slack, rtol=1e-10, atol=1e-14)


# --- Harnack factors ---------------------------------------------------------


def test_harnack_golden_values():
    assert harnack_factor("main", 3, 2.0, 0.5, 1.0, 1.0) == pytest.approx(HARNACK_MAIN, rel=1e-12)
    assert harnack_factor("linearized", 3, 2.0, 0.5, 1.0, 1.0) == pytest.approx(HARNACK_LIN, rel=1e-12)


def test_harnack_flat_limit():
    # k -> 0 recovers (t2/t1)^{n/2} exp(d^2/(4 dt)) for both variants
    n, t1, t2, d = 3, 0.5, 2.0, 1.3
    flat = (t2 / t1) ** (n / 2) * math.exp(d * d / (4 * (t2 - t1)))
    for variant in ("main", "linearized"):
        got = harnack_factor(variant, n, 1e-8, t1, t2, d)
        assert got == pytest.approx(flat, rel=1e-6)
    assert harnack_factor("main", n, 0.0, t1, t2, d) == pytest.approx(flat, rel=1e-13)


def test_harnack_time_factor_small_k_expansion():
    # the time-coupling factor A2 tends to k (t1 + t2)/3
    n, k, t1, t2 = 3, 1e-6, 0.4, 1.9
    # recover A2 from the d-dependence of the log factor
    l0 = log_harnack_factor("main", n, k, t1, t2, 0.0)
    l1 = log_harnack_factor("main", n, k, t1, t2, 1.0)
    a2 = (l1 - l0) * 4.0 * (t2 - t1) - 1.0
    assert a2 == pytest.approx(k * (t1 + t2) / 3.0, rel=1e-9)


def test_harnack_branch_switch_continuity():
    # crossing kt = 1e-4 changes the value by < 1e-8 relative
    t1, t2, d = 0.5, 1.0, 1.0
    for variant in ("main", "linearized"):
        lo = harnack_factor(variant, 3, 1e-4 * (1 - 1e-9), t1, t2, d)
        hi = harnack_factor(variant, 3, 1e-4 * (1 + 1e-9), t1, t2, d)
        assert lo == pytest.approx(hi, rel=1e-8)


def test_harnack_rejects_bad_times():
    with pytest.raises(ContractError):
        harnack_factor("main", 3, 1.0, 1.0, 1.0, 0.5)
    with pytest.raises(ContractError):
        harnack_factor("main", 3, 1.0, 2.0, 1.0, 0.5)


# --- kernel lower bounds -----------------------------------------------------


def test_kernel_lower_bound_flat_limit():
    for variant in ("main", "linearized"):
        got = kernel_lower_bound(variant, 3, 0.0, 1.2, 0.8)
        assert got == pytest.approx(euclid_jet(3, 1.2, 0.8).u, rel=1e-13)


def test_kernel_lower_bound_diagonal_linearized():
    # d = 0: (4 pi t)^{-n/2} e^{-nkt/4}
    n, k, t = 3, 2.0, 0.7
    got = kernel_lower_bound("linearized", n, k, 0.0, t)
    assert got == pytest.approx((4 * math.pi * t) ** (-n / 2) * math.exp(-n * k * t / 4), rel=1e-14)


def test_kernel_lower_bounds_below_h3_kernel():
    d = np.linspace(0.0, 5.0, 101)
    for t in np.geomspace(0.05, 5.0, 20):
        u = h3_jet(d, t).u
        for variant in ("main", "linearized"):
            assert np.all(kernel_lower_bound(variant, 3, 2.0, d, t) <= u * (1 + 1e-12))


def test_kernel_lower_bound_branch_continuity():
    for variant in ("main", "linearized"):
        lo = kernel_lower_bound(variant, 3, 1e-4 * (1 - 1e-9), 1.0, 1.0)
        hi = kernel_lower_bound(variant, 3, 1e-4 * (1 + 1e-9), 1.0, 1.0)
        assert lo == pytest.approx(hi, rel=1e-8)


def test_dm_h_values():
    assert dm_h(3, 0.0, 1.2, 0.8) == pytest.approx(euclid_jet(3, 1.2, 0.8).u, rel=1e-13)
    n, K, t = 3, 1.0, 0.6
    got = dm_h(n, K, 0.0, t)
    expect = (4 * math.pi * t) ** (-n / 2) * math.exp(-(n - 1) ** 2 * K * t / 4) * (1 + K * t) ** ((n - 3) / 2)
    assert got == pytest.approx(expect, rel=1e-14)


def test_dm_h_brackets_h3_kernel():
    # scanned two-sided constant for the curvature -1 three-space
    r = np.linspace(0.1, 5.0, 100)
    ratios = []
    for t in np.geomspace(0.1, 5.0, 25):
        ratios.append(h3_jet(r, t).u / dm_h(3, 1.0, r, t))
    ratios = np.concatenate(ratios)
    c = max(ratios.max(), 1.0 / ratios.min())
    assert 1.0 <= c < 2.0  # the ratio r e^r / (sinh(r) (1+r)) lives in [1, 2)


# --- kinematics of the weighted comparison -----------------------------------


def test_lyh_kinematics_golden():
    kin = lyh_kinematics(1.0, 1.0, "integral")
    assert kin.t_tilde == pytest.approx(KIN_T_TILDE, rel=1e-14)
    assert kin.s == pytest.approx(KIN_S_INTEGRAL, rel=1e-12)
    assert kin.phi == pytest.approx(KIN_PHI, rel=1e-12)
    assert lyh_kinematics(1.0, 1.0, "energy").s == pytest.approx(KIN_S_ENERGY, rel=1e-12)


def test_lyh_k0_branches():
    t = 1.7
    assert lyh_kinematics(0.0, t, "energy").s == pytest.approx(math.sqrt(2 * t), rel=1e-14)
    assert lyh_kinematics(0.0, t, "integral").s == pytest.approx(2 * math.sqrt(2 * t), rel=1e-14)
    assert lyh_kinematics(0.0, t, "sqrt-t").s == pytest.approx(math.sqrt(t), rel=1e-14)
    assert lyh_kinematics(0.0, t).phi == 0.0


@pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
def test_lyh_kinematics_derivatives(k):
    # s'_energy = 1/sqrt(t(2+kt)); s'_integral = 1/sqrt(t_tilde); Phi' = k sqrt(t_tilde)
    h = 1e-7
    for t in np.geomspace(0.1, 10.0, 12):
        t = float(t)
        tt = t / (2 + k * t)
        d_en = (lyh_kinematics(k, t + h, "energy").s - lyh_kinematics(k, t - h, "energy").s) / (2 * h)
        d_in = (lyh_kinematics(k, t + h, "integral").s - lyh_kinematics(k, t - h, "integral").s) / (2 * h)
        d_ph = (lyh_kinematics(k, t + h).phi - lyh_kinematics(k, t - h).phi) / (2 * h)
        assert d_en == pytest.approx(1 / math.sqrt(t * (2 + k * t)), rel=1e-7)
        assert d_in == pytest.approx(1 / math.sqrt(tt), rel=1e-7)
        assert d_ph == pytest.approx(k * math.sqrt(tt), rel=1e-7)


def test_lyh_kinematics_small_k_continuity():
    t = 1.3
    for branch in ("energy", "integral"):
        tiny = lyh_kinematics(1e-12, t, branch)
        zero = lyh_kinematics(0.0, t, branch)
        assert tiny.s == pytest.approx(zero.s, rel=1e-6)
        assert tiny.phi == pytest.approx(0.0, abs=1e-6)


# --- scalar technical inequalities -------------------------------------------


def test_technical_golden_values():
    vals = technical_inequalities(1.0, 1)
    assert vals.sinh_pair_defect == pytest.approx(SINH_DEFECT_AT_1, rel=1e-13)
    assert vals.linearized_pair_margin == pytest.approx(LIN_MARGIN_AT_1, rel=1e-13)


def test_technical_asymptote():
    # x -> infinity with n = 1: defect -> -4
    assert technical_inequalities(40.0, 1).sinh_pair_defect == pytest.approx(-4.0, rel=1e-10)


def test_technical_margin_vanishes_at_zero():
    xs = np.geomspace(1e-8, 1e-2, 50)
    margins = technical_inequalities(xs, 1).linearized_pair_margin
    assert np.all(margins >= 0)
    assert margins[0] < 1e-7          # ~ 2x near zero
    assert np.all(np.diff(margins) > 0)


# --- monotone weight ----------------------------------------------------------


def test_monotone_weight_values():
    assert monotone_weight(3, 0.0, 1.7) == pytest.approx(1.7 ** 1.5, rel=1e-14)
    assert monotone_weight(3, 2.0, 1.0) == pytest.approx(WEIGHT_321, rel=1e-13)


@pytest.mark.parametrize("k", [0.3, 1.0, 2.0])
@pytest.mark.parametrize("t", [0.11, 0.7, 3.0])
def test_weight_log_derivative_is_phi_over_alpha(k, t):
    # d/dt log w = phi/alpha for the linearized pair; fourth-order stencil
    # with a step scaled to t (the log weight's derivatives grow like 1/t^5)
    n, h = 3, 1e-3 * t
    lw = lambda s: math.log(monotone_weight(n, k, s))
    d = (lw(t - 2 * h) - 8 * lw(t - h) + 8 * lw(t + h) - lw(t + 2 * h)) / (12 * h)
    pair = alpha_phi("linearized", n, k, t)
    assert d == pytest.approx(pair.phi / pair.alpha, rel=1e-10)
