"""The estimate catalogue: gradient estimates, Harnack factors, kernel bounds.

Every inequality is exposed as a pure function returning a signed slack
(LHS - RHS); nonpositive slack means the inequality holds.  One comparator
serves all of them.

Gradient estimates for a positive heat solution u with f = ln u, on a space
with Ricci >= -k (all hold for every t > 0):

* ``li-yau``      |grad f|^2 - a f_t <= n a^2 k / (2(a-1)) + n a^2 / (2t),  a > 1
* ``davies``      same LHS with the curvature term halved
* ``main``        |grad f|^2 - alpha(t) f_t <= phi(t), with
                  alpha(t) = 1 + (sinh(kt) cosh(kt) - kt) / sinh^2(kt) and
                  phi(t) = (nk/2)(coth(kt) + 1)
* ``linearized``  alpha = 1 + (2/3) k t,  phi = n/(2t) + (nk/2)(1 + kt/3)
* ``yau``         |grad f|^2 - f_t <= sqrt(2nk) sqrt(|grad f|^2 + n/2t + 2nk) + n/2t
* ``bakry-qian``  |grad f|^2 - f_t <= sqrt(nk) sqrt(|grad f|^2 + n/2t + nk/4) + n/2t
* ``hamilton``    |grad f|^2 - e^{2kt} f_t <= e^{4kt} n/(2t)
* ``hamilton-log`` t u^2 |grad f|^2 <= (1 + 2kt) u^2 ln(A/u) for u <= A (compact)

and for the normalized kernel convention u = e^{-f} (4 pi t)^{-n/2}:

* ``perelman``    t lap f + t(1+kt)(lap f - |grad f|^2) + f - n(1 + kt/2)^2 <= 0
* ``ni``          the k = 0 case of ``perelman``

The ``main`` pair is bounded for large t (phi -> nk) and has the sharp n/(2t)
blow-up for small t; the classical alternatives lose on one end or the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import ContractError
from .kernels import Convention, KernelJet
from . import special as sp


class Estimate(Enum):
    LI_YAU = "li-yau"
    DAVIES = "davies"
    MAIN = "main"
    LINEARIZED = "linearized"
    YAU = "yau"
    BAKRY_QIAN = "bakry-qian"
    HAMILTON = "hamilton"
    HAMILTON_LOG = "hamilton-log"
    PERELMAN = "perelman"
    NI = "ni"


GRADIENT_ESTIMATES = (
    Estimate.LI_YAU, Estimate.DAVIES, Estimate.MAIN, Estimate.LINEARIZED,
    Estimate.YAU, Estimate.BAKRY_QIAN, Estimate.HAMILTON, Estimate.HAMILTON_LOG,
)
NORMALIZED_ESTIMATES = (Estimate.PERELMAN, Estimate.NI)


@dataclass(frozen=True)
class AlphaPhi:
    alpha: object
    phi: object
    variant: str  # "main" or "linearized"


def alpha_phi(variant: str, n: int, k: float, t) -> AlphaPhi:
    """Coefficient pair (alpha(t), phi(t)) for the two sharp gradient estimates.

    Both variants satisfy alpha -> 1 and phi -> n/(2t) as k -> 0, and the
    main pair is dominated componentwise by the linearized one.  Small kt is
    evaluated by series to avoid 0/0 cancellation.
    """
    if variant not in ("main", "linearized"):
        raise ContractError(f"unknown alpha/phi variant {variant!r}")
    if n < 1:
        raise ContractError("n must be >= 1")
    if k < 0:
        raise ContractError("k must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ContractError("t must be positive")
    x = k * t
    if variant == "linearized":
        alpha = 1.0 + 2.0 * x / 3.0
        phi = n / (2.0 * t) + 0.5 * n * k * (1.0 + x / 3.0)
    else:
        alpha = 1.0 + sp.alpha_excess(x)
        # (nk/2)(coth(kt) + 1) = n/(2t) + (nk/2)(1 + (kt coth kt - 1)/kt)... the
        # composition below is exact and stays finite through k = 0
        phi = n / (2.0 * t) * (1.0 + sp.xcothx_minus_1(x)) + 0.5 * n * k
    alpha = alpha if np.ndim(alpha) else float(alpha)
    phi = phi if np.ndim(phi) else float(phi)
    return AlphaPhi(alpha=alpha, phi=phi, variant=variant)


def estimate_sides(estimate: Estimate, jet: KernelJet, n: int, k: float, t,
                   alpha: float | None = None, sup_bound: float | None = None):
    """(LHS, RHS) of ``estimate`` at the jet's space-time point.

    ``alpha`` supplies the free parameter of ``li-yau``/``davies`` (must be
    > 1); ``sup_bound`` supplies the ceiling A of ``hamilton-log``.  Jets must
    be in the ln-u convention except for ``perelman``/``ni`` which need the
    normalized one.
    """
    estimate = Estimate(estimate)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ContractError("t must be positive")
    if k < 0:
        raise ContractError("k must be >= 0")
    if jet.n != n:
        raise ContractError(f"jet dimension {jet.n} does not match n={n}")
    if np.ndim(t) == 0 and not math.isclose(float(t), float(jet.t), rel_tol=1e-12):
        raise ContractError(f"t={float(t)} does not match the jet time {float(jet.t)}")

    if estimate in NORMALIZED_ESTIMATES:
        jet.require(Convention.MINUS_LN, estimate.value)
        kk = 0.0 if estimate is Estimate.NI else k
        lhs = (t * jet.lap_f + t * (1.0 + kk * t) * (jet.lap_f - jet.gradsq)
               + jet.f - n * (1.0 + 0.5 * kk * t) ** 2)
        zero = np.zeros(np.shape(lhs))
        return lhs, (zero if zero.ndim else 0.0)

    jet.require(Convention.LN_U, estimate.value)
    gs, ft = jet.gradsq, jet.f_t

    if estimate in (Estimate.LI_YAU, Estimate.DAVIES):
        if alpha is None or alpha <= 1.0:
            raise ContractError(f"{estimate.value} needs alpha > 1")
        denom = 2.0 if estimate is Estimate.LI_YAU else 4.0
        rhs = n * alpha ** 2 * k / (denom * (alpha - 1.0)) + n * alpha ** 2 / (2.0 * t)
        return gs - alpha * ft, rhs
    if estimate in (Estimate.MAIN, Estimate.LINEARIZED):
        pair = alpha_phi(estimate.value, n, k, t)
        return gs - pair.alpha * ft, pair.phi
    if estimate is Estimate.YAU:
        rhs = math.sqrt(2.0 * n * k) * np.sqrt(gs + n / (2.0 * t) + 2.0 * n * k) + n / (2.0 * t)
        return gs - ft, rhs
    if estimate is Estimate.BAKRY_QIAN:
        rhs = math.sqrt(n * k) * np.sqrt(gs + n / (2.0 * t) + 0.25 * n * k) + n / (2.0 * t)
        return gs - ft, rhs
    if estimate is Estimate.HAMILTON:
        return gs - np.exp(2.0 * k * t) * ft, np.exp(4.0 * k * t) * n / (2.0 * t)
    # hamilton-log
    if sup_bound is None or np.any(sup_bound <= 0):
        raise ContractError("hamilton-log needs the solution ceiling sup_bound > 0")
    u = jet.u
    return t * u ** 2 * gs, (1.0 + 2.0 * k * t) * u ** 2 * np.log(sup_bound / u)


def estimate_slack(estimate: Estimate, jet: KernelJet, n: int, k: float, t,
                   alpha: float | None = None, sup_bound: float | None = None):
    """Signed slack LHS - RHS of ``estimate``; nonpositive when it holds."""
    lhs, rhs = estimate_sides(estimate, jet, n, k, t, alpha=alpha, sup_bound=sup_bound)
    return lhs - rhs


def harnack_factor(variant: str, n: int, k: float, t1, t2, d):
    """Multiplier M in the Harnack comparison u(x1, t1) <= M u(x2, t2).

    main:         M = A1 exp[ d^2/(4(t2-t1)) (1 + A2) ] with
                  A1 = ((e^{2kt2}-2kt2-1)/(e^{2kt1}-2kt1-1))^{n/4} and
                  A2 = (t2 coth(kt2) - t1 coth(kt1)) / (t2 - t1);
    linearized:   M = (t2/t1)^{n/2} ((1+2kt2/3)/(1+2kt1/3))^{-n/8}
                  exp[ d^2/(4(t2-t1)) (1 + k(t1+t2)/3) + nk(t2-t1)/4 ].

    Both expressions are evaluated through cancellation-free normalized
    pieces so that k -> 0 smoothly recovers (t2/t1)^{n/2} exp(d^2/(4 dt)).
    """
    if variant not in ("main", "linearized"):
        raise ContractError(f"unknown harnack variant {variant!r}")
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(t1 <= 0) or np.any(t2 <= t1):
        raise ContractError("need 0 < t1 < t2")
    if np.any(d < 0):
        raise ContractError("d must be nonnegative")
    if k < 0:
        raise ContractError("k must be >= 0")
    out = np.exp(log_harnack_factor(variant, n, k, t1, t2, d))
    return out if np.ndim(out) else float(out)


def log_harnack_factor(variant: str, n: int, k: float, t1, t2, d):
    """log of ``harnack_factor``; use it directly when the exponent is large."""
    if variant not in ("main", "linearized"):
        raise ContractError(f"unknown harnack variant {variant!r}")
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(t1 <= 0) or np.any(t2 <= t1):
        raise ContractError("need 0 < t1 < t2")
    if np.any(d < 0):
        raise ContractError("d must be nonnegative")
    if k < 0:
        raise ContractError("k must be >= 0")
    dt = t2 - t1
    if variant == "main":
        log_a1 = 0.25 * n * (2.0 * np.log(t2 / t1)
                             + np.log(sp.expm1_2x_minus_2x_over_2x2(k * t2))
                             - np.log(sp.expm1_2x_minus_2x_over_2x2(k * t1)))
        a2 = (_tcoth_excess(k, t2) - _tcoth_excess(k, t1)) / dt
        out = log_a1 + d ** 2 / (4.0 * dt) * (1.0 + a2)
    else:
        out = (0.5 * n * np.log(t2 / t1)
               - 0.125 * n * np.log((1.0 + 2.0 * k * t2 / 3.0) / (1.0 + 2.0 * k * t1 / 3.0))
               + d ** 2 / (4.0 * dt) * (1.0 + k * (t1 + t2) / 3.0)
               + 0.25 * n * k * dt)
    return out if np.ndim(out) else float(out)


def _tcoth_excess(k, t):
    """t coth(kt) - 1/k, finite through k = 0 (-> k t^2 / 3)."""
    if k == 0:
        return np.zeros_like(np.asarray(t, dtype=float))
    return sp.xcothx_minus_1(k * t) / k


def kernel_lower_bound(variant: str, n: int, k: float, d, t):
    """Pointwise heat-kernel lower bound on a space with Ricci >= -k.

    main:        (4 pi t)^{-n/2} E(kt)^{-n/4} exp[-d^2/(4t) (1 + (kt coth kt - 1)/kt)]
                 with E(x) = (e^{2x} - 2x - 1)/(2x^2);
    linearized:  (4 pi t)^{-n/2} exp[-d^2/(4t) (1 + kt/3) - nkt/4].

    Both collapse to the Gaussian at k = 0.
    """
    if variant not in ("main", "linearized"):
        raise ContractError(f"unknown kernel bound variant {variant!r}")
    if n < 1:
        raise ContractError("n must be >= 1")
    if k < 0:
        raise ContractError("k must be >= 0")
    d = np.asarray(d, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ContractError("t must be positive")
    pref = (4.0 * math.pi * t) ** (-n / 2.0)
    x = k * t
    if variant == "main":
        ratio = _xcothx_minus_1_over_x(x)
        out = pref * sp.expm1_2x_minus_2x_over_2x2(x) ** (-n / 4.0) * np.exp(
            -d ** 2 / (4.0 * t) * (1.0 + ratio))
    else:
        out = pref * np.exp(-d ** 2 / (4.0 * t) * (1.0 + x / 3.0) - 0.25 * n * x)
    return out if np.ndim(out) else float(out)


def _xcothx_minus_1_over_x(x):
    """(x coth x - 1)/x, -> 0 as x -> 0."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-8
    safe = np.where(small, 1.0, x)
    out = np.where(small, x / 3.0, sp.xcothx_minus_1(safe) / safe)
    return out if out.ndim else float(out)


def dm_h(n: int, curvature_scale: float, r, t):
    """Two-sided comparison profile h(t, r) for the heat kernel of the
    curvature -K space form:

        h = (4 pi t)^{-n/2} exp(-r^2/4t - (n-1)^2 K t/4 - (n-1) sqrt(K) r / 2)
            (1 + sqrt(K) r + K t)^{(n-1)/2 - 1} (1 + sqrt(K) r).

    The space-form kernel lies within dimension-dependent constant factors of
    h; with K = 0 it reduces to the Gaussian.
    """
    if n < 2:
        raise ContractError("dm_h needs n >= 2")
    K = float(curvature_scale)
    if K < 0:
        raise ContractError("curvature_scale must be >= 0")
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ContractError("t must be positive")
    rk = math.sqrt(K)
    out = ((4.0 * math.pi * t) ** (-n / 2.0)
           * np.exp(-r ** 2 / (4.0 * t) - (n - 1) ** 2 * K * t / 4.0 - (n - 1) * rk * r / 2.0)
           * (1.0 + rk * r + K * t) ** ((n - 1) / 2.0 - 1.0)
           * (1.0 + rk * r))
    return out if np.ndim(out) else float(out)


class LyhKinematics(NamedTuple):
    t_tilde: object
    s: object
    phi: object


#: s(t) choices for the weighted log-kernel Harnack comparison.
#:
#: "energy"    s'(t) = 1/sqrt(t (2 + kt)); the path-energy minimizer that the
#:             comparison actually requires.  Default, continuous in k.
#: "integral"  s'(t) = 1/sqrt(t_tilde) = sqrt((2 + kt)/t); overshoots the
#:             energy denominator, so checks under it are reported, not
#:             asserted.
#: "sqrt-t"    s = sqrt(t) at k = 0 (same as "integral" for k > 0); reported
#:             for comparison only.
LYH_BRANCHES = ("energy", "integral", "sqrt-t")


def lyh_kinematics(k: float, t, branch: str = "energy") -> LyhKinematics:
    """Kinematic functions (t_tilde, s, Phi) of the weighted Harnack comparison.

    t_tilde = t/(2 + kt); Phi(t) = k * integral_0^t sqrt(t_tilde) dt, which in
    closed form is (sinh(theta) - theta)/sqrt(k) with theta = arccosh(1 + kt).
    The s branches are documented on ``LYH_BRANCHES``.
    """
    if branch not in LYH_BRANCHES:
        raise ContractError(f"unknown s-branch {branch!r}")
    if k < 0:
        raise ContractError("k must be >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ContractError("t must be positive")
    x = k * t
    t_tilde = t / (2.0 + x)
    if k == 0:
        s = {"energy": np.sqrt(2.0 * t), "integral": 2.0 * np.sqrt(2.0 * t),
             "sqrt-t": np.sqrt(t)}[branch]
        phi = np.zeros_like(t)
    else:
        theta = np.log1p(x + np.sqrt(x * (x + 2.0)))  # arccosh(1 + kt), stable
        rootk = math.sqrt(k)
        phi = (theta ** 3 / 6.0) * sp.sinhc3(theta) / rootk  # (sinh - id)(theta)/sqrt(k)
        if branch == "energy":
            s = theta / rootk
        else:
            s = (np.sinh(theta) + theta) / rootk
    if np.ndim(t) == 0:
        return LyhKinematics(float(t_tilde), float(s), float(phi))
    return LyhKinematics(t_tilde, s, phi)


class TechnicalValues(NamedTuple):
    sinh_pair_defect: object      # must be <= 0 for all x > 0
    linearized_pair_margin: object  # must be >= 0 for all x > 0


def technical_inequalities(x, n: int = 1) -> TechnicalValues:
    """The two scalar inequalities behind the maximum-principle arguments.

    With k normalized to 1 and x = kt:

    * sinh_pair_defect(x) = 4 (alpha - 1) phi
      - n alpha^2 (2 coth x - 1/(cosh x sinh x)), nonpositive; this is what
      lets the sinh-form pair absorb the quadratic completion.
    * linearized_pair_margin(x) = (e^{2x} - e^{-2x})(1 + 2x/3 + x^2/9)
      - 2x (1 + 4x/3 + 4x^2/9), nonnegative with all Taylor coefficients
      nonnegative; the linearized analogue.

    Both scale linearly in k, so k = 1 certifies every k > 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ContractError("x must be positive")
    alpha = 1.0 + sp.alpha_excess(x)
    phi = 0.5 * n * (sp.coth(x) + 1.0)
    defect = 4.0 * (alpha - 1.0) * phi - n * alpha ** 2 * (
        2.0 * sp.coth(x) - 1.0 / (np.cosh(x) * np.sinh(x)))
    margin = ((np.exp(2.0 * x) - np.exp(-2.0 * x)) * (1.0 + 2.0 * x / 3.0 + x ** 2 / 9.0)
              - 2.0 * x * (1.0 + 4.0 * x / 3.0 + 4.0 * x ** 2 / 9.0))
    if np.ndim(x) == 0:
        return TechnicalValues(float(defect), float(margin))
    return TechnicalValues(defect, margin)


def monotone_weight(n: int, k: float, t):
    """Integrating factor w(t) = t^{n/2} (1 + 2kt/3)^{-n/8} e^{nkt/4}.

    d/dt log w equals phi/alpha of the linearized pair, so t -> w(t) u(x, t)
    is nondecreasing for every positive heat solution on a space with
    Ricci >= -k.
    """
    if n < 1 or k < 0:
        raise ContractError("need n >= 1 and k >= 0")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ContractError("t must be positive")
    out = t ** (n / 2.0) * (1.0 + 2.0 * k * t / 3.0) ** (-n / 8.0) * np.exp(0.25 * n * k * t)
    return out if np.ndim(out) else float(out)
