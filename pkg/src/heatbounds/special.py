"""Cancellation-safe special-function combinations.

Every inequality in this package involves hyperbolic-function expressions
whose naive evaluation loses all significant digits as the argument goes to
zero (coth x - 1/x, e^{2x} - 2x - 1, x coth x - 1, ...).  Each helper below
switches to a truncated Taylor series under a fixed threshold chosen so the
truncation error sits far below the 1e-8 continuity tolerance used in tests;
above the threshold direct evaluation is accurate.

All helpers accept scalars or numpy arrays and never warn on the unused
branch of the switch.
"""

from __future__ import annotations

import numpy as np


def _switch(x, cut, series, direct):
    """Evaluate series(x) where x < cut else direct(x), without spurious FP warnings."""
    x = np.asarray(x, dtype=float)
    small = x < cut
    safe = np.where(small, cut, x)  # keep direct() away from its singular point
    out = np.where(small, series(x), direct(safe))
    return out if out.ndim else float(out)


def coth(x):
    return 1.0 / np.tanh(x)


def coth_minus_inv(x):
    """coth x - 1/x, the hyperbolic-drift excess over the flat one.  O(x) at 0."""
    return _switch(
        x, 1e-3,
        lambda x: x / 3.0 - x ** 3 / 45.0 + 2.0 * x ** 5 / 945.0,
        lambda x: 1.0 / np.tanh(x) - 1.0 / x,
    )


def coth_minus_inv_over_x(x):
    """(coth x - 1/x) / x, finite (= 1/3) at 0."""
    return _switch(
        x, 1e-3,
        lambda x: 1.0 / 3.0 - x ** 2 / 45.0 + 2.0 * x ** 4 / 945.0,
        lambda x: (1.0 / np.tanh(x) - 1.0 / x) / x,
    )


def d_coth_minus_inv(x):
    """d/dx (coth x - 1/x) = 1/x^2 - csch^2 x."""
    return _switch(
        x, 1e-3,
        lambda x: 1.0 / 3.0 - x ** 2 / 15.0 + 2.0 * x ** 4 / 189.0,
        lambda x: 1.0 / x ** 2 - 1.0 / np.sinh(x) ** 2,
    )


def log_sinh_ratio(x):
    """log(sinh x / x).  O(x^2) at 0."""
    return _switch(
        x, 1e-3,
        lambda x: x ** 2 / 6.0 - x ** 4 / 180.0,
        lambda x: np.log(np.sinh(x) / x),
    )


def sinh_ratio(x):
    """x / sinh x, the reciprocal square-root Jacobian factor of H^3."""
    return _switch(
        x, 1e-3,
        lambda x: 1.0 - x ** 2 / 6.0 + 7.0 * x ** 4 / 360.0,
        lambda x: x / np.sinh(x),
    )


def xcothx_minus_1(x):
    """x coth x - 1.  O(x^2) at 0; series kept to x^10 so the x = 0.1 switch
    is continuous to ~1e-15 relative."""
    return _switch(
        x, 0.1,
        lambda x: x ** 2 / 3.0 - x ** 4 / 45.0 + 2.0 * x ** 6 / 945.0
        - x ** 8 / 4725.0 + 2.0 * x ** 10 / 93555.0,
        lambda x: x / np.tanh(x) - 1.0,
    )


def expm1_2x_minus_2x_over_2x2(x):
    """(e^{2x} - 2x - 1) / (2 x^2), normalized so the value at 0 is 1.

    The normalization cancels the k^2 t^2 factor that makes ratio expressions
    like A1 and the kernel lower bound smooth through k -> 0.
    """
    return _switch(
        x, 1e-4,
        lambda x: 1.0 + 2.0 * x / 3.0 + x ** 2 / 3.0 + 2.0 * x ** 3 / 15.0,
        lambda x: (np.expm1(2.0 * x) - 2.0 * x) / (2.0 * x ** 2),
    )


def sinhc3(x):
    """(sinh x - x) / (x^3 / 6): normalized to 1 at x = 0."""
    return _switch(
        x, 1e-3,
        lambda x: 1.0 + x ** 2 / 20.0 + x ** 4 / 840.0,
        lambda x: 6.0 * (np.sinh(x) - x) / x ** 3,
    )


def alpha_excess(x):
    """(sinh x cosh x - x) / sinh^2 x, the time-dependent excess of the
    gradient-estimate coefficient alpha(t) over 1.  Equals (2/3)x at leading
    order and tends to 1 as x -> infinity."""
    def direct(x):
        big = x > 300.0  # sinh overflows near 710/2; the limit is exact there
        xs = np.where(big, 1.0, x)
        val = (np.sinh(xs) * np.cosh(xs) - xs) / np.sinh(xs) ** 2
        return np.where(big, 1.0, val)

    return _switch(
        x, 1e-4,
        lambda x: 2.0 * x / 3.0 - 4.0 * x ** 3 / 45.0,
        direct,
    )
