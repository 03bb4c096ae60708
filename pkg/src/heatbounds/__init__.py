"""Numerical certification of differential Harnack inequalities, heat-kernel
bounds, and entropy monotonicity on model Riemannian spaces.

The package evaluates a catalogue of sharp gradient estimates for positive
heat solutions (with time-dependent coefficients built from sinh/coth),
the parabolic Harnack inequalities and kernel lower bounds they imply, a
normalized-kernel differential Harnack inequality, and the associated
entropy functionals, then certifies each one numerically against exact and
independently solved heat kernels on Euclidean space, hyperbolic space, the
circle, and flat tori.
"""

from .spaces import (ModelSpace, RicciBound, circle, euclidean, flat_torus,
                     hyperbolic, radial_laplacian_coefficient,
                     ricci_lower_bound, volume_weight)
from .kernels import (Convention, KernelJet, QuadratureSpec, euclid_jet,
                      h2_kernel, h3_jet, periodic_jet, periodic_kernel_value)
from .bounds import (AlphaPhi, Estimate, alpha_phi, dm_h, estimate_sides,
                     estimate_slack, harnack_factor, kernel_lower_bound,
                     log_harnack_factor, lyh_kinematics, monotone_weight,
                     technical_inequalities)
from .solvers import PeriodicSolution, RadialGrid, evolve_periodic, solve_radial
from .certify import SweepSpec, VerificationReport, run_check
from .entropy import EntropyTrace, entropy_trace, entropy_value
from .errors import ContractError, NumericalFailure

__all__ = [
    "AlphaPhi", "ContractError", "Convention", "EntropyTrace", "Estimate",
    "KernelJet", "ModelSpace", "NumericalFailure", "PeriodicSolution",
    "QuadratureSpec", "RadialGrid", "RicciBound", "SweepSpec",
    "VerificationReport", "alpha_phi", "circle", "dm_h", "entropy_trace",
    "entropy_value", "estimate_sides", "estimate_slack", "euclid_jet",
    "euclidean", "evolve_periodic", "flat_torus", "h2_kernel", "h3_jet",
    "harnack_factor", "hyperbolic", "kernel_lower_bound",
    "log_harnack_factor", "lyh_kinematics", "monotone_weight",
    "periodic_jet", "periodic_kernel_value", "radial_laplacian_coefficient",
    "ricci_lower_bound", "run_check", "solve_radial",
    "technical_inequalities", "volume_weight",
]

__version__ = "0.1.0"
