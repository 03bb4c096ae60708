"""Model geometries and their radial calculus.

Four model spaces are supported: Euclidean space R^n, hyperbolic space H^n
with sectional curvature -K, the circle of circumference L, and flat tori.
Every space carries a sharp Ricci lower bound k (Ricci >= -k g): 0 for the
flat kinds and (n-1)K for hyperbolic space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic"
CIRCLE = "circle"
FLAT_TORUS = "flat-torus"

_KINDS = (EUCLIDEAN, HYPERBOLIC, CIRCLE, FLAT_TORUS)

# Dimension cap keeps quadrature and image sums cheap.
MAX_DIM = 8


@dataclass(frozen=True)
class ModelSpace:
    kind: str
    dim: int
    curvature_scale: float = 0.0  # K: sectional curvature is -K (hyperbolic only)
    lengths: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ContractError(f"unknown space kind {self.kind!r}")
        if not 1 <= self.dim <= MAX_DIM:
            raise ContractError(f"dim must be in 1..{MAX_DIM}, got {self.dim}")
        if self.kind == HYPERBOLIC:
            if self.curvature_scale <= 0:
                raise ContractError("hyperbolic space needs curvature_scale K > 0")
            if self.dim < 2:
                raise ContractError("hyperbolic space needs dim >= 2")
        elif self.curvature_scale != 0.0:
            raise ContractError(f"{self.kind} requires curvature_scale = 0")
        if self.kind == CIRCLE:
            if self.dim != 1 or len(self.lengths) != 1:
                raise ContractError("circle has dim 1 and exactly one length")
        elif self.kind == FLAT_TORUS:
            if len(self.lengths) != self.dim:
                raise ContractError("flat torus needs one length per dimension")
        elif self.lengths:
            raise ContractError(f"{self.kind} takes no lengths")
        if any(L <= 0 for L in self.lengths):
            raise ContractError("lengths must be positive")

    @property
    def is_periodic(self) -> bool:
        return self.kind in (CIRCLE, FLAT_TORUS)

    @property
    def is_radial(self) -> bool:
        return self.kind in (EUCLIDEAN, HYPERBOLIC)


def euclidean(dim: int) -> ModelSpace:
    return ModelSpace(EUCLIDEAN, dim)


def hyperbolic(dim: int, curvature_scale: float = 1.0) -> ModelSpace:
    return ModelSpace(HYPERBOLIC, dim, curvature_scale)


def circle(length: float = 2.0 * math.pi) -> ModelSpace:
    return ModelSpace(CIRCLE, 1, lengths=(float(length),))


def flat_torus(lengths) -> ModelSpace:
    lengths = tuple(float(L) for L in lengths)
    return ModelSpace(FLAT_TORUS, len(lengths), lengths=lengths)


@dataclass(frozen=True)
class RicciBound:
    """Constant k >= 0 such that Ricci >= -k g on the space."""

    k: float

    def __post_init__(self):
        if self.k < 0:
            raise ContractError("Ricci lower bound k must be >= 0 here")


def ricci_lower_bound(space: ModelSpace) -> RicciBound:
    """Sharp k with Ricci >= -k g: zero for flat kinds, (n-1)K for hyperbolic."""
    if space.kind == HYPERBOLIC:
        return RicciBound((space.dim - 1) * space.curvature_scale)
    return RicciBound(0.0)


def _require_radial(space: ModelSpace, op: str):
    if not space.is_radial:
        raise ContractError(f"{op} needs a Euclidean or hyperbolic space, got {space.kind}")


def radial_laplacian_coefficient(space: ModelSpace, r):
    """Coefficient a(r) with Delta u = u_rr + a(r) u_r for radial u.

    Euclidean: (n-1)/r.  Hyperbolic of curvature -K: (n-1) sqrt(K) coth(sqrt(K) r).
    """
    _require_radial(space, "radial_laplacian_coefficient")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ContractError("r must be positive")
    n = space.dim
    if space.kind == EUCLIDEAN:
        out = (n - 1) / r
    else:
        sk = math.sqrt(space.curvature_scale)
        out = (n - 1) * sk / np.tanh(sk * r)
    return out if out.ndim else float(out)


def sphere_area(n: int) -> float:
    """Surface area of the unit (n-1)-sphere in R^n (two points for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def volume_weight(space: ModelSpace, r):
    """Radial measure weight w(r): integrate u(r) w(r) dr to integrate over the space."""
    _require_radial(space, "volume_weight")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ContractError("r must be positive")
    n = space.dim
    area = sphere_area(n)
    if space.kind == EUCLIDEAN:
        out = area * r ** (n - 1)
    else:
        sk = math.sqrt(space.curvature_scale)
        out = area * (np.sinh(sk * r) / sk) ** (n - 1)
    return out if out.ndim else float(out)
