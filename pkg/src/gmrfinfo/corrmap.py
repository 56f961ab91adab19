"""Conversions between the three correlation parameterizations of the field:
edge dependence zeta, edge correlation rho, and physical sensor spacing at a
given diffusion rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .specfun import bessel_k1, elliptic_k

__all__ = [
    "PhysicalField",
    "rho_from_zeta",
    "zeta_from_rho",
    "rho_from_spacing",
    "zeta_from_spacing",
]

# Below this zeta the closed form for rho is a 0/0 ratio of nearly-equal
# quantities; the Taylor expansion of K gives rho = zeta (1 + 5 zeta^2 + ...).
_RHO_SERIES_SWITCH = 1e-4


@dataclass(frozen=True)
class PhysicalField:
    """Isotropic physical field with diffusion rate alpha [1/m].

    The correlation between points at distance d is alpha*d*K1(alpha*d), the
    stationary solution of the damped Laplace equation driven by white noise.
    """

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha!r}")


def rho_from_zeta(zeta: float) -> float:
    """Edge correlation gamma_01/gamma_00 of the SFCAR with edge dependence zeta.

    rho = ((2/pi) K(4 zeta) - 1) / ((2/pi) (4 zeta) K(4 zeta)); the endpoints
    map exactly (0 -> 0 since K(0) = pi/2, 1/4 -> 1 since K(1) = inf).
    """
    if not 0.0 <= zeta <= 0.25:
        raise ValueError(f"zeta must lie in [0, 1/4], got {zeta!r}")
    if zeta == 0.25:
        return 1.0
    if zeta < _RHO_SERIES_SWITCH:
        return zeta * (1.0 + 5.0 * zeta * zeta)
    q = (2.0 / math.pi) * elliptic_k(4.0 * zeta)
    return (q - 1.0) / (q * 4.0 * zeta)


def zeta_from_rho(rho: float) -> float:
    """Inverse of rho_from_zeta by bisection, |delta zeta| <= 1e-12."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho!r}")
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return 0.25
    lo, hi = 0.0, 0.25
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if rho_from_zeta(mid) < rho:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rho_from_spacing(field: PhysicalField, dn: float) -> float:
    """Physical edge correlation h(dn) = alpha*dn*K1(alpha*dn), in [0, 1].

    h(0) = 1 (the correlation function is flat at zero separation) and
    h decays like sqrt(dn) exp(-alpha dn) for large spacing.  The value is
    clamped to [0, 1] against rounding overshoot near dn = 0.
    """
    if dn < 0.0:
        raise ValueError(f"spacing must be >= 0, got {dn!r}")
    if dn == 0.0:
        return 1.0
    x = field.alpha * dn
    rho = x * bessel_k1(x) if x < 700.0 else 0.0  # exp(-x) underflow
    return min(max(rho, 0.0), 1.0)


def zeta_from_spacing(field: PhysicalField, dn: float) -> float:
    """Edge dependence of the lattice model matched to spacing dn: g(h(dn))."""
    return zeta_from_rho(rho_from_spacing(field, dn))
