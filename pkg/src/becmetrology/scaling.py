"""Critical atom numbers, cloud radii, inverse-volume scaling, and sensitivity exponents.

Closed-form order-of-magnitude relations for a condensate loosely trapped in d
longitudinal dimensions (power-law potential, hardness q) and tightly trapped
in D = 3 - d transverse dimensions.  All "-1" offsets in atom numbers are kept
exactly; the 1D lower critical number is as small as 2, so they matter.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .physconfig import TrapGeometry

UNIT_SPHERE_VOLUME = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


def unit_sphere_volume(d: int) -> float:
    return UNIT_SPHERE_VOLUME[d]


def unit_sphere_area(d: int) -> float:
    """Area S_{d-1} of the unit sphere bounding a d-ball (= d * V_d)."""
    return d * UNIT_SPHERE_VOLUME[d]


def beta_factor(d: int) -> float:
    """Geometric factor V_d / (2 (4 pi)^((d-1)/2)); 1, sqrt(pi)/4, 1/6 for d = 1, 2, 3."""
    return UNIT_SPHERE_VOLUME[d] / (2.0 * (4.0 * math.pi) ** ((d - 1) / 2.0))


@dataclass(frozen=True)
class GeometryFactors:
    v_d: float
    s_dminus1: float
    beta_d: float


def geometry_factors(d: int) -> GeometryFactors:
    return GeometryFactors(unit_sphere_volume(d), unit_sphere_area(d), beta_factor(d))


@dataclass(frozen=True)
class CriticalNumbers:
    """Atom numbers at which mean-field repulsion starts to spread the cloud.

    n_lower marks the onset of longitudinal spreading, n_upper the onset of
    transverse spreading.  n_upper is None for d = 3 (no transverse dimensions).
    """

    n_lower: float
    n_upper: float | None


def _upper_exponent(d: int, q: float) -> float:
    # d(q+2)/q, with the hard-wall limit d
    return float(d) if math.isinf(q) else d * (q + 2.0) / q


def critical_numbers(geom: TrapGeometry, a: float) -> CriticalNumbers:
    if a <= 0:
        raise ValueError("scattering length must be positive")
    d, q = geom.d, geom.q
    beta = beta_factor(d)
    n_lower = 1.0 + beta * (geom.r0 / a) * (geom.rho0 / geom.r0) ** geom.transverse_dimensions
    if d == 3:
        return CriticalNumbers(n_lower=n_lower, n_upper=None)
    n_upper = 1.0 + beta * (geom.rho0 / a) * (geom.r0 / geom.rho0) ** _upper_exponent(d, q)
    return CriticalNumbers(n_lower=n_lower, n_upper=n_upper)


class Regime(enum.Enum):
    BARE = "bare"
    INTERMEDIATE = "intermediate"
    FULL_TF = "full_TF"


def classify_regime(geom: TrapGeometry, a: float, n_atoms: float,
                    warn_band: float = 10.0) -> Regime:
    """Label the atom number: bare below N_L, full TF above N_T, else intermediate.

    The underlying scalings hold only well away from the boundaries, so a
    warning is issued within a factor warn_band of either critical number.
    """
    crit = critical_numbers(geom, a)
    near = []
    if crit.n_lower / warn_band < n_atoms < crit.n_lower * warn_band:
        near.append("N_L")
    if crit.n_upper is not None and crit.n_upper / warn_band < n_atoms < crit.n_upper * warn_band:
        near.append("N_T")
    if near:
        warnings.warn(f"atom number {n_atoms:g} is within a factor {warn_band:g} "
                      f"of {' and '.join(near)}; regime label is approximate",
                      stacklevel=2)
    if n_atoms <= crit.n_lower:
        return Regime.BARE
    if crit.n_upper is None or n_atoms <= crit.n_upper:
        return Regime.INTERMEDIATE
    return Regime.FULL_TF


def longitudinal_radius(geom: TrapGeometry, a: float, n_atoms: float) -> float:
    """Longitudinal half-width r_N in the intermediate regime.

    r_N/r0 = ((N-1)/(N_L-1))^(1/(d+q)); for a hard wall the cloud does not spread.
    """
    if n_atoms < 1:
        raise ValueError("atom number must be >= 1")
    if geom.hard_wall:
        return geom.r0
    crit = critical_numbers(geom, a)
    y = (n_atoms - 1.0) / (crit.n_lower - 1.0)
    return geom.r0 * y ** (1.0 / (geom.d + geom.q))


def radii_full(geom: TrapGeometry, a: float, n_atoms: float) -> tuple[float, float]:
    """(r_N, rho_N) in the regime N >> N_T where the cloud spreads in all directions."""
    d, q, D = geom.d, geom.q, geom.transverse_dimensions
    if d == 3:
        raise ValueError("the full TF regime radii require transverse dimensions (d < 3)")
    if n_atoms < 1:
        raise ValueError("atom number must be >= 1")
    crit = critical_numbers(geom, a)
    y_t = (n_atoms - 1.0) / (crit.n_upper - 1.0)
    two_d_over_q = 0.0 if math.isinf(q) else 2.0 * d / q
    expo = 5.0 - d + two_d_over_q
    prefactor = 4.0 * (4.0 * math.pi) ** (D / 2.0) * 2.0**two_d_over_q / UNIT_SPHERE_VOLUME[D]
    rho_n = geom.rho0 * (prefactor * y_t) ** (1.0 / expo)
    if geom.hard_wall:
        r_n = geom.r0
    else:
        r_n = geom.r0 * ((geom.r0 / (2.0 * geom.rho0)) * (rho_n / geom.rho0)) ** (2.0 / q)
    return r_n, rho_n


def eta_transverse(geom: TrapGeometry) -> float:
    """Inverse transverse area (4 pi)^(-D/2) rho0^(-D) of the tight Gaussian ground state."""
    D = geom.transverse_dimensions
    return (4.0 * math.pi) ** (-D / 2.0) * geom.rho0 ** (-D)


def eta_estimate(geom: TrapGeometry, a: float, n_atoms: float) -> float:
    """Inverse occupied volume eta_N (m^-3), piecewise power law continuous at both
    critical numbers.

    The full-regime branch is a scaling law with an undetermined prefactor; it is
    anchored to match the intermediate branch at N_T, so the estimate never jumps.
    Exact prefactors live in the Thomas-Fermi module.
    """
    d, q = geom.d, geom.q
    crit = critical_numbers(geom, a)
    eta0 = eta_transverse(geom) / (UNIT_SPHERE_VOLUME[d] * geom.r0**d)
    if n_atoms <= crit.n_lower:
        return eta0
    int_expo = 0.0 if math.isinf(q) else d / (d + q)
    y = (n_atoms - 1.0) / (crit.n_lower - 1.0)
    if crit.n_upper is None or n_atoms <= crit.n_upper:
        return eta0 * y ** (-int_expo)
    y_t = (crit.n_upper - 1.0) / (crit.n_lower - 1.0)
    eta_at_nt = eta0 * y_t ** (-int_expo)
    two_d_over_q = 0.0 if math.isinf(q) else 2.0 * d / q
    full_expo = (3.0 - d + two_d_over_q) / (5.0 - d + two_d_over_q)
    return eta_at_nt * ((n_atoms - 1.0) / (crit.n_upper - 1.0)) ** (-full_expo)


def _as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, float):
        if math.isinf(q):
            raise ValueError
        return Fraction(q).limit_denominator(10**6)
    raise TypeError(f"unsupported exponent type {type(q)!r}")


def scaling_exponent(d: int, q, regime: Regime) -> Fraction:
    """Sensitivity exponent xi in delta-gamma ~ 1/N^xi, as an exact rational.

    bare: 3/2.  intermediate: (d+3q)/(2(d+q)).  full: 3/2 - (3-d+2d/q)/(5-d+2d/q).
    Hard wall (q = inf): 3/2, 3/2, and 3/2 - (3-d)/(5-d) respectively.
    """
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2, or 3")
    if regime == Regime.BARE:
        return Fraction(3, 2)
    hard = isinstance(q, float) and math.isinf(q)
    if regime == Regime.INTERMEDIATE:
        if hard:
            return Fraction(3, 2)
        qf = _as_fraction(q)
        return (d + 3 * qf) / (2 * (d + qf))
    if regime == Regime.FULL_TF:
        if d == 3:
            raise ValueError("no full TF regime for d = 3")
        two_d_over_q = Fraction(0) if hard else 2 * d / _as_fraction(q)
        return Fraction(3, 2) - (3 - d + two_d_over_q) / (5 - d + two_d_over_q)
    raise ValueError(f"unknown regime {regime!r}")


def fig1_table(q_values) -> list[tuple[float, Fraction, Fraction, Fraction]]:
    """Intermediate-regime exponent xi(q) for 1D, 2D, and 3D traps.

    Each row is (q, xi_1D, xi_2D, xi_3D).  xi increases with q, crosses 1
    exactly at q = d, and tends to 3/2 in the hard-wall limit.
    """
    rows = []
    for q in q_values:
        if not (isinstance(q, float) and math.isinf(q)) and q < 1:
            raise ValueError("hardness exponents must be >= 1")
        rows.append((float(q),
                     scaling_exponent(1, q, Regime.INTERMEDIATE),
                     scaling_exponent(2, q, Regime.INTERMEDIATE),
                     scaling_exponent(3, q, Regime.INTERMEDIATE)))
    return rows
