"""Physical constants, atomic species data, trap geometry, and derived couplings.

Everything downstream works in SI units.  Configuration files and presets
accept the experimentalist's units (nm, um, u, cm^3/s) and convert here,
at the boundary.
"""

from __future__ import annotations

import configparser
import math
import warnings
from dataclasses import dataclass

from scipy.constants import atomic_mass, hbar as _hbar_si

NM = 1e-9
UM = 1e-6
CM3 = 1e-6  # cm^3 in m^3


@dataclass(frozen=True)
class PhysicalConstants:
    """SI values of hbar and the atomic mass unit."""

    hbar: float = _hbar_si              # J s
    atomic_mass_unit: float = atomic_mass  # kg

    def __post_init__(self):
        if self.hbar <= 0 or self.atomic_mass_unit <= 0:
            raise ValueError("physical constants must be strictly positive")


SI = PhysicalConstants()


@dataclass(frozen=True)
class Species:
    """Atomic species: mass, s-wave scattering lengths, two-body loss constants.

    Scattering lengths are for the in-state, cross-state, and second-state
    elastic channels; loss constants are inelastic spin-exchange rates.
    All SI (kg, m, m^3/s).
    """

    mass: float
    a11: float
    a22: float
    a12: float
    gamma12_loss: float = 0.0
    gamma22_loss: float = 0.0

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if min(self.a11, self.a22, self.a12) <= 0:
            raise ValueError("scattering lengths must be positive")
        if self.gamma12_loss < 0 or self.gamma22_loss < 0:
            raise ValueError("loss constants must be nonnegative")


def rb87() -> Species:
    """Rubidium-87 with the two trapped hyperfine levels used in two-mode work.

    The channel ratios are a22 : a12 : a11 = 0.97 : 1 : 1.03 anchored at
    a11 = 5.31 nm, so a12 = a11/1.03 and a22 = 0.97 a12.
    """
    a11 = 5.31 * NM
    a12 = a11 / 1.03
    a22 = 0.97 * a12
    return Species(
        mass=86.909180 * atomic_mass,
        a11=a11,
        a22=a22,
        a12=a12,
        gamma12_loss=0.780e-13 * CM3,
        gamma22_loss=1.194e-13 * CM3,
    )


def typical_species() -> Species:
    """Generic alkali used for order-of-magnitude estimates: a = 10 nm, no loss."""
    a = 10.0 * NM
    return Species(mass=86.909180 * atomic_mass, a11=a, a22=a, a12=a)


SPECIES_PRESETS = {"rb87": rb87, "typical": typical_species}


def coupling_constant(a: float, mass: float, constants: PhysicalConstants = SI) -> float:
    """Mean-field coupling g = 4 pi hbar^2 a / m for scattering length a."""
    if a <= 0 or mass <= 0:
        raise ValueError("scattering length and mass must be positive")
    return 4.0 * math.pi * constants.hbar**2 * a / mass


def josephson_couplings(species: Species, constants: PhysicalConstants = SI) -> tuple[float, float]:
    """Two-mode couplings (gamma1, gamma2) built from the channel couplings.

    gamma1 = (g11 - g22)/2 multiplies the collective population difference,
    gamma2 = (g11 + g22)/2 - g12 multiplies its square.
    """
    g11 = coupling_constant(species.a11, species.mass, constants)
    g22 = coupling_constant(species.a22, species.mass, constants)
    g12 = coupling_constant(species.a12, species.mass, constants)
    return 0.5 * (g11 - g22), 0.5 * (g11 + g22) - g12


@dataclass(frozen=True)
class Superposition:
    """Real two-mode amplitudes (c1, c2) with c1^2 + c2^2 = 1."""

    c1: float
    c2: float

    def __post_init__(self):
        if abs(self.c1**2 + self.c2**2 - 1.0) > 1e-12:
            raise ValueError("amplitudes must satisfy c1^2 + c2^2 = 1")

    @classmethod
    def equal(cls) -> "Superposition":
        return cls(1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))

    @classmethod
    def quadratic_optimal(cls) -> "Superposition":
        """Input that is optimal for a pure quadratic collective coupling."""
        return cls(math.cos(math.pi / 8.0), math.sin(math.pi / 8.0))


def differential_coupling(species: Species, sup: Superposition,
                          constants: PhysicalConstants = SI) -> float:
    """Density-weighted coupling difference between the two modes.

    Delta g = c1^2 (g11 - g12) - c2^2 (g22 - g12) = gamma1 + (c1^2 - c2^2) gamma2.
    """
    gamma1, gamma2 = josephson_couplings(species, constants)
    return gamma1 + (sup.c1**2 - sup.c2**2) * gamma2


@dataclass(frozen=True)
class TrapGeometry:
    """Power-law longitudinal trap in d dimensions plus tight transverse harmonic trap.

    q is the longitudinal hardness exponent; q = inf marks a hard-walled trap,
    in which case the stiffness k is None and formulas take analytic limits.
    Lengths rho0 (transverse half-width) and r0 (bare longitudinal half-width)
    determine the strengths through the mass used at construction.
    """

    d: int
    q: float
    rho0: float
    r0: float
    mass: float
    k: float | None
    omega_T: float
    omega_L: float

    @property
    def transverse_dimensions(self) -> int:
        return 3 - self.d

    @property
    def hard_wall(self) -> bool:
        return math.isinf(self.q)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("longitudinal dimension d must be 1, 2, or 3")
        if not (self.q >= 1.0):
            raise ValueError("hardness exponent q must be >= 1 (or inf)")
        if self.rho0 <= 0 or self.r0 <= 0 or self.mass <= 0:
            raise ValueError("lengths and mass must be positive")
        if self.r0 <= self.rho0:
            warnings.warn(
                "r0 <= rho0: the loose/tight trap separation assumed by the "
                "scaling formulas is violated", stacklevel=3)


def trap_from_lengths(d: int, q: float, rho0: float, r0: float, mass: float,
                      constants: PhysicalConstants = SI) -> TrapGeometry:
    """Build a TrapGeometry from its two bare half-widths.

    rho0^2 = hbar/(2 m omega_T), r0^(q+2) = hbar^2/(m k), omega_L = hbar/(m r0^2).
    """
    hb = constants.hbar
    omega_T = hb / (2.0 * mass * rho0**2)
    omega_L = hb / (mass * r0**2)
    k = None if math.isinf(q) else hb**2 / (mass * r0 ** (q + 2.0))
    return TrapGeometry(d=d, q=float(q), rho0=rho0, r0=r0, mass=mass,
                        k=k, omega_T=omega_T, omega_L=omega_L)


def trap_from_strengths(d: int, q: float, k: float, omega_T: float, mass: float,
                        constants: PhysicalConstants = SI) -> TrapGeometry:
    """Inverse construction from the stiffness k and transverse frequency."""
    if math.isinf(q):
        raise ValueError("a hard-wall trap has no finite stiffness; use trap_from_lengths")
    if k <= 0 or omega_T <= 0:
        raise ValueError("trap strengths must be positive")
    hb = constants.hbar
    rho0 = math.sqrt(hb / (2.0 * mass * omega_T))
    r0 = (hb**2 / (mass * k)) ** (1.0 / (q + 2.0))
    return trap_from_lengths(d, q, rho0, r0, mass, constants)


def typical_trap(d: int, q: float = 2.0, mass: float | None = None,
                 constants: PhysicalConstants = SI) -> TrapGeometry:
    """The workhorse geometry for estimates: rho0 = 1 um, r0 = 100 um."""
    if mass is None:
        mass = typical_species().mass
    return trap_from_lengths(d, q, 1.0 * UM, 100.0 * UM, mass, constants)


# --- configuration files ------------------------------------------------
#
# Key-value text files (configparser syntax).  Recognized keys:
#   [species] preset | mass_u, a11_nm, a22_nm, a12_nm,
#             loss12_cm3_per_s, loss22_cm3_per_s
#   [trap]    d, q ("inf" or "hard" for a hard wall), rho0_um, r0_um

def _getfloat(section, key, default=None):
    if key in section:
        return float(section[key])
    if default is None:
        raise ValueError(f"missing configuration key '{key}'")
    return default


def species_from_mapping(section) -> Species:
    if "preset" in section:
        name = section["preset"].strip().lower()
        if name not in SPECIES_PRESETS:
            raise ValueError(f"unknown species preset '{name}'")
        return SPECIES_PRESETS[name]()
    return Species(
        mass=_getfloat(section, "mass_u") * atomic_mass,
        a11=_getfloat(section, "a11_nm") * NM,
        a22=_getfloat(section, "a22_nm") * NM,
        a12=_getfloat(section, "a12_nm") * NM,
        gamma12_loss=_getfloat(section, "loss12_cm3_per_s", 0.0) * CM3,
        gamma22_loss=_getfloat(section, "loss22_cm3_per_s", 0.0) * CM3,
    )


def trap_from_mapping(section, mass: float,
                      constants: PhysicalConstants = SI) -> TrapGeometry:
    qtext = str(section.get("q", "2")).strip().lower()
    q = math.inf if qtext in ("inf", "hard", "hard_wall") else float(qtext)
    return trap_from_lengths(
        d=int(section.get("d", 1)),
        q=q,
        rho0=_getfloat(section, "rho0_um", 1.0) * UM,
        r0=_getfloat(section, "r0_um", 100.0) * UM,
        mass=mass,
        constants=constants,
    )


def load_species(path) -> Species:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ValueError(f"cannot read configuration file {path}")
    if "species" not in cp:
        raise ValueError("configuration file has no [species] section")
    return species_from_mapping(cp["species"])


def load_trap(path, mass: float | None = None) -> TrapGeometry:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ValueError(f"cannot read configuration file {path}")
    if "trap" not in cp:
        raise ValueError("configuration file has no [trap] section")
    if mass is None:
        mass = species_from_mapping(cp["species"]).mass if "species" in cp \
            else typical_species().mass
    return trap_from_mapping(cp["trap"], mass)
