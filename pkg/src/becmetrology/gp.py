"""Grid-based Gross-Pitaevskii machinery.

The solver works on the longitudinal problem after the tight transverse
directions have been integrated out against their Gaussian ground state, so
the effective coupling is g (N-1) eta_T.  One-dimensional longitudinal grids
use FFT split-step propagation (imaginary time for ground states, real time
for the coupled two-mode evolution); 2D and 3D longitudinal traps are solved
for ground states on a radial grid with a Crank-Nicolson kinetic step.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .physconfig import (SI, PhysicalConstants, Species, Superposition,
                         TrapGeometry, coupling_constant, differential_coupling)
from .scaling import Regime, critical_numbers, eta_transverse, unit_sphere_area
from .thomas_fermi import phase_dynamics, tf_profile


class ConvergenceError(RuntimeError):
    """Imaginary-time relaxation did not reach the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StepSizeError(ValueError):
    """Real-time step too coarse for the requested accuracy heuristic."""


@dataclass(frozen=True)
class Grid:
    """Uniform longitudinal grid.

    dimension 1 is a symmetric line [-extent, extent) suitable for FFTs;
    dimensions 2 and 3 are radially symmetric half-lines [0, extent) sampled
    at cell centers.
    """

    dimension: int
    points: int
    extent: float

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError("grid dimension must be 1, 2, or 3")
        if self.points < 64:
            raise ValueError("need at least 64 grid points per axis")
        if self.extent <= 0:
            raise ValueError("grid extent must be positive")

    @property
    def spacing(self) -> float:
        if self.dimension == 1:
            return 2.0 * self.extent / self.points
        return self.extent / self.points

    def coordinates(self) -> np.ndarray:
        if self.dimension == 1:
            return -self.extent + self.spacing * np.arange(self.points)
        return (np.arange(self.points) + 0.5) * self.spacing

    def weights(self) -> np.ndarray:
        """Integration measure per point (includes the angular factor for d > 1)."""
        if self.dimension == 1:
            return np.full(self.points, self.spacing)
        r = self.coordinates()
        return unit_sphere_area(self.dimension) * r ** (self.dimension - 1) * self.spacing


@dataclass
class Field:
    """Complex amplitude on a Grid, unit-normalized for a lossless condensate."""

    grid: Grid
    values: np.ndarray
    n_atoms: float

    def norm(self) -> float:
        return float(np.sum(self.grid.weights() * np.abs(self.values) ** 2))


@dataclass(frozen=True)
class GroundStateResult:
    field: Field
    mu: float               # longitudinal chemical potential
    mu_total: float         # including the transverse zero-point offset
    e0: float               # single-particle kinetic + trap energy (longitudinal)
    eta_longitudinal: float
    eta_n: float            # eta_T * eta_longitudinal
    residual: float
    steps: int


def _potential(geom: TrapGeometry, x: np.ndarray) -> np.ndarray:
    if geom.hard_wall:
        raise ValueError("hard-wall traps are analytic limits; the grid solver "
                         "needs a finite hardness exponent")
    return 0.5 * geom.k * np.abs(x) ** geom.q


def default_grid(geom: TrapGeometry, species: Species, n_atoms: float,
                 points: int = 512, extent_factor: float = 2.0) -> Grid:
    """Grid sized from the TF radius (or the bare width when interactions are weak)."""
    r_char = geom.r0
    if n_atoms > 1:
        crit = critical_numbers(geom, species.a11)
        if n_atoms > crit.n_lower:
            r_char = tf_profile(geom, species, n_atoms, Regime.INTERMEDIATE).r_tilde
    extent = max(extent_factor * r_char, 4.0 * geom.r0)
    return Grid(dimension=geom.d, points=points, extent=extent)


def _energies_1d(psi, V, geff, dx, kx, hb, mass):
    dens = np.abs(psi) ** 2
    grad = np.fft.ifft(1j * kx * np.fft.fft(psi))
    e_kin = hb**2 / (2.0 * mass) * float(np.sum(np.abs(grad) ** 2)) * dx
    e_pot = float(np.sum(V * dens)) * dx
    e_int = 0.5 * geff * float(np.sum(dens**2)) * dx
    return e_kin, e_pot, e_int


_DTAU_LADDER = (1.0, 0.25, 0.0625)  # successive step reductions kill the Trotter bias


def _ground_state_1d(geom, V, geff, grid, tolerance, max_steps, constants):
    hb, mass = constants.hbar, geom.mass
    dx = grid.spacing
    kx = 2.0 * math.pi * np.fft.fftfreq(grid.points, dx)
    # TF-shaped guess where interactions dominate, Gaussian otherwise
    mu_guess = max(float(np.percentile(V, 30)), hb * geom.omega_L)
    psi = np.sqrt(np.maximum(mu_guess - V, 0.0) + 1e-3 * mu_guess).astype(complex)
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * dx)
    e_kin, e_pot, e_int = _energies_1d(psi, V, geff, dx, kx, hb, mass)
    energy = e_kin + e_pot + e_int
    dtau0 = 0.05 * hb / energy
    check_every = 50
    residual = math.inf
    step = 0
    for rung in _DTAU_LADDER:
        dtau = dtau0 * rung
        kin_factor = np.exp(-(hb * kx**2 / (2.0 * mass)) * dtau)
        converged = False
        while not converged:
            for _ in range(check_every):
                psi *= np.exp(-0.5 * (V + geff * np.abs(psi) ** 2) / hb * dtau)
                psi = np.fft.ifft(kin_factor * np.fft.fft(psi))
                psi *= np.exp(-0.5 * (V + geff * np.abs(psi) ** 2) / hb * dtau)
                psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * dx)
            step += check_every
            e_kin, e_pot, e_int = _energies_1d(psi, V, geff, dx, kx, hb, mass)
            new_energy = e_kin + e_pot + e_int
            # relative energy drift per characteristic time hbar/E
            residual = abs(new_energy - energy) * hb / (check_every * dtau * new_energy**2)
            energy = new_energy
            converged = residual < tolerance
            if step >= max_steps and not converged:
                raise ConvergenceError(
                    f"no ground state after {step} imaginary-time steps "
                    f"(residual {residual:.3e})", residual=residual)
    return psi, e_kin + e_pot, e_int, residual, step


def _radial_kinetic_banded(grid: Grid, mass: float, hb: float):
    """Tridiagonal FD form of -(hbar^2/2m) (1/r^(d-1)) d/dr (r^(d-1) d/dr)."""
    d, dr = grid.dimension, grid.spacing
    r = grid.coordinates()
    a_plus = (r + 0.5 * dr) ** (d - 1)
    a_minus = (r - 0.5 * dr) ** (d - 1)
    a_minus[0] = 0.0  # regularity at the origin
    c = hb**2 / (2.0 * mass * dr**2)
    diag = c * (a_plus + a_minus) / r ** (d - 1)
    upper = -c * a_plus[:-1] / r[:-1] ** (d - 1)
    lower = -c * a_minus[1:] / r[1:] ** (d - 1)
    return diag, upper, lower


def _ground_state_radial(geom, V, geff, grid, tolerance, max_steps, constants):
    hb, mass = constants.hbar, geom.mass
    r, w = grid.coordinates(), grid.weights()
    diag, upper, lower = _radial_kinetic_banded(grid, mass, hb)

    def apply_kinetic(psi):
        out = diag * psi
        out[:-1] += upper * psi[1:]
        out[1:] += lower * psi[:-1]
        return out

    mu_guess = max(float(np.percentile(V, 30)), hb * geom.omega_L)
    psi = np.sqrt(np.maximum(mu_guess - V, 0.0) + 1e-3 * mu_guess).astype(complex)
    psi /= math.sqrt(float(np.sum(w * np.abs(psi) ** 2)))

    def energies(psi):
        dens = np.abs(psi) ** 2
        e_kin = float(np.real(np.sum(w * np.conj(psi) * apply_kinetic(psi))))
        e_pot = float(np.sum(w * V * dens))
        e_int = 0.5 * geff * float(np.sum(w * dens**2))
        return e_kin, e_pot, e_int

    e_kin, e_pot, e_int = energies(psi)
    energy = e_kin + e_pot + e_int
    dtau0 = 0.05 * hb / energy
    check_every = 50
    residual = math.inf
    step = 0
    for rung in _DTAU_LADDER:
        dtau = dtau0 * rung
        ab = np.zeros((3, grid.points))
        ab[0, 1:] = 0.5 * dtau / hb * upper
        ab[1, :] = 1.0 + 0.5 * dtau / hb * diag
        ab[2, :-1] = 0.5 * dtau / hb * lower
        converged = False
        while not converged:
            for _ in range(check_every):
                psi *= np.exp(-0.5 * (V + geff * np.abs(psi) ** 2) / hb * dtau)
                rhs = psi - 0.5 * dtau / hb * apply_kinetic(psi)
                psi = solve_banded((1, 1), ab, rhs)
                psi *= np.exp(-0.5 * (V + geff * np.abs(psi) ** 2) / hb * dtau)
                psi /= math.sqrt(float(np.sum(w * np.abs(psi) ** 2)))
            step += check_every
            e_kin, e_pot, e_int = energies(psi)
            new_energy = e_kin + e_pot + e_int
            residual = abs(new_energy - energy) * hb / (check_every * dtau * new_energy**2)
            energy = new_energy
            converged = residual < tolerance
            if step >= max_steps and not converged:
                raise ConvergenceError(
                    f"no ground state after {step} imaginary-time steps "
                    f"(residual {residual:.3e})", residual=residual)
    return psi, e_kin + e_pot, e_int, residual, step


def ground_state(geom: TrapGeometry, species: Species, n_atoms: float,
                 grid: Grid | None = None, tolerance: float = 1e-10,
                 max_steps: int = 400_000,
                 constants: PhysicalConstants = SI) -> GroundStateResult:
    """Imaginary-time ground state of the reduced longitudinal GP equation.

    The state is renormalized after every step; convergence is declared when
    the relative energy drift per characteristic time hbar/E falls below
    tolerance.  N = 1 turns the interaction off and recovers the bare trap
    ground state.
    """
    g = coupling_constant(species.a11, species.mass, constants)
    geff = g * (n_atoms - 1.0) * eta_transverse(geom)
    if geff < 0:
        raise ValueError("attractive interactions are not supported")
    if grid is None:
        grid = default_grid(geom, species, n_atoms)
    if grid.dimension != geom.d:
        raise ValueError("grid dimension does not match the trap geometry")
    x = grid.coordinates()
    V = _potential(geom, x)

    if n_atoms > 1:
        crit = critical_numbers(geom, species.a11)
        if n_atoms > crit.n_lower:
            r_tf = tf_profile(geom, species, n_atoms, Regime.INTERMEDIATE,
                              constants=constants).r_tilde
            if grid.extent < 1.5 * r_tf:
                warnings.warn("grid extent is below 1.5x the TF radius; the cloud "
                              "may be clipped", stacklevel=2)
            mu_tf = 0.5 * geom.k * r_tf**geom.q
            healing = constants.hbar / math.sqrt(2.0 * geom.mass * mu_tf)
            if grid.spacing > healing:
                warnings.warn("grid spacing does not resolve the healing length",
                              stacklevel=2)

    if geom.d == 1:
        psi, e0, e_int, residual, steps = _ground_state_1d(
            geom, V, geff, grid, tolerance, max_steps, constants)
    else:
        psi, e0, e_int, residual, steps = _ground_state_radial(
            geom, V, geff, grid, tolerance, max_steps, constants)

    w = grid.weights()
    dens = np.abs(psi) ** 2
    eta_l = float(np.sum(w * dens**2))
    eta_t = eta_transverse(geom)
    mu = e0 + 2.0 * e_int
    mu_total = mu + geom.transverse_dimensions * constants.hbar * geom.omega_T / 2.0
    return GroundStateResult(field=Field(grid=grid, values=psi, n_atoms=n_atoms),
                             mu=mu, mu_total=mu_total, e0=e0,
                             eta_longitudinal=eta_l, eta_n=eta_t * eta_l,
                             residual=residual, steps=steps)


def eta_sweep(geom: TrapGeometry, species: Species, n_list,
              points: int = 512, tolerance: float = 1e-10,
              constants: PhysicalConstants = SI) -> list[tuple[float, float, float]]:
    """Ground-state eta_N over an ascending list of atom numbers.

    Returns (N, eta_N, local log-log slope) rows; the slope is a centered
    difference of ln(eta) against ln(N-1) (nan at the ends).
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("atom numbers must be strictly ascending")
    etas = []
    for n in n_list:
        grid = default_grid(geom, species, n, points=points)
        etas.append(ground_state(geom, species, n, grid, tolerance,
                                 constants=constants).eta_n)
    rows = []
    for i, (n, eta) in enumerate(zip(n_list, etas)):
        if 0 < i < len(n_list) - 1:
            slope = (math.log(etas[i + 1]) - math.log(etas[i - 1])) / \
                    (math.log(n_list[i + 1] - 1.0) - math.log(n_list[i - 1] - 1.0))
        else:
            slope = math.nan
        rows.append((n, eta, slope))
    return rows


@dataclass(frozen=True)
class EvolutionRecord:
    times: np.ndarray
    overlap: np.ndarray   # complex <psi_2|psi_1>
    p1: np.ndarray
    p2: np.ndarray
    norm1: np.ndarray
    norm2: np.ndarray
    final_fields: tuple[np.ndarray, np.ndarray] | None = None


def evolve_two_mode(initial: GroundStateResult | Field, sup: Superposition,
                    species: Species, geom: TrapGeometry, t_final: float,
                    steps: int, loss: bool = False, record_every: int = 1,
                    constants: PhysicalConstants = SI) -> EvolutionRecord:
    """Coupled two-mode evolution from a shared initial ground state.

    Both modes start in the supplied single-mode ground state (computed with
    the in-state coupling); they then propagate under the coupled reduced GP
    equations with population weights c1^2, c2^2.  With loss on, the
    spin-exchange non-Hermitian potentials deplete the norms.
    """
    field = initial.field if isinstance(initial, GroundStateResult) else initial
    grid, n_atoms = field.grid, field.n_atoms
    if grid.dimension != 1 or geom.d != 1:
        raise ValueError("two-mode evolution is implemented for 1D longitudinal grids")
    if steps < 1 or t_final <= 0:
        raise ValueError("need a positive final time and at least one step")
    hb, mass = constants.hbar, geom.mass
    x, dx = grid.coordinates(), grid.spacing
    kx = 2.0 * math.pi * np.fft.fftfreq(grid.points, dx)
    V = _potential(geom, x)
    eta_t = eta_transverse(geom)
    gmat = np.array([[coupling_constant(species.a11, mass, constants),
                      coupling_constant(species.a12, mass, constants)],
                     [coupling_constant(species.a12, mass, constants),
                      coupling_constant(species.a22, mass, constants)]])
    gmat *= (n_atoms - 1.0) * eta_t
    weights = np.array([sup.c1**2, sup.c2**2])
    loss12 = species.gamma12_loss * (n_atoms - 1.0) * eta_t
    loss22 = species.gamma22_loss * (n_atoms - 1.0) * eta_t

    dt = t_final / steps
    dens0 = np.abs(field.values) ** 2
    occupied = dens0 > 1e-6 * dens0.max()
    rate_scale = float(np.max((V[occupied] + gmat.max() * dens0[occupied]) / hb))
    if dt * rate_scale > 0.1:
        needed = int(math.ceil(t_final * rate_scale / 0.1))
        raise StepSizeError(f"step too coarse: phase advance per step is "
                            f"{dt * rate_scale:.2f} rad; use at least {needed} steps")

    kin_factor = np.exp(-1j * (hb * kx**2 / (2.0 * mass)) * dt)
    psi1 = field.values.astype(complex).copy()
    psi2 = psi1.copy()

    def half_potential(psi1, psi2):
        d1, d2 = np.abs(psi1) ** 2, np.abs(psi2) ** 2
        v1 = V + gmat[0, 0] * weights[0] * d1 + gmat[0, 1] * weights[1] * d2
        v2 = V + gmat[1, 0] * weights[0] * d1 + gmat[1, 1] * weights[1] * d2
        f1 = np.exp(-0.5j * v1 / hb * dt)
        f2 = np.exp(-0.5j * v2 / hb * dt)
        if loss:
            f1 = f1 * np.exp(-0.25 * dt * loss12 * weights[1] * d2)
            f2 = f2 * np.exp(-0.25 * dt * (loss12 * weights[0] * d1
                                           + loss22 * weights[1] * d2))
        return f1 * psi1, f2 * psi2

    def snapshot(t):
        n1 = float(np.sum(np.abs(psi1) ** 2)) * dx
        n2 = float(np.sum(np.abs(psi2) ** 2)) * dx
        ov = complex(np.vdot(psi2, psi1) * dx)
        fringe = 2.0 * sup.c1 * sup.c2 * ov.imag
        p1 = 0.5 * (weights[0] * n1 + weights[1] * n2) - 0.5 * fringe
        p2 = 0.5 * (weights[0] * n1 + weights[1] * n2) + 0.5 * fringe
        times.append(t)
        overlaps.append(ov)
        p1s.append(p1)
        p2s.append(p2)
        norm1s.append(n1)
        norm2s.append(n2)

    times, overlaps, p1s, p2s, norm1s, norm2s = [], [], [], [], [], []
    snapshot(0.0)
    for step in range(1, steps + 1):
        psi1, psi2 = half_potential(psi1, psi2)
        psi1 = np.fft.ifft(kin_factor * np.fft.fft(psi1))
        psi2 = np.fft.ifft(kin_factor * np.fft.fft(psi2))
        psi1, psi2 = half_potential(psi1, psi2)
        if step % record_every == 0 or step == steps:
            snapshot(step * dt)
    record = EvolutionRecord(times=np.array(times), overlap=np.array(overlaps),
                             p1=np.array(p1s), p2=np.array(p2s),
                             norm1=np.array(norm1s), norm2=np.array(norm2s),
                             final_fields=(psi1, psi2))
    if not loss:
        drift = max(float(np.max(np.abs(record.norm1 - 1.0))),
                    float(np.max(np.abs(record.norm2 - 1.0))))
        if drift > 1e-6:
            raise RuntimeError(f"lossless evolution is unstable: norm drift {drift:.3e}")
    return record


@dataclass(frozen=True)
class LossBudget:
    gamma: float     # integrated spin-exchange decay rate (1/s)
    omega_N: float   # integrated relative-phase rate (rad/s)
    ratio: float     # gamma / |omega_N|


def loss_budget(species: Species, geom: TrapGeometry, n_atoms: float,
                sup: Superposition,
                constants: PhysicalConstants = SI) -> LossBudget:
    """Spin-exchange decay rate against the phase-accumulation rate.

    The ratio hbar (Gamma12 + Gamma22 c2^2) / (2 Delta-g) is independent of the
    atom number and of every trap parameter; the common eta_N cancels.
    """
    delta_g = differential_coupling(species, sup, constants)
    if delta_g == 0.0:
        raise ValueError("no relative-phase signal: the differential coupling "
                         "vanishes for this species and superposition")
    profile = tf_profile(geom, species, n_atoms, Regime.INTERMEDIATE,
                         constants=constants)
    gamma = (n_atoms - 1.0) * profile.eta_N * \
        (species.gamma12_loss + species.gamma22_loss * sup.c2**2) / 2.0
    omega = phase_dynamics(geom, species, n_atoms, sup, constants).omega_N
    return LossBudget(gamma=gamma, omega_N=omega, ratio=gamma / abs(omega))


# --- field snapshots -------------------------------------------------------
#
# Self-describing text format: four header lines (dimension, points, spacing,
# atom number) then one "re im" pair per grid point.

def save_field(field: Field, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# dimension: {field.grid.dimension}\n")
        fh.write(f"# points: {field.grid.points}\n")
        fh.write(f"# spacing: {float(field.grid.spacing)!r}\n")
        fh.write(f"# n_atoms: {float(field.n_atoms)!r}\n")
        for v in field.values:
            fh.write(f"{float(v.real)!r} {float(v.imag)!r}\n")


def load_field(path) -> Field:
    header = {}
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                header[key.strip()] = val.strip()
            else:
                re_part, im_part = line.split()
                values.append(complex(float(re_part), float(im_part)))
    dimension = int(header["dimension"])
    points = int(header["points"])
    spacing = float(header["spacing"])
    if len(values) != points:
        raise ValueError("field payload does not match the declared point count")
    extent = 0.5 * spacing * points if dimension == 1 else spacing * points
    grid = Grid(dimension=dimension, points=points, extent=extent)
    return Field(grid=grid, values=np.array(values), n_atoms=float(header["n_atoms"]))
