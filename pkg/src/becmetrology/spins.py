"""Exact collective-spin simulation and quantum parameter-estimation bounds.

N symmetric qubits live in the (N+1)-dimensional ladder of collective J_z
eigenvalues m = -N/2 ... N/2, which makes exact simulation cheap out to very
large N.  Everything here works directly on that amplitude vector: state
preparation, rotations, diagonal evolutions, moments, Fisher information,
and the Cramer-Rao / quantum-noise-limit / Heisenberg bounds.

Couplings are expressed as angular rates (the energy divided by hbar), so a
coupling gamma evolved for time t advances phases by gamma*t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .physconfig import Superposition

HamiltonianKind = Literal["linear_Jz", "quadratic_Jz2", "enhanced_NJz"]


@dataclass(frozen=True)
class DickeState:
    """Symmetric N-qubit state: complex amplitudes over m = -N/2 ... N/2."""

    n_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("need at least one atom")
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.n_atoms + 1,):
            raise ValueError(f"amplitude vector must have length N+1 = {self.n_atoms + 1}")
        if abs(np.vdot(amp, amp).real - 1.0) > 1e-10:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(self.n_atoms + 1) - self.n_atoms / 2.0


@dataclass(frozen=True)
class CollectiveHamiltonian:
    """Generator kind for H = gamma * h, with h one of J_z, J_z^2, or N J_z."""

    kind: HamiltonianKind
    gamma: float | None = None


@dataclass(frozen=True)
class SpectrumBound:
    """Eigenvalue extremes of the per-qubit coupling and the coupling order."""

    Lambda: float
    lam: float
    k_body: int = 1

    def __post_init__(self):
        if self.Lambda < self.lam:
            raise ValueError("Lambda must be >= lam")
        if self.k_body < 1:
            raise ValueError("k_body must be a positive integer")


@dataclass(frozen=True)
class SensitivityResult:
    delta_gamma: float
    scaling_exponent_estimate: float | None = None


def generator_eigenvalues(ham: CollectiveHamiltonian, n_atoms: int) -> np.ndarray:
    """Diagonal of the coupling h in the Dicke basis (units of the per-qubit scale)."""
    m = np.arange(n_atoms + 1) - n_atoms / 2.0
    if ham.kind == "linear_Jz":
        return m
    if ham.kind == "quadratic_Jz2":
        return m**2
    if ham.kind == "enhanced_NJz":
        return n_atoms * m
    raise ValueError(f"unknown Hamiltonian kind {ham.kind!r}")


def prepare_product(n_atoms: int, sup: Superposition) -> DickeState:
    """Product state (c1|0> + c2|1>)^N expanded over the collective ladder.

    Binomial amplitudes are assembled in log space so this stays finite for
    N far beyond the overflow point of the raw binomial coefficients.
    """
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    n_up = np.arange(n_atoms + 1)  # atoms in |0>, carrying c1
    log_binom = 0.5 * (gammaln(n_atoms + 1) - gammaln(n_up + 1) - gammaln(n_atoms - n_up + 1))
    with np.errstate(divide="ignore"):
        log_c1 = np.where(n_up > 0, n_up * np.log(np.abs(sup.c1) + 1e-300), 0.0)
        log_c2 = np.where(n_atoms - n_up > 0,
                          (n_atoms - n_up) * np.log(np.abs(sup.c2) + 1e-300), 0.0)
    amp = np.exp(log_binom + log_c1 + log_c2)
    amp *= np.sign(sup.c1) ** n_up * np.sign(sup.c2) ** (n_atoms - n_up)
    amp = amp.astype(complex)
    amp /= np.linalg.norm(amp)
    return DickeState(n_atoms, amp)


def cat_state(n_atoms: int) -> DickeState:
    """Equal superposition of the two extremal ladder states (all-up + all-down)."""
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    amp = np.zeros(n_atoms + 1, dtype=complex)
    amp[0] = amp[-1] = 1.0 / math.sqrt(2.0)
    return DickeState(n_atoms, amp)


def _ladder_coeffs(n_atoms: int) -> np.ndarray:
    # raising coefficient from index i (m = i - N/2) to i+1
    j = n_atoms / 2.0
    m = np.arange(n_atoms) - j
    return np.sqrt((j - m) * (j + m + 1.0))


def _apply_component(values: np.ndarray, n_atoms: int, component: str) -> np.ndarray:
    m = np.arange(n_atoms + 1) - n_atoms / 2.0
    if component == "z":
        return m * values
    c = _ladder_coeffs(n_atoms)
    up = np.zeros_like(values)
    dn = np.zeros_like(values)
    up[1:] = c * values[:-1]   # J_+
    dn[:-1] = c * values[1:]   # J_-
    if component == "x":
        return 0.5 * (up + dn)
    if component == "y":
        return (up - dn) / 2.0j
    raise ValueError(f"unknown spin component {component!r}")


def expectation(state: DickeState, component: str) -> tuple[float, float]:
    """Exact (mean, variance) of a collective spin component."""
    av = _apply_component(state.amplitudes, state.n_atoms, component)
    mean = np.vdot(state.amplitudes, av).real
    second = np.vdot(av, av).real
    return mean, max(second - mean**2, 0.0)


@lru_cache(maxsize=8)
def _jx_eigensystem(n_atoms: int):
    off = 0.5 * _ladder_coeffs(n_atoms)
    return eigh_tridiagonal(np.zeros(n_atoms + 1), off)


def _rotate_values(values: np.ndarray, n_atoms: int, axis: str, angle: float) -> np.ndarray:
    m = np.arange(n_atoms + 1) - n_atoms / 2.0
    if axis == "z":
        return np.exp(-1j * angle * m) * values
    w, v = _jx_eigensystem(n_atoms)
    if axis == "x":
        return v @ (np.exp(-1j * angle * w) * (v.T @ values))
    if axis == "y":
        # J_y = R J_x R^dagger with R the quarter turn about z
        quarter = np.exp(-1j * (math.pi / 2.0) * m)
        inner = np.conj(quarter) * values
        inner = v @ (np.exp(-1j * angle * w) * (v.T @ inner))
        return quarter * inner
    raise ValueError(f"unknown rotation axis {axis!r}")


def rotate(state: DickeState, axis: str, angle: float) -> DickeState:
    """Apply exp(-i angle J_axis) in the spin-N/2 representation.

    z-rotations are diagonal; x and y go through a cached dense eigensystem of
    the ladder coupling, so their memory cost scales as (N+1)^2.
    """
    return DickeState(state.n_atoms, _rotate_values(state.amplitudes, state.n_atoms, axis, angle))


def evolve(state: DickeState, ham: CollectiveHamiltonian, gamma: float | None,
           t: float) -> DickeState:
    """Evolve under H = gamma*h for time t (diagonal phases in the Dicke basis)."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    if gamma is None:
        gamma = ham.gamma
    if gamma is None:
        raise ValueError("no coupling value given")
    h = generator_eigenvalues(ham, state.n_atoms)
    return DickeState(state.n_atoms, np.exp(-1j * gamma * t * h) * state.amplitudes)


def qfi_pure(state: DickeState, generator: CollectiveHamiltonian, t: float) -> float:
    """Quantum Fisher information 4 <Delta^2 K> of a pure state, K = t h."""
    h = generator_eigenvalues(generator, state.n_atoms)
    p = np.abs(state.amplitudes) ** 2
    mean = float(np.dot(p, h))
    var = float(np.dot(p, h**2)) - mean**2
    return 4.0 * t**2 * max(var, 0.0)


def single_qubit_purity(state: DickeState) -> float:
    """Purity of the one-atom reduced state; 1 exactly iff the symmetric state is a product."""
    n = state.n_atoms
    bloch = np.array([expectation(state, c)[0] for c in ("x", "y", "z")]) * (2.0 / n)
    return 0.5 * (1.0 + float(np.dot(bloch, bloch)))


@dataclass(frozen=True)
class FisherEstimate:
    """Classical Fisher information estimate with the probability mass excluded
    by the small-probability floor."""

    value: float
    excluded_mass: float
    step: float


def classical_fisher(outcome_dist: Callable[[float], np.ndarray], gamma: float,
                     step: float, p_floor: float = 1e-12) -> FisherEstimate:
    """Central-difference Fisher information of a gamma-dependent distribution.

    Outcomes with probability below p_floor are excluded from the sum (their
    p -> 0 limit is otherwise numerically ill-conditioned) and the excluded
    mass is reported alongside the estimate.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    p0 = np.asarray(outcome_dist(gamma), dtype=float)
    pp = np.asarray(outcome_dist(gamma + step), dtype=float)
    pm = np.asarray(outcome_dist(gamma - step), dtype=float)
    for p in (p0, pp, pm):
        if np.any(p < -1e-12):
            raise ValueError("distribution has negative entries")
        if abs(p.sum() - 1.0) > 1e-8:
            raise ValueError("distribution is not normalized")
    dp = (pp - pm) / (2.0 * step)
    mask = p0 > p_floor
    value = float(np.sum(dp[mask] ** 2 / p0[mask]))
    return FisherEstimate(value=value, excluded_mass=float(p0[~mask].sum()), step=step)


# --- closed-form bounds and signals ---------------------------------------

@dataclass(frozen=True)
class LinearBounds:
    heisenberg: float
    qnl: float


def crb_linear(bound: SpectrumBound, n_atoms: int, t: float) -> LinearBounds:
    """Heisenberg bound 1/(t N (Lambda-lam)) and quantum noise limit 1/(t sqrt(N) (Lambda-lam))."""
    if t <= 0:
        raise ValueError("time must be positive")
    if bound.k_body != 1:
        raise ValueError("linear bound needs k_body = 1")
    width = bound.Lambda - bound.lam
    if width == 0.0:
        raise ValueError("degenerate spectrum: the generator is trivial and the "
                         "sensitivity is unbounded")
    return LinearBounds(heisenberg=1.0 / (t * n_atoms * width),
                        qnl=1.0 / (t * math.sqrt(n_atoms) * width))


@dataclass(frozen=True)
class NonlinearBound:
    crb: float
    product_state_reference: float
    norm: float


def crb_nonlinear(bound: SpectrumBound, n_atoms: int, t: float) -> NonlinearBound:
    """Cramer-Rao bound for a k-body coupling (sum of per-qubit couplings)^k.

    The seminorm of the generator is the spread of s^k over s in
    [N lam, N Lambda]; if the interval straddles zero and k is even the
    minimum is 0.  Also reports the product-state scaling reference
    1/(t N^(k-1/2)).
    """
    if t <= 0:
        raise ValueError("time must be positive")
    lo, hi = n_atoms * bound.lam, n_atoms * bound.Lambda
    candidates = [lo**bound.k_body, hi**bound.k_body]
    if lo < 0.0 < hi:
        candidates.append(0.0)
    norm = max(candidates) - min(candidates)
    if norm == 0.0:
        raise ValueError("degenerate spectrum: the generator is trivial and the "
                         "sensitivity is unbounded")
    return NonlinearBound(crb=1.0 / (t * norm),
                          product_state_reference=1.0 / (t * n_atoms ** (bound.k_body - 0.5)),
                          norm=norm)


def ramsey_signal(n_atoms: int, phi: float) -> tuple[float, float]:
    """Analytic population-difference signal and variance at accumulated phase phi."""
    return 0.5 * n_atoms * math.cos(phi), 0.25 * n_atoms * math.sin(phi) ** 2


def ramsey_uncertainty(n_atoms: int, t: float) -> SensitivityResult:
    """Phase-estimation uncertainty 1/(t sqrt(N)) of the product-state interferometer."""
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    if t <= 0:
        raise ValueError("time must be positive")
    return SensitivityResult(1.0 / (t * math.sqrt(n_atoms)), scaling_exponent_estimate=-0.5)


def cat_signal(n_atoms: int, phi: float) -> tuple[float, float]:
    """Analytic single-qubit readout signal and variance for the cat interferometer."""
    return math.cos(n_atoms * phi), math.sin(n_atoms * phi) ** 2


def cat_uncertainty(n_atoms: int, t: float) -> SensitivityResult:
    """Optimal 1/(t N) uncertainty reached by the entangled cat input."""
    if n_atoms < 1:
        raise ValueError("need at least one atom")
    if t <= 0:
        raise ValueError("time must be positive")
    return SensitivityResult(1.0 / (t * n_atoms), scaling_exponent_estimate=-1.0)


# --- simulated protocols ---------------------------------------------------
#
# Each simulation propagates the state together with its exact derivative with
# respect to the coupling (the generators are diagonal, so the derivative is
# available in closed form and survives subsequent rotations unchanged).

@dataclass(frozen=True)
class ProtocolResult:
    protocol: str
    n_atoms: int
    gamma: float
    t: float
    delta_gamma: float
    signal_mean: float
    signal_variance: float
    signal_slope: float
    purity: float
    generator_sd: float  # sqrt(<Delta^2 K>), K = t * h


def _evolved_pair(n_atoms: int, sup: Superposition, kind: HamiltonianKind,
                  gamma: float, t: float):
    state = prepare_product(n_atoms, sup)
    h = generator_eigenvalues(CollectiveHamiltonian(kind), n_atoms)
    phases = np.exp(-1j * gamma * t * h)
    psi = phases * state.amplitudes
    dpsi = -1j * t * h * psi
    p = np.abs(psi) ** 2
    var_h = float(np.dot(p, h**2)) - float(np.dot(p, h)) ** 2
    return psi, dpsi, t * math.sqrt(max(var_h, 0.0))


def _readout(psi, dpsi, n_atoms, observable_apply) -> tuple[float, float, float]:
    av = observable_apply(psi)
    mean = np.vdot(psi, av).real
    var = max(np.vdot(av, av).real - mean**2, 0.0)
    slope = 2.0 * np.real(np.vdot(av, dpsi))
    return mean, var, slope


def _finish(protocol, n_atoms, gamma, t, psi, dpsi, generator_sd, observable_apply):
    mean, var, slope = _readout(psi, dpsi, n_atoms, observable_apply)
    delta = math.sqrt(var) / abs(slope) if slope != 0.0 else math.inf
    purity = single_qubit_purity(DickeState(n_atoms, psi))
    return ProtocolResult(protocol=protocol, n_atoms=n_atoms, gamma=gamma, t=t,
                          delta_gamma=delta, signal_mean=mean, signal_variance=var,
                          signal_slope=slope, purity=purity, generator_sd=generator_sd)


def simulate_ramsey(n_atoms: int, gamma: float, t: float) -> ProtocolResult:
    """Full product-state interferometer: equal superposition, linear evolution,
    closing half-rotation, population-difference readout."""
    psi, dpsi, gsd = _evolved_pair(n_atoms, Superposition.equal(), "linear_Jz", gamma, t)
    psi = _rotate_values(psi, n_atoms, "y", -math.pi / 2.0)
    dpsi = _rotate_values(dpsi, n_atoms, "y", -math.pi / 2.0)
    return _finish("ramsey", n_atoms, gamma, t, psi, dpsi, gsd,
                   lambda v: _apply_component(v, n_atoms, "z"))


def simulate_cat(n_atoms: int, gamma: float, t: float) -> ProtocolResult:
    """Cat-state interferometer read out through the extremal-ladder coherence.

    The textbook readout kicks the phase onto one qubit, which has no symmetric
    representation; the collective observable |J><-J| + |-J><J| has identical
    statistics (signal cos(N phi), variance sin^2(N phi)).
    """
    state = cat_state(n_atoms)
    h = generator_eigenvalues(CollectiveHamiltonian("linear_Jz"), n_atoms)
    psi = np.exp(-1j * gamma * t * h) * state.amplitudes
    dpsi = -1j * t * h * psi
    gsd = t * n_atoms / 2.0

    def coherence(v):
        out = np.zeros_like(v)
        out[0], out[-1] = v[-1], v[0]
        return out

    return _finish("cat", n_atoms, gamma, t, psi, dpsi, gsd, coherence)


def simulate_enhanced(n_atoms: int, gamma: float, t: float,
                      sup: Superposition | None = None) -> ProtocolResult:
    """Product-state protocol driven by the N-amplified linear coupling."""
    if sup is None:
        sup = Superposition.equal()
    psi, dpsi, gsd = _evolved_pair(n_atoms, sup, "enhanced_NJz", gamma, t)
    psi = _rotate_values(psi, n_atoms, "y", -math.pi / 2.0)
    dpsi = _rotate_values(dpsi, n_atoms, "y", -math.pi / 2.0)
    return _finish("enhanced", n_atoms, gamma, t, psi, dpsi, gsd,
                   lambda v: _apply_component(v, n_atoms, "z"))


def simulate_quadratic(n_atoms: int, gamma: float, t: float,
                       sup: Superposition | None = None) -> ProtocolResult:
    """Product-state protocol under the quadratic coupling with a J_y readout."""
    if sup is None:
        sup = Superposition.quadratic_optimal()
    psi, dpsi, gsd = _evolved_pair(n_atoms, sup, "quadratic_Jz2", gamma, t)
    return _finish("quadratic", n_atoms, gamma, t, psi, dpsi, gsd,
                   lambda v: _apply_component(v, n_atoms, "y"))


def product_nonlinear_protocol(n_atoms: int, gamma: float, t_grid: Sequence[float],
                               kind: HamiltonianKind = "quadratic_Jz2",
                               sup: Superposition | None = None) -> list[ProtocolResult]:
    """Sensitivity trace of the product-state nonlinear protocol over a time grid.

    For the quadratic coupling the short-time sensitivity approaches
    2/(t sqrt(N) (N-1)), i.e. 2/(t N^(3/2)) at large N; times where the signal
    slope vanishes are reported with infinite delta_gamma.
    """
    if n_atoms < 2:
        raise ValueError("a nonlinear protocol needs at least two atoms")
    if kind == "quadratic_Jz2":
        return [simulate_quadratic(n_atoms, gamma, t, sup) for t in t_grid]
    if kind == "enhanced_NJz":
        return [simulate_enhanced(n_atoms, gamma, t, sup) for t in t_grid]
    raise ValueError(f"unsupported protocol kind {kind!r}")


def fit_loglog_slope(n_values: Sequence[float], delta_gammas: Sequence[float]) -> float:
    """Least-squares slope of log(delta_gamma) against log(N)."""
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.log(np.asarray(delta_gammas, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
