"""Quantum-limited metrology bounds and two-mode BEC condensate numerics.

The package has two halves that meet in the middle: exact collective-spin
simulation with the associated Cramer-Rao / quantum-noise-limit / Heisenberg
bounds (`spins`), and the condensate physics that realizes the amplified
coupling: critical-number scaling (`scaling`), closed-form Thomas-Fermi
analytics (`thomas_fermi`), grid-based Gross-Pitaevskii solves (`gp`), and the
atom-counting noise model (`counting`).  `physconfig` holds species and trap
records; `cli` exposes reproducible sweeps.
"""

from .physconfig import (PhysicalConstants, SI, Species, Superposition,
                         TrapGeometry, coupling_constant, differential_coupling,
                         josephson_couplings, rb87, trap_from_lengths,
                         trap_from_strengths, typical_species, typical_trap)
from .scaling import (CriticalNumbers, Regime, classify_regime,
                      critical_numbers, eta_estimate, fig1_table,
                      longitudinal_radius, radii_full, scaling_exponent)
from .spins import (CollectiveHamiltonian, DickeState, SensitivityResult,
                    SpectrumBound, cat_state, cat_uncertainty, classical_fisher,
                    crb_linear, crb_nonlinear, evolve, expectation,
                    prepare_product, product_nonlinear_protocol, qfi_pure,
                    ramsey_uncertainty, rotate, simulate_cat, simulate_enhanced,
                    simulate_quadratic, simulate_ramsey, single_qubit_purity)
from .thomas_fermi import (PhaseDynamics, TFProfile, fringe_probabilities,
                           i_integral, j_integral, k_integral, overlap_gaussian,
                           phase_dynamics, tf_profile)
from .gp import (ConvergenceError, EvolutionRecord, Field, Grid,
                 GroundStateResult, StepSizeError, eta_sweep, evolve_two_mode,
                 ground_state, load_field, loss_budget, save_field)
from .counting import (CountingNoise, MonteCarloResult, NumberPrior,
                       QuantumSignalModel, corrected_moments,
                       corrected_uncertainty, posterior_n0, ramsey_model,
                       simulate_counts)

__version__ = "0.1.0"
