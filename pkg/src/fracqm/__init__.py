"""Spectral toolkit for quantum mechanics with a power-law dispersion
E = |p|^(2 alpha)/(2 m)^alpha: Fourier-multiplier momentum-power operators,
split-step dynamics, stationary states with virial checks, and the
closed-form hydrogen-like atom, plus a batch CLI."""

__version__ = "0.1.0"

from .constants import PhysicalConstants, natural_constants, paper_constants, si_constants
from .grid import (
    Grid,
    LeakageError,
    MomentumWavefunction,
    PositionWavefunction,
    boundary_leakage,
    expectation_p_power_momentum,
    expectation_x_power,
    forward_transform,
    inner_x,
    inverse_transform,
    is_lattice_plane_wave,
    make_grid,
    normalize,
)
from .operators import (
    BranchPolicy,
    CoefficientVector,
    FractionalExponent,
    HamiltonianSpec,
    OperatorMatrix,
    PRINCIPAL,
    Potential,
    RIESZ,
    apply_function_of_p_power,
    apply_matrix,
    apply_p_power,
    apply_x_power_momentum,
    hamiltonian_apply,
    hermiticity_residual,
    kinetic_apply,
    matrix_representation,
    orthonormalize,
)
from .dynamics import (
    EvolutionRecord,
    HeisenbergOperator,
    PropagatorConfig,
    coefficient_dynamics,
    commutator,
    eom_residual,
    evolve_split_step,
    free_evolve_exact,
    gaussian_packet,
    heisenberg_transform,
    picture_equivalence_residual,
    plane_wave,
    plane_wave_eq_residual,
    standard_observables,
    time_translation,
)
from .spectral import (
    EigenPair,
    SpectrumResult,
    VirialDynamicResult,
    VirialReport,
    fourier_basis,
    oscillator_basis,
    solve_secular,
    stationary_states,
    synthesize,
    virial_check,
    virial_dynamic,
)
from .hydrogen import (
    AnomalousAtomSpec,
    EnergyLevel,
    FitResult,
    OrbitRadius,
    SpectrumTable,
    Transition,
    bohr_limit_check,
    emit_spectrum_table,
    energy_level,
    fit_exponent,
    ionization_energy,
    orbit_radius,
    transition_energy,
)
