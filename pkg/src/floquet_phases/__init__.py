"""Adiabatic Floquet dynamics and non-Abelian geometric phases of slowly modulated drives."""

from .config import ConfigError, ExperimentConfig, dump_config, load_config, parse_config
from .driving import (
    DrivingProfile,
    fourier_coeff,
    harmonic_profile,
    load_profile,
    p_factor,
    primitive,
    profile_from_function,
    tabulated_profile,
)
from .evolution import (
    HolonomyOperator,
    NumericalGuardError,
    PropagatorResult,
    effective_propagator,
    full_solution,
    holonomy_loop,
    evolve_state,
    micromotion,
    micromotion_s,
    omega_spin,
    propagate_effective,
    propagate_exact,
    propagate_transformed,
)
from .protocols import (
    FieldSchedule,
    Hold,
    RampDown,
    RampUp,
    RotateLoop,
    ScheduleError,
    analytic_probabilities,
    build_fig2_schedule,
    rho,
    run_double_loop,
    run_fig2,
)
from .smallmat import commutator, dist, herm_eig, unitary_exp
from .spin import SpinSystem, spin_matrices, zeeman_v
from .transform import (
    KMatrixBlock,
    OracleReport,
    VOperatorMap,
    adiabaticity_check,
    bessel_j0,
    fourier_provider,
    k_matrix,
    linear_spin_map,
    r_operator,
    spin_map,
    w0_spin_harmonic,
    w_fourier,
    w_oracle_triangle,
    w_numeric,
    w_series,
    w_spin_closed,
    weak_driving_w0,
)

__version__ = "0.1.0"
