"""Pseudospectral solver and scattering diagnostics for the nonlinear
Schrodinger equation with harmonic confinement on part of the variables."""

from .errors import (
    AdmissibilityError,
    BoundaryMassExceeded,
    ConfigError,
    NoContraction,
    NonFinite,
    SingularTime,
    TrapNLSError,
)
from .grid import (
    Field,
    GridSpec,
    SpectralCoeffs,
    apply_coordinate,
    apply_gradient,
    forward_transform,
    hermite_basis,
    inverse_transform,
)
from .propagators import (
    dispersive_bound_check,
    linear_propagate,
    linear_propagate_field,
    mehler_apply,
    phase_table,
)
from .solver import SimParams, TrajectoryHandle, nonlinear_step, run_simulation, strang_step
from .diagnostics import (
    DiagnosticsRecord,
    MarginalDensity,
    MorawetzReport,
    apply_vector_field,
    conserved_quantities,
    decay_exponent_fit,
    marginal_density,
    morawetz_monitor,
    morawetz_seminorm,
    sigma_norm,
    strichartz_window_norm,
    vector_field_norms,
    virial_and_action,
)
from .scattering import (
    ScatteringReport,
    interaction_profile,
    long_range_probe,
    scattering_monitor,
    wave_operator_picard,
)
from .cli import ScenarioConfig, build_initial, parse_config, run_scenario, serialize_config

__version__ = "0.1.0"
