"""Numerical and closed-form laboratory for a bead sliding on a vibrating string."""

from .analytic import (
    ClockMismatchWarning,
    PhysicalParams,
    Regime,
    TransparencySolution,
    debroglie_quantities,
    dispersion_residual,
    doppler_decompose,
    eval_field,
    gamma_factor,
    guidance_velocity,
    make_bradyon,
    make_surfer,
    make_tachyon,
    phases,
    tachyon_gamma,
    velocities,
)
from .grid import BoundaryCondition, Grid, deposit_kernel, interpolate
from .solver import (
    ConfigError,
    ExternalPotential,
    InstabilityError,
    RunOutput,
    Scheme,
    SimConfig,
    SimState,
    init_from_analytic,
    init_pulse,
    init_zero,
    normal_force,
    run,
    step_rk4,
)

from . import config, diagnostics, scenarios, validation

__version__ = "0.1.0"
