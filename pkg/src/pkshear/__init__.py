"""Shear-advected chemotaxis simulator with mixing-rate diagnostics.

Submodules: grid (domain and transforms), model (equations and spatial
operators), tridiag (batched complex tridiagonal solves), integrator (IMEX
time stepping), hypo (weighted energy functionals and rate fits), monitors
(per-record diagnostics), harness (config, presets, sweeps, persistence),
cli (the pks-sim entry point).
"""

from .grid import Field, Grid, SpectralSlice, ddx, ddy, integrate, lp_norm, mode_split, transform_x
from .harness import load_config, run_from_config, run_scenario, sweep
from .hypo import DecayFit, HypoMultipliers, fit_decay_rate, functional_F, multipliers, phi_k, scaling_slope
from .integrator import RunOutcome, StepConfig, adapt_dt, implicit_solve_k, run, step
from .model import (
    CRITICAL_MASS,
    ModelParams,
    PKSState,
    ShearProfile,
    assemble_rhs,
    build_shear,
    chem_elliptic_solve,
    chemotaxis_flux,
)
from .monitors import MonitorConfig, MonitorRecord, heat_kernel_ratio, nash_ratio, update_monitors

__version__ = "0.1.0"

__all__ = [
    "Grid", "Field", "SpectralSlice", "transform_x", "ddx", "ddy",
    "integrate", "lp_norm", "mode_split",
    "ModelParams", "ShearProfile", "PKSState", "build_shear",
    "chemotaxis_flux", "assemble_rhs", "chem_elliptic_solve", "CRITICAL_MASS",
    "HypoMultipliers", "DecayFit", "multipliers", "phi_k", "functional_F",
    "fit_decay_rate", "scaling_slope",
    "MonitorConfig", "MonitorRecord", "update_monitors", "nash_ratio", "heat_kernel_ratio",
    "StepConfig", "RunOutcome", "implicit_solve_k", "adapt_dt", "step", "run",
    "load_config", "run_from_config", "run_scenario", "sweep",
    "__version__",
]
