"""Finite-volume solvers and diagnostics for 2D non-local conveyor-belt flow."""

__version__ = "0.1.0"

from .errors import BeltflowError, CflViolation, ConfigurationError, ContractViolation
from .grid import (DensityField, Grid, TimeGrid, discrete_tv, l1_norm, linf_norm,
                   load_snapshot, project_initial_datum, save_snapshot)
from .mollifier import (KernelStencil, MollifierSpec, build_stencil,
                        eta_derivatives, eta_value, sup_norms)
from .congestion import (CongestionModel, always_on_congestion, atan_congestion,
                         f_eval, f_prime, heaviside, lipschitz_constant,
                         spline_congestion)
from .velocity import (StaticField, conveyor_diverter_field, field_norms,
                       tabulated_field, uniform_field)
from .interaction import (InterfaceStencils, InterfaceVelocities, collision_operator,
                          convolve_gradient, convolve_gradient_fast,
                          build_interface_velocities)
from .roe import RoeConfig, roe_cfl_dt, roe_linear_flux, roe_nonlocal_flux, roe_step
from .lxf import LxfConfig, lxf_cfl_dt, lxf_flux, lxf_step
from .diagnostics import (BoundInputs, BoundReport, StabilityReport, appendix_checks,
                          entropy_residual, linf_bound, make_bound_inputs,
                          outflow_mass, stability_experiment, stability_rate,
                          theoretical_bounds)
from .driver import (RunConfig, RunReport, advance, audit_run, compare_schemes,
                     convergence_study, parse_config_text)
from .cli import cli_dispatch

__all__ = [name for name in dir() if not name.startswith("_")]
