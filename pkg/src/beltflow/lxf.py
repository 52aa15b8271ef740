"""Lax-Friedrichs-type scheme: central fluxes with directional viscosity.

Same split-step layout as the Roe scheme, with central flux averages plus
an artificial-viscosity jump term.  The viscosity coefficients default to
their smallest admissible values, which is the least diffusive valid
choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .congestion import CongestionModel, f_eval, lipschitz_constant
from .errors import CflViolation, ConfigurationError, ContractViolation
from .grid import DensityField, Grid
from .interaction import InterfaceVelocities
from .roe import INTERMEDIATE, PREVIOUS
from .velocity import StaticField


@dataclass(frozen=True)
class LxfConfig:
    """Viscosity coefficients and CFL safety for the Lax-Friedrichs scheme.

    ``alpha`` and ``beta`` may be left unset to get the minimal admissible
    values speed + epsilon * L_f per direction.
    """

    epsilon: float
    alpha: float | None = None
    beta: float | None = None
    cfl_safety: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ConfigurationError("cfl_safety must lie in (0, 1]")
        if self.epsilon < 0.0:
            raise ConfigurationError("epsilon must be non-negative")


def lxf_flux(v, J, u, w, visc, model: CongestionModel):
    """Central flux 1/2 [v (u+w) + J (f(u)+f(w))] - visc/2 (w - u)."""
    return 0.5 * (v * (u + w) + J * (f_eval(model, u) + f_eval(model, w))) \
        - 0.5 * visc * (w - u)


def _resolve_viscosity(config: LxfConfig, norms: dict, L_f: float):
    """Minimal admissible (alpha, beta) unless the config pins larger ones."""
    alpha_min = norms["v1_inf"] + config.epsilon * L_f
    beta_min = norms["v2_inf"] + config.epsilon * L_f
    alpha = alpha_min if config.alpha is None else config.alpha
    beta = beta_min if config.beta is None else config.beta
    if alpha < alpha_min or beta < beta_min:
        raise ConfigurationError(
            f"viscosity coefficients ({alpha:g}, {beta:g}) fall below the "
            f"admissible minimum ({alpha_min:g}, {beta_min:g})"
        )
    return alpha, beta


def _inv(x: float) -> float:
    return 1.0 / x if x > 0.0 else float("inf")


def _lambda_bounds(epsilon, L_f, alpha, beta, norms, grid):
    bx = (1.0 / 3.0) * min(_inv(alpha),
                           _inv(2.0 * epsilon * L_f + grid.dx * norms["v1_inf"]))
    by = (1.0 / 3.0) * min(_inv(beta),
                           _inv(2.0 * epsilon * L_f + grid.dy * norms["v2_inf"]))
    return bx, by


def lxf_cfl_dt(config: LxfConfig, vfield: StaticField, model: CongestionModel,
               grid: Grid):
    """Admissible step and the viscosity pair: returns (dt, alpha, beta)."""
    norms = vfield.norms(grid.domain)
    L_f = lipschitz_constant(model)
    alpha, beta = _resolve_viscosity(config, norms, L_f)
    bx, by = _lambda_bounds(config.epsilon, L_f, alpha, beta, norms, grid)
    dt = config.cfl_safety * min(bx * grid.dx, by * grid.dy)
    return dt, alpha, beta


def _sweep(values, state, vi, Ji, model, lam, visc, axis):
    if axis == 0:
        u, w = state[:-1, :], state[1:, :]
        v_in, J_in = vi[1:-1, :], Ji[1:-1, :]
    else:
        u, w = state[:, :-1], state[:, 1:]
        v_in, J_in = vi[:, 1:-1], Ji[:, 1:-1]
    flux = np.zeros_like(Ji)
    inner = lxf_flux(v_in, J_in, u, w, visc, model)
    if axis == 0:
        flux[1:-1, :] = inner
        return values - lam * (flux[1:, :] - flux[:-1, :])
    flux[:, 1:-1] = inner
    return values - lam * (flux[:, 1:] - flux[:, :-1])


def lxf_step(field: DensityField, J: InterfaceVelocities, vfield: StaticField,
             model: CongestionModel, config: LxfConfig, dt: float,
             y_sweep_state: str = PREVIOUS, check_cfl: bool = True,
             return_intermediate: bool = False):
    """Advance one split Lax-Friedrichs step (x-sweep then y-sweep)."""
    if y_sweep_state not in (PREVIOUS, INTERMEDIATE):
        raise ConfigurationError(f"unknown y_sweep_state {y_sweep_state!r}")
    grid = field.grid
    if J.J1.shape != (grid.nx + 1, grid.ny) or J.J2.shape != (grid.nx, grid.ny + 1):
        raise ContractViolation("interface velocity shapes do not match the grid")
    norms = vfield.norms(grid.domain)
    L_f = lipschitz_constant(model)
    alpha, beta = _resolve_viscosity(config, norms, L_f)
    if check_cfl:
        bx, by = _lambda_bounds(config.epsilon, L_f, alpha, beta, norms, grid)
        tol = 1.0 + 1e-12
        if dt / grid.dx > bx * tol:
            raise CflViolation(
                f"lxf: dt/dx = {dt / grid.dx:.6g} exceeds the bound {bx:.6g}"
            )
        if dt / grid.dy > by * tol:
            raise CflViolation(
                f"lxf: dt/dy = {dt / grid.dy:.6g} exceeds the bound {by:.6g}"
            )

    lam_x = dt / grid.dx
    lam_y = dt / grid.dy
    v1i = vfield.sample_x_interfaces(grid)
    v2i = vfield.sample_y_interfaces(grid)

    rho = field.values
    half = _sweep(rho, rho, v1i, J.J1, model, lam_x, alpha, axis=0)
    y_args = rho if y_sweep_state == PREVIOUS else half
    new = _sweep(half, y_args, v2i, J.J2, model, lam_y, beta, axis=1)

    out = DensityField(grid, new, time=field.time + dt)
    if return_intermediate:
        return out, DensityField(grid, half, time=field.time + dt)
    return out
