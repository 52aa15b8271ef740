"""Runtime checks of every a-priori bound: norms, entropy, kernel estimates.

All inequality evaluators report margins (bound minus observed value) or
worst observed-to-allowed ratios, so a healthy run shows non-negative
margins and ratios at most one.  Exponential bound constants are assembled
from cached sup norms; with sharp kernels they can overflow to infinity, in
which case the corresponding checks hold trivially.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .congestion import CongestionModel, f_eval, lipschitz_constant
from .errors import ConfigurationError, ContractViolation
from .grid import DensityField, l1_norm
from .interaction import InterfaceStencils, InterfaceVelocities, build_interface_velocities
from .mollifier import MollifierSpec, sup_norms
from .roe import RoeConfig, roe_cfl_dt, roe_linear_flux, roe_nonlocal_flux, roe_step
from .velocity import StaticField


@dataclass
class BoundReport:
    """Margins of the displayed bounds at one output time (bound - observed)."""

    time: float
    mass_drift: float
    linf_margin: float
    tv_margin: float
    time_continuity_margin: float
    entropy_max_positive_residual: float = float("nan")
    appendix_max_violation: float = float("nan")


@dataclass
class StabilityReport:
    """L1 distance of two runs against the Lipschitz-dependence bound."""

    t: float
    l1_distance: float
    bound: float
    rate: float


def outflow_mass(field: DensityField, x_d: float, initial_mass_in_region: float) -> float:
    """Mass upstream of x_d (cell centres with x <= x_d), relative to its start value."""
    if initial_mass_in_region <= 0.0:
        raise ConfigurationError("initial upstream mass must be positive")
    mask = field.grid.cell_centers_x() <= x_d
    mass = float(np.sum(field.values[mask, :]) * field.grid.cell_area)
    return mass / initial_mass_in_region


@dataclass(frozen=True)
class BoundInputs:
    """Everything the closed-form bound constants need, cached once per run."""

    epsilon: float
    L_f: float
    rho0_l1: float
    rho0_tv: float
    rho0_linf: float
    v_norms: Mapping
    eta_norms: Mapping


def make_bound_inputs(field0: DensityField, vfield: StaticField,
                      model: CongestionModel, spec: MollifierSpec,
                      epsilon: float) -> BoundInputs:
    from .grid import discrete_tv, linf_norm

    return BoundInputs(
        epsilon=epsilon,
        L_f=lipschitz_constant(model),
        rho0_l1=l1_norm(field0),
        rho0_tv=discrete_tv(field0),
        rho0_linf=linf_norm(field0),
        v_norms=vfield.norms(field0.grid.domain),
        eta_norms=sup_norms(spec),
    )


def _tv_exp_bound(tv0: float, rate: float, offset: float, t: float) -> float:
    """tv0 * e^(2 t rate) + (2 offset / rate)(e^(2 t rate) - 1), rate -> 0 handled."""
    if rate == 0.0:
        return tv0 + 4.0 * offset * t
    with np.errstate(over="ignore"):
        growth = float(np.exp(2.0 * t * rate))
        return growth * tv0 + (2.0 * offset / rate) * (growth - 1.0)


def theoretical_bounds(inputs: BoundInputs, t: float, scheme: str = "roe") -> dict:
    """Closed-form bound constants and their values at time t.

    Keys: ``linf_rate`` (exponential rate of the max-norm bound), ``tv_rate``
    and ``tv_offset`` (variation growth rate and source), ``tv_bound``
    (variation bound at t), ``time_rate`` (L1 time-continuity rate at t),
    ``spacetime_bound``, and the kernel constants ``kernel_c1``,
    ``kernel_c2``, ``kernel_c``.
    """
    if scheme not in ("roe", "lxf"):
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    vn, en = inputs.v_norms, inputs.eta_norms
    eps, L_f, mass = inputs.epsilon, inputs.L_f, inputs.rho0_l1
    c1 = 2.0 * en["third_inf"]
    c2 = 3.0 * en["hess_inf"] ** 2
    kernel_c = c1 * mass + c2 * mass ** 2

    if scheme == "roe":
        linf_rate = vn["d1v1_inf"] + vn["d2v2_inf"] + 4.0 * eps * en["hess_inf"] * mass
        tv_rate = 6.0 * (vn["grad_inf"] + 2.0 * eps * L_f * en["hess_inf"] * mass)
        time_src = vn["grad_inf"] + 2.0 * eps * en["hess_inf"] * mass
    else:
        linf_rate = vn["d1v1_inf"] + vn["d2v2_inf"] + 4.0 * eps * L_f * en["hess_inf"] * mass
        tv_rate = 2.0 * vn["grad_inf"] + 4.0 * eps * L_f * en["hess_inf"] * mass
        time_src = vn["grad_inf"] + eps * en["hess_inf"] * mass

    tv_offset = (4.0 * eps * kernel_c + 3.0 * vn["hess_inf"]) * mass
    tv_bound = _tv_exp_bound(inputs.rho0_tv, tv_rate, tv_offset, t)
    time_rate = 2.0 * (vn["v_inf"] + eps * L_f) * tv_bound + time_src * mass
    return {
        "linf_rate": linf_rate,
        "tv_rate": tv_rate,
        "tv_offset": tv_offset,
        "tv_bound": tv_bound,
        "time_rate": time_rate,
        "spacetime_bound": t * (tv_bound + 2.0 * time_rate),
        "kernel_c1": c1,
        "kernel_c2": c2,
        "kernel_c": kernel_c,
    }


def linf_bound(inputs: BoundInputs, t: float, scheme: str = "roe") -> float:
    """Max-norm bound rho0_linf * e^(rate * t)."""
    rate = theoretical_bounds(inputs, 0.0, scheme)["linf_rate"]
    with np.errstate(over="ignore"):
        return float(inputs.rho0_linf * np.exp(rate * t))


def stability_rate(inputs: BoundInputs, sigma0_l1: float, t: float,
                   scheme: str = "roe") -> float:
    """Gronwall rate of the initial-data dependence bound at time t.

    The variation of the reference solution is replaced by its provable
    bound, which only loosens the estimate.
    """
    en = inputs.eta_norms
    tv_bound = theoretical_bounds(inputs, t, scheme)["tv_bound"]
    return (2.0 * inputs.epsilon * en["grad_inf"] * inputs.rho0_l1
            + inputs.epsilon * inputs.L_f * en["laplacian_inf"]
            * (1.0 + sigma0_l1 * en["grad_l1"]) * tv_bound)


def entropy_residual(rho_n: DensityField, rho_half: DensityField,
                     rho_np1: DensityField, J: InterfaceVelocities,
                     vfield: StaticField, model: CongestionModel,
                     kappa: float, dt: float) -> float:
    """Worst cell residual of the discrete entropy inequality for one step.

    Evaluates the split-form Kruzhkov inequality (entropy fluxes built from
    the states the printed inequality prescribes: pre-step states in x,
    half states in y) over interior cells and returns the maximum.  A
    scheme step taken with the ``intermediate`` y-sweep variant satisfies
    the inequality up to roundoff; the ``previous`` variant is measured
    rather than assumed.  Requires kappa >= 0.
    """
    if kappa < 0.0:
        raise ConfigurationError("entropy constants are restricted to kappa >= 0")
    grid = rho_n.grid
    shape = rho_n.values.shape
    if rho_half.values.shape != shape or rho_np1.values.shape != shape:
        raise ContractViolation("entropy residual: state shapes differ")
    if J.J1.shape != (grid.nx + 1, grid.ny) or J.J2.shape != (grid.nx, grid.ny + 1):
        raise ContractViolation("entropy residual: interface shapes do not match")
    if grid.nx < 3 or grid.ny < 3:
        raise ContractViolation("entropy residual needs at least 3 cells per direction")

    k = float(kappa)
    fk = float(f_eval(model, k))
    lam_x = dt / grid.dx
    lam_y = dt / grid.dy
    v1i = vfield.sample_x_interfaces(grid)
    v2i = vfield.sample_y_interfaces(grid)
    rn, rh, rp = rho_n.values, rho_half.values, rho_np1.values

    def entropy_flux(u, w, v, Jv):
        top = roe_linear_flux(v, np.maximum(u, k), np.maximum(w, k)) \
            + roe_nonlocal_flux(np.maximum(u, k), np.maximum(w, k), Jv, model)
        bot = roe_linear_flux(v, np.minimum(u, k), np.minimum(w, k)) \
            + roe_nonlocal_flux(np.minimum(u, k), np.minimum(w, k), Jv, model)
        return top - bot

    phi_x = entropy_flux(rn[:-1, :], rn[1:, :], v1i[1:-1, :], J.J1[1:-1, :])
    gam_y = entropy_flux(rh[:, :-1], rh[:, 1:], v2i[:, 1:-1], J.J2[:, 1:-1])

    inner = np.s_[1:-1, 1:-1]
    d_phi = (phi_x[1:, :] - phi_x[:-1, :])[:, 1:-1]
    d_gam = (gam_y[:, 1:] - gam_y[:, :-1])[1:-1, :]
    d_v1 = np.diff(v1i, axis=0)[inner]
    d_v2 = np.diff(v2i, axis=1)[inner]
    d_j1 = np.diff(J.J1, axis=0)[inner]
    d_j2 = np.diff(J.J2, axis=1)[inner]

    residual = (np.abs(rp - k) - np.abs(rn - k))[inner] \
        + lam_x * (d_phi + np.sign(rh - k)[inner] * (d_v1 * k + d_j1 * fk)) \
        + lam_y * (d_gam + np.sign(rp - k)[inner] * (d_v2 * k + d_j2 * fk))
    return float(residual.max())


def _ratio(worst_left: float, bound: float) -> float:
    if bound > 0.0:
        return worst_left / bound
    return 0.0 if worst_left == 0.0 else float("inf")


def appendix_checks(field: DensityField, spec: MollifierSpec, epsilon: float,
                    eta_norms: Mapping | None = None,
                    stencils: InterfaceStencils | None = None,
                    method: str = "direct") -> dict:
    """Worst observed/allowed ratios of the kernel-estimate inequality families.

    Families: the sup bound |J| <= eps, first differences along the
    component's own direction and transverse to it, second differences, and
    mixed differences.  All ratios are at most one for any density field.
    """
    if eta_norms is None:
        eta_norms = sup_norms(spec)
    J = build_interface_velocities(field, spec, epsilon, stencils=stencils, method=method)
    mass = l1_norm(field)
    dx, dy = field.grid.dx, field.grid.dy
    hess = eta_norms["hess_inf"]
    c1 = 2.0 * eta_norms["third_inf"]
    c2 = 3.0 * hess ** 2
    kernel_c = c1 * mass + c2 * mass ** 2

    def amax(a):
        return float(np.max(np.abs(a))) if a.size else 0.0

    sup_ratio = _ratio(max(amax(J.J1), amax(J.J2)), epsilon)

    own = max(
        _ratio(amax(np.diff(J.J1, axis=0)), 2.0 * epsilon * dx * hess * mass),
        _ratio(amax(np.diff(J.J2, axis=1)), 2.0 * epsilon * dy * hess * mass),
    )
    transverse = max(
        _ratio(amax(np.diff(J.J1, axis=1)), 2.0 * epsilon * dy * hess * mass),
        _ratio(amax(np.diff(J.J2, axis=0)), 2.0 * epsilon * dx * hess * mass),
    )
    second = max(
        _ratio(amax(np.diff(J.J1, n=2, axis=0)), 2.0 * epsilon * dx ** 2 * kernel_c),
        _ratio(amax(np.diff(J.J2, n=2, axis=1)), 2.0 * epsilon * dy ** 2 * kernel_c),
    )
    mixed_bound = 2.0 * epsilon * dx * dy * kernel_c
    mixed = max(
        _ratio(amax(np.diff(np.diff(J.J1, axis=0), axis=1)), mixed_bound),
        _ratio(amax(np.diff(np.diff(J.J2, axis=0), axis=1)), mixed_bound),
    )
    return {
        "sup": sup_ratio,
        "first_diff_own": own,
        "first_diff_transverse": transverse,
        "second_diff": second,
        "mixed_diff": mixed,
    }


def stability_experiment(rho0: DensityField, sigma0: DensityField,
                         vfield: StaticField, model: CongestionModel,
                         spec: MollifierSpec, epsilon: float, t_end: float,
                         output_every: float = 0.05, cfl_mode: str = "bv",
                         cfl_safety: float = 1.0, y_sweep_state: str = "previous",
                         method: str = "direct") -> list[StabilityReport]:
    """Advance two initial data with one Roe configuration and track their distance.

    At each output time the measured L1 distance is compared against the
    Gronwall bound (initial distance times e^(t * rate(t))).
    """
    if rho0.grid != sigma0.grid:
        raise ContractViolation("the two runs must share one grid")
    grid = rho0.grid
    config = RoeConfig(epsilon=epsilon, cfl_mode=cfl_mode, cfl_safety=cfl_safety)
    dt = roe_cfl_dt(config, vfield, model, grid)
    stencils = InterfaceStencils(spec, grid, use_fft=(method == "fft"))
    inputs = make_bound_inputs(rho0, vfield, model, spec, epsilon)
    sigma0_l1 = l1_norm(sigma0)
    dist0 = float(np.sum(np.abs(rho0.values - sigma0.values)) * grid.cell_area)

    def report(t, a, b):
        dist = float(np.sum(np.abs(a.values - b.values)) * grid.cell_area)
        rate = stability_rate(inputs, sigma0_l1, t)
        with np.errstate(over="ignore"):
            bound = float(dist0 * np.exp(t * rate))
        return StabilityReport(t=t, l1_distance=dist, bound=bound, rate=rate)

    rho, sigma = rho0.copy(), sigma0.copy()
    out = [report(0.0, rho, sigma)]
    t = 0.0
    next_out = output_every
    while t < t_end - 1e-14:
        step = min(dt, t_end - t)
        for state in ("rho", "sigma"):
            fld = rho if state == "rho" else sigma
            J = build_interface_velocities(fld, spec, epsilon, stencils=stencils,
                                           method=method)
            advanced = roe_step(fld, J, vfield, model, step, config,
                                y_sweep_state=y_sweep_state, check_cfl=False)
            if state == "rho":
                rho = advanced
            else:
                sigma = advanced
        t += step
        if t >= next_out - 1e-12 or t >= t_end - 1e-14:
            out.append(report(t, rho, sigma))
            while next_out <= t + 1e-12:
                next_out += output_every
    return out
