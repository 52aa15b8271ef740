"""Non-local interface velocities: kernel convolution plus bounded normalisation.

The dynamic transport field is J = -eps * g / sqrt(1 + |g|^2) with
g = grad(eta * rho), evaluated once per time step at the cell interfaces.
The convolution is a plain lattice sum of density against the sampled
kernel gradient (density outside the domain counts as zero); a cached-FFT
fast path computes the same sums for production runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len, rfft2, irfft2

from .errors import ContractViolation
from .grid import DensityField, Grid
from .mollifier import (CELL_CENTER, KernelStencil, MollifierSpec,
                        X_INTERFACE, Y_INTERFACE, build_stencil)


@dataclass(frozen=True)
class InterfaceVelocities:
    """Bounded non-local velocity components at the two interface families.

    J1 has shape (nx+1, ny) (x-interfaces), J2 has shape (nx, ny+1)
    (y-interfaces); every entry satisfies |J| <= epsilon.
    """

    J1: np.ndarray
    J2: np.ndarray
    epsilon: float
    time_index: int = 0


def _target_layout(stencil: KernelStencil, grid: Grid):
    """Output shape and base-index offset for each sample-shift family."""
    if stencil.sample_shift == X_INTERFACE:
        return (grid.nx + 1, grid.ny), (1, 0)
    if stencil.sample_shift == Y_INTERFACE:
        return (grid.nx, grid.ny + 1), (0, 1)
    return (grid.nx, grid.ny), (0, 0)


def _check_grid(field: DensityField, stencil: KernelStencil):
    g = field.grid
    if stencil.dx != g.dx or stencil.dy != g.dy:
        raise ContractViolation(
            f"stencil spacing ({stencil.dx:g}, {stencil.dy:g}) does not match "
            f"grid spacing ({g.dx:g}, {g.dy:g})"
        )


def convolve_gradient(field: DensityField, stencil: KernelStencil):
    """Both kernel-gradient components at the stencil's sample points.

    Direct lattice sum: out[t] = dx dy * sum_cells rho[c] * sample[t - c],
    accumulated offset by offset with zero extension outside the domain.
    """
    _check_grid(field, stencil)
    grid = field.grid
    out_shape, (bx, by) = _target_layout(stencil, grid)
    kx, ky = stencil.kx, stencil.ky
    pad = np.zeros((grid.nx + 2 * kx + 2, grid.ny + 2 * ky + 2))
    pad[kx + 1:kx + 1 + grid.nx, ky + 1:ky + 1 + grid.ny] = field.values
    g1 = np.zeros(out_shape)
    g2 = np.zeros(out_shape)
    ox, oy = out_shape
    for m in range(-kx, kx + 1):
        r0 = kx + 1 - bx - m
        for p in range(-ky, ky + 1):
            c0 = ky + 1 - by - p
            block = pad[r0:r0 + ox, c0:c0 + oy]
            g1 += stencil.d_dx[m + kx, p + ky] * block
            g2 += stencil.d_dy[m + kx, p + ky] * block
    area = grid.cell_area
    return g1 * area, g2 * area


def convolve_gradient_fast(field: DensityField, stencil: KernelStencil):
    """Same sums as :func:`convolve_gradient`, via FFT convolution."""
    _check_grid(field, stencil)
    plan = ConvolutionPlan.for_stencils(field.grid, (stencil,))
    return plan.apply(field.values, stencil)


class ConvolutionPlan:
    """Cached-FFT evaluation of the stencil convolutions on one grid.

    The kernel transforms are computed once; each application needs a single
    forward transform of the density plus one inverse transform per output
    component.
    """

    def __init__(self, grid: Grid, stencils):
        self.grid = grid
        kx = max(st.kx for st in stencils)
        ky = max(st.ky for st in stencils)
        if any(st.kx != kx or st.ky != ky for st in stencils):
            raise ContractViolation("all stencils in a plan must share one cutoff")
        self.kx, self.ky = kx, ky
        self.full_shape = (grid.nx + 2 * kx, grid.ny + 2 * ky)
        self.fft_shape = (next_fast_len(self.full_shape[0]),
                          next_fast_len(self.full_shape[1]))
        self._kernels = {}
        for st in stencils:
            self._kernels[id(st)] = (
                st,
                rfft2(st.d_dx, self.fft_shape),
                rfft2(st.d_dy, self.fft_shape),
            )

    @classmethod
    def for_stencils(cls, grid: Grid, stencils):
        return cls(grid, tuple(stencils))

    def apply(self, values: np.ndarray, stencil: KernelStencil):
        entry = self._kernels.get(id(stencil))
        if entry is None:
            raise ContractViolation("stencil was not registered with this plan")
        _, kx_hat, ky_hat = entry
        v_hat = rfft2(values, self.fft_shape)
        out_shape, (bx, by) = _target_layout(stencil, self.grid)
        r0 = self.kx - bx
        c0 = self.ky - by
        area = self.grid.cell_area
        g1 = irfft2(v_hat * kx_hat, self.fft_shape)[r0:r0 + out_shape[0],
                                                    c0:c0 + out_shape[1]] * area
        g2 = irfft2(v_hat * ky_hat, self.fft_shape)[r0:r0 + out_shape[0],
                                                    c0:c0 + out_shape[1]] * area
        return np.ascontiguousarray(g1), np.ascontiguousarray(g2)


def collision_operator(g1, g2, epsilon: float):
    """Bounded push-back -eps * g / sqrt(1 + |g|^2); norm strictly below eps."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    denom = np.sqrt(1.0 + g1 ** 2 + g2 ** 2)
    return -epsilon * g1 / denom, -epsilon * g2 / denom


class InterfaceStencils:
    """The pair of interface-shifted stencils for one (spec, grid) combination."""

    def __init__(self, spec: MollifierSpec, grid: Grid, use_fft: bool = False):
        self.spec = spec
        self.grid = grid
        self.x_shift = build_stencil(spec, grid, X_INTERFACE)
        self.y_shift = build_stencil(spec, grid, Y_INTERFACE)
        self.plan = ConvolutionPlan(grid, (self.x_shift, self.y_shift)) if use_fft else None


def build_interface_velocities(field: DensityField, spec: MollifierSpec,
                               epsilon: float, stencils: InterfaceStencils | None = None,
                               method: str = "direct",
                               time_index: int = 0) -> InterfaceVelocities:
    """Evaluate the collision operator at every cell interface.

    Both gradient components are computed at each interface point because
    the normalisation divides by the full gradient norm; only the component
    normal to the interface family is kept afterwards.
    """
    if method not in ("direct", "fft"):
        raise ContractViolation(f"unknown convolution method {method!r}")
    if stencils is None:
        stencils = InterfaceStencils(spec, field.grid, use_fft=(method == "fft"))
    if method == "fft":
        if stencils.plan is None:
            stencils.plan = ConvolutionPlan(field.grid, (stencils.x_shift, stencils.y_shift))
        gx1, gx2 = stencils.plan.apply(field.values, stencils.x_shift)
        gy1, gy2 = stencils.plan.apply(field.values, stencils.y_shift)
    else:
        gx1, gx2 = convolve_gradient(field, stencils.x_shift)
        gy1, gy2 = convolve_gradient(field, stencils.y_shift)
    j1, _ = collision_operator(gx1, gx2, epsilon)
    _, j2 = collision_operator(gy1, gy2, epsilon)
    return InterfaceVelocities(J1=j1, J2=j2, epsilon=epsilon, time_index=time_index)
