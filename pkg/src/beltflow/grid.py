"""Uniform Cartesian meshes, cell-averaged density fields, and discrete norms.

The domain is a finite rectangle standing in for the plane; compactly
supported data kept away from the walls makes the box behave like free
space.  All reductions traverse the arrays in row-major order so results
are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class Grid:
    """Uniform 2D cell mesh.

    Cell (i, j) is centred at (x0 + (i + 1/2) dx, y0 + (j + 1/2) dy); the
    interface between cells i-1 and i lies at x0 + i dx, and likewise in y.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError("grid needs at least one cell per direction")
        if self.dx <= 0.0 or self.dy <= 0.0:
            raise ConfigurationError("cell sizes must be positive")

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def extent(self):
        """(width, height) of the covered rectangle."""
        return self.nx * self.dx, self.ny * self.dy

    @property
    def domain(self):
        """(x0, y0, x1, y1) corners of the covered rectangle."""
        return (self.x0, self.y0, self.x0 + self.nx * self.dx, self.y0 + self.ny * self.dy)

    def cell_centers_x(self):
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def cell_centers_y(self):
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def interfaces_x(self):
        return self.x0 + np.arange(self.nx + 1) * self.dx

    def interfaces_y(self):
        return self.y0 + np.arange(self.ny + 1) * self.dy


@dataclass
class DensityField:
    """Cell-averaged density values on a Grid at one time instant.

    ``values[i, j]`` is the average over cell (i, j); axis 0 runs along x.
    """

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.nx, self.grid.ny):
            raise ContractViolation(
                f"field shape {self.values.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("density field contains non-finite values")

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy(), self.time)


@dataclass(frozen=True)
class TimeGrid:
    """Fixed-step time discretisation of [0, t_end]."""

    dt: float
    n_steps: int
    t_end: float

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigurationError("time step must be positive")
        if self.n_steps != int(np.floor(self.t_end / self.dt)):
            raise ConfigurationError("n_steps must equal floor(t_end / dt)")

    @classmethod
    def from_horizon(cls, dt: float, t_end: float) -> "TimeGrid":
        return cls(dt=dt, n_steps=int(np.floor(t_end / dt)), t_end=t_end)


def project_initial_datum(rho0, grid: Grid, quad_order: int = 3) -> DensityField:
    """Cell-average a pointwise density function onto the grid.

    Uses a tensor Gauss-Legendre rule with ``quad_order`` points per cell
    and direction (exact for per-cell polynomials up to degree
    2*quad_order - 1, so affine data is exact from order 2 on).  ``rho0``
    must accept numpy arrays and be non-negative.
    """
    if quad_order not in (1, 2, 3):
        raise ConfigurationError("quad_order must be 1, 2 or 3")
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    nodes = 0.5 * nodes     # map to [-1/2, 1/2]
    weights = 0.5 * weights  # weights now average instead of integrate

    xc = grid.cell_centers_x()[:, None]
    yc = grid.cell_centers_y()[None, :]
    values = np.zeros((grid.nx, grid.ny))
    for na, wa in zip(nodes, weights):
        for nb, wb in zip(nodes, weights):
            sample = np.asarray(rho0(xc + na * grid.dx, yc + nb * grid.dy), dtype=float)
            if np.any(sample < 0.0):
                raise ValueError("initial datum takes negative values")
            values += wa * wb * sample
    return DensityField(grid, values, time=0.0)


def l1_norm(field: DensityField) -> float:
    """Sum of |values| * dx * dy, accumulated in fixed row-major order."""
    return float(np.sum(np.abs(field.values)) * field.grid.cell_area)


def linf_norm(field: DensityField) -> float:
    """Largest absolute cell value."""
    if field.values.size == 0:
        return 0.0
    return float(np.max(np.abs(field.values)))


def discrete_tv(field: DensityField) -> float:
    """Discrete total variation: dy * |x-jumps| + dx * |y-jumps| over neighbours."""
    v = field.values
    tvx = np.sum(np.abs(np.diff(v, axis=0))) * field.grid.dy
    tvy = np.sum(np.abs(np.diff(v, axis=1))) * field.grid.dx
    return float(tvx + tvy)


def save_snapshot(field: DensityField, path) -> None:
    """Write a field in the bit-exact snapshot format.

    First line ``# nx ny dx dy x0 y0 t`` with 17-significant-digit decimals,
    then ny lines of nx values, row j=0 (lowest y) first.
    """
    g = field.grid
    with open(path, "w") as fh:
        header = (
            f"# {g.nx} {g.ny} {g.dx:.17g} {g.dy:.17g} "
            f"{g.x0:.17g} {g.y0:.17g} {field.time:.17g}\n"
        )
        fh.write(header)
        for j in range(g.ny):
            fh.write(" ".join(f"{v:.17g}" for v in field.values[:, j]))
            fh.write("\n")


def load_snapshot(path) -> DensityField:
    """Read a field written by :func:`save_snapshot`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 8 or header[0] != "#":
            raise ConfigurationError(f"{path}: bad snapshot header")
        nx, ny = int(header[1]), int(header[2])
        dx, dy, x0, y0, t = (float(tok) for tok in header[3:])
        grid = Grid(nx=nx, ny=ny, dx=dx, dy=dy, x0=x0, y0=y0)
        values = np.empty((nx, ny))
        for j in range(ny):
            row = np.array(fh.readline().split(), dtype=float)
            if row.size != nx:
                raise ConfigurationError(f"{path}: row {j} has {row.size} values, expected {nx}")
            values[:, j] = row
    return DensityField(grid, values, time=t)
