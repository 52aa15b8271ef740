"""Run orchestration: configuration, time loop, experiment harnesses, file I/O.

A run is described by a flat ``key = value`` text config (dots group related
keys, ``#`` starts a comment, repeated keys accumulate).  The driver builds
the grid, congestion switch, velocity field and kernel, picks the scheme's
fixed CFL step, advances with one non-local evaluation per step, and records
diagnostics plus snapshots at a fixed output cadence.  One shortened final
step lands exactly on t_end.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .congestion import (ALWAYS_ON, ATAN, SPLINE, always_on_congestion,
                         atan_congestion, lipschitz_constant, spline_congestion)
from .diagnostics import (BoundReport, entropy_residual, appendix_checks,
                          linf_bound, make_bound_inputs, outflow_mass,
                          theoretical_bounds)
from .errors import CflViolation, ConfigurationError
from .grid import (DensityField, Grid, TimeGrid, discrete_tv, l1_norm,
                   linf_norm, load_snapshot, project_initial_datum,
                   save_snapshot)
from .interaction import InterfaceStencils, build_interface_velocities
from .lxf import LxfConfig, lxf_cfl_dt, lxf_step
from .mollifier import MollifierSpec
from .roe import RoeConfig, roe_cfl_dt, roe_step
from .velocity import StaticField, conveyor_diverter_field, tabulated_field, uniform_field

CSV_HEADER = "t,mass,linf,tv,u_rho,entropy_resid,linf_margin,tv_margin"

_KNOWN_KEYS = {
    "domain", "grid.dx", "grid.dy",
    "scheme", "epsilon", "cfl.mode", "cfl.safety", "y_sweep_state",
    "rho_max", "heaviside.kind", "heaviside.slope", "heaviside.d_l", "heaviside.d_r",
    "mollifier.sigma", "mollifier.truncation_radius",
    "field.preset", "field.v_T", "field.theta_deg", "field.diverter",
    "field.blend_width", "field.file",
    "init.bump", "init.patch", "init.random_bumps", "init.normalize", "init.file",
    "seed", "quad_order",
    "t_end", "output_every", "output.dir", "output.snapshots",
    "nonlocal.fast", "outflow.x_d",
    "diagnostics.entropy", "diagnostics.entropy_kappa", "diagnostics.appendix",
}

_REPEATABLE = {"init.bump", "init.patch"}


def parse_config_text(text: str) -> dict:
    """Flat key = value parser; repeated keys accumulate into lists."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigurationError(f"config line {lineno}: unknown key {key!r}")
        if key in _REPEATABLE:
            out.setdefault(key, []).append(value)
        elif key in out:
            raise ConfigurationError(f"config line {lineno}: duplicate key {key!r}")
        else:
            out[key] = value
    return out


def _as_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {value!r}")


def _floats(value: str, count: int, key: str):
    parts = value.split()
    if len(parts) != count:
        raise ConfigurationError(f"{key}: expected {count} numbers, got {value!r}")
    return tuple(float(p) for p in parts)


@dataclass
class RunConfig:
    """Fully resolved run description."""

    domain: tuple = (0.0, 0.0, 1.6, 0.6)
    dx: float = 0.01
    dy: float | None = None
    scheme: str = "roe"
    epsilon: float = 0.83
    cfl_mode: str = "bv"
    cfl_safety: float = 1.0
    y_sweep_state: str = "previous"
    rho_max: float = 1.0
    heaviside_kind: str = ATAN
    heaviside_slope: float = 50.0
    heaviside_d_l: float = 0.5
    heaviside_d_r: float = 1.6
    sigma: float = 10_000.0
    truncation_radius: float | None = None
    field_preset: str = "conveyor_diverter"
    v_T: float = 0.42
    theta_deg: float | None = None
    diverter: tuple = (0.55, 0.58, 1.03, 0.10)
    blend_width: float = 0.04
    field_file: str | None = None
    bumps: list = dc_field(default_factory=list)      # (x, y, mass, width)
    patches: list = dc_field(default_factory=list)    # (x1, y1, x2, y2, value)
    random_bumps: int = 0
    normalize: bool = True
    init_file: str | None = None
    seed: int = 0
    quad_order: int = 3
    t_end: float = 1.5
    output_every: float = 0.05
    output_dir: str = "out"
    write_snapshots: bool = True
    fast_convolution: bool = True
    outflow_x_d: float | None = None
    diag_entropy: bool = False
    entropy_kappa: float = 0.5
    diag_appendix: bool = False

    def __post_init__(self):
        if self.dy is None:
            self.dy = self.dx
        if self.scheme not in ("roe", "lxf"):
            raise ConfigurationError(f"scheme must be roe or lxf, got {self.scheme!r}")
        if self.t_end <= 0.0:
            raise ConfigurationError("t_end must be positive")
        if self.output_every <= 0.0:
            raise ConfigurationError("output_every must be positive")
        for name in ("init_file", "field_file"):
            path = getattr(self, name)
            if path is not None and not Path(path).is_file():
                raise ConfigurationError(f"{name.replace('_', '.')}: no such file {path!r}")
        if self.init_file is not None and (self.bumps or self.patches or self.random_bumps):
            raise ConfigurationError("init.file excludes bump/patch/random entries")

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        kw = {}
        take = raw.get
        if "domain" in raw:
            kw["domain"] = _floats(raw["domain"], 4, "domain")
        if "grid.dx" in raw:
            kw["dx"] = float(take("grid.dx"))
        if "grid.dy" in raw:
            kw["dy"] = float(take("grid.dy"))
        for key, attr, conv in (
            ("scheme", "scheme", str), ("epsilon", "epsilon", float),
            ("cfl.mode", "cfl_mode", str), ("cfl.safety", "cfl_safety", float),
            ("y_sweep_state", "y_sweep_state", str),
            ("rho_max", "rho_max", float),
            ("heaviside.kind", "heaviside_kind", str),
            ("heaviside.slope", "heaviside_slope", float),
            ("heaviside.d_l", "heaviside_d_l", float),
            ("heaviside.d_r", "heaviside_d_r", float),
            ("mollifier.sigma", "sigma", float),
            ("mollifier.truncation_radius", "truncation_radius", float),
            ("field.preset", "field_preset", str),
            ("field.v_T", "v_T", float),
            ("field.theta_deg", "theta_deg", float),
            ("field.blend_width", "blend_width", float),
            ("field.file", "field_file", str),
            ("init.random_bumps", "random_bumps", int),
            ("init.file", "init_file", str),
            ("seed", "seed", int), ("quad_order", "quad_order", int),
            ("t_end", "t_end", float), ("output_every", "output_every", float),
            ("output.dir", "output_dir", str),
            ("outflow.x_d", "outflow_x_d", float),
            ("diagnostics.entropy_kappa", "entropy_kappa", float),
        ):
            if key in raw:
                kw[attr] = conv(raw[key])
        for key, attr in (
            ("init.normalize", "normalize"), ("output.snapshots", "write_snapshots"),
            ("nonlocal.fast", "fast_convolution"), ("diagnostics.entropy", "diag_entropy"),
            ("diagnostics.appendix", "diag_appendix"),
        ):
            if key in raw:
                kw[attr] = _as_bool(raw[key], key)
        if "field.diverter" in raw:
            kw["diverter"] = _floats(raw["field.diverter"], 4, "field.diverter")
        kw["bumps"] = [_floats(v, 4, "init.bump") for v in raw.get("init.bump", [])]
        kw["patches"] = [_floats(v, 5, "init.patch") for v in raw.get("init.patch", [])]
        return cls(**kw)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_text(Path(path).read_text())

    def replace(self, **changes) -> "RunConfig":
        import dataclasses

        return dataclasses.replace(self, **changes)

    # --- builders -------------------------------------------------------

    def build_grid(self) -> Grid:
        x0, y0, x1, y1 = self.domain
        width, height = x1 - x0, y1 - y0
        if width <= 0 or height <= 0:
            raise ConfigurationError("domain rectangle is degenerate")
        nx = round(width / self.dx)
        ny = round(height / self.dy)
        if abs(nx * self.dx - width) > 1e-9 * width or nx < 1:
            raise ConfigurationError(f"domain width {width:g} is not a multiple of dx {self.dx:g}")
        if abs(ny * self.dy - height) > 1e-9 * height or ny < 1:
            raise ConfigurationError(f"domain height {height:g} is not a multiple of dy {self.dy:g}")
        return Grid(nx=nx, ny=ny, dx=self.dx, dy=self.dy, x0=x0, y0=y0)

    def build_model(self):
        if self.heaviside_kind == ATAN:
            return atan_congestion(rho_max=self.rho_max, slope=self.heaviside_slope)
        if self.heaviside_kind == SPLINE:
            return spline_congestion(d_l=self.heaviside_d_l, d_r=self.heaviside_d_r,
                                     rho_max=self.rho_max)
        if self.heaviside_kind == ALWAYS_ON:
            return always_on_congestion(rho_max=self.rho_max)
        raise ConfigurationError(f"unknown heaviside.kind {self.heaviside_kind!r}")

    def build_spec(self) -> MollifierSpec:
        return MollifierSpec(sigma=self.sigma, truncation_radius=self.truncation_radius)

    def build_vfield(self, grid: Grid | None = None) -> StaticField:
        if self.field_preset == "uniform":
            return uniform_field(self.v_T, 0.0)
        if self.field_preset == "conveyor_diverter":
            return conveyor_diverter_field(self.v_T, self.diverter, self.blend_width,
                                           theta_deg=self.theta_deg)
        if self.field_preset == "file":
            if self.field_file is None:
                raise ConfigurationError("field.preset = file requires field.file")
            if grid is None:
                grid = self.build_grid()
            v1_snap = load_snapshot(self.field_file)
            if v1_snap.grid != grid:
                raise ConfigurationError("tabulated field grid does not match the run grid")
            # companion file with suffix .v2 holds the second component
            v2_path = str(self.field_file) + ".v2"
            if not Path(v2_path).is_file():
                raise ConfigurationError(f"missing second-component table {v2_path!r}")
            v2_snap = load_snapshot(v2_path)
            return tabulated_field(grid, v1_snap.values, v2_snap.values)
        raise ConfigurationError(f"unknown field.preset {self.field_preset!r}")

    def build_initial(self, grid: Grid) -> DensityField:
        if self.init_file is not None:
            snap = load_snapshot(self.init_file)
            if snap.grid != grid:
                raise ConfigurationError("init.file grid does not match the run grid")
            field = DensityField(grid, snap.values.copy(), time=0.0)
        else:
            bumps = list(self.bumps)
            if self.random_bumps:
                rng = np.random.default_rng(self.seed)
                x0, y0, x1, y1 = self.domain
                for _ in range(self.random_bumps):
                    bx = x0 + (0.15 + 0.5 * rng.random()) * (x1 - x0)
                    by = y0 + (0.2 + 0.6 * rng.random()) * (y1 - y0)
                    bumps.append((bx, by, 0.01 + 0.04 * rng.random(),
                                  (3.0 + 3.0 * rng.random()) * self.dx))
            patches = list(self.patches)

            def rho0(x, y):
                total = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
                for cx, cy, mass, width in bumps:
                    total += mass / (2.0 * np.pi * width ** 2) * np.exp(
                        -((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * width ** 2))
                for px0, py0, px1, py1, value in patches:
                    inside = (x >= px0) & (x <= px1) & (y >= py0) & (y <= py1)
                    total += value * inside
                return total

            field = project_initial_datum(rho0, grid, quad_order=self.quad_order)
        if self.normalize:
            peak = linf_norm(field)
            if peak > 0.0:
                field = DensityField(grid, field.values * (self.rho_max / peak), time=0.0)
        return field

    def resolve_outflow_x(self) -> float:
        if self.outflow_x_d is not None:
            return self.outflow_x_d
        if self.field_preset == "conveyor_diverter":
            return self.diverter[2]
        return self.domain[2]


@dataclass
class RunReport:
    """Recorded time series, snapshot index and wall-clock phase timings."""

    rows: list
    bound_reports: list
    snapshots: list
    timings: dict
    resolved: dict
    out_dir: str | None


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_diagnostics_csv(rows, path):
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[col]) for col in CSV_HEADER.split(",")) + "\n")


def write_manifest(resolved: dict, path):
    with open(path, "w") as fh:
        for key in sorted(resolved):
            fh.write(f"{key} = {_fmt(resolved[key])}\n")


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def advance(config: RunConfig) -> RunReport:
    """Run one simulation to t_end, recording diagnostics at the output cadence."""
    timings = {"convolution": 0.0, "sweeps": 0.0, "diagnostics": 0.0, "io": 0.0}
    grid = config.build_grid()
    model = config.build_model()
    vfield = config.build_vfield(grid)
    spec = config.build_spec()
    field = config.build_initial(grid)

    if config.scheme == "roe":
        scheme_cfg = RoeConfig(epsilon=config.epsilon, cfl_mode=config.cfl_mode,
                               cfl_safety=config.cfl_safety)
        dt = roe_cfl_dt(scheme_cfg, vfield, model, grid)
        alpha = beta = None
    else:
        scheme_cfg = LxfConfig(epsilon=config.epsilon, cfl_safety=config.cfl_safety)
        dt, alpha, beta = lxf_cfl_dt(scheme_cfg, vfield, model, grid)
    time_grid = TimeGrid.from_horizon(dt, config.t_end)

    method = "fft" if config.fast_convolution else "direct"
    stencils = InterfaceStencils(spec, grid, use_fft=config.fast_convolution)
    inputs = make_bound_inputs(field, vfield, model, spec, config.epsilon)

    mass0 = l1_norm(field)
    x_d = config.resolve_outflow_x()
    upstream_mask = grid.cell_centers_x() <= x_d
    upstream0 = float(np.sum(field.values[upstream_mask, :]) * grid.cell_area)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows: list = []
    bound_reports: list = []
    snapshots: list = []

    def record(t, prev_field, half_field, cur_field, J, step_dt, step_index):
        t_diag = time.perf_counter()
        mass = l1_norm(cur_field)
        linf_val = linf_norm(cur_field)
        tv_val = discrete_tv(cur_field)
        u_rho = (outflow_mass(cur_field, x_d, upstream0) if upstream0 > 0.0 else 0.0)
        ent = float("nan")
        if (config.diag_entropy and config.scheme == "roe" and prev_field is not None):
            ent = entropy_residual(prev_field, half_field, cur_field, J, vfield,
                                   model, config.entropy_kappa, step_dt)
        bounds = theoretical_bounds(inputs, t, config.scheme)
        linf_margin = linf_bound(inputs, t, config.scheme) - linf_val
        tv_margin = bounds["tv_bound"] - tv_val
        if prev_field is None:
            tc_margin = float("nan")
        else:
            step_l1 = float(np.sum(np.abs(cur_field.values - prev_field.values))
                            * grid.cell_area)
            prev_bounds = theoretical_bounds(inputs, t - step_dt, config.scheme)
            tc_margin = 2.0 * step_dt * prev_bounds["time_rate"] - step_l1
        appendix_worst = float("nan")
        if config.diag_appendix:
            ratios = appendix_checks(cur_field, spec, config.epsilon,
                                     eta_norms=inputs.eta_norms,
                                     stencils=stencils, method=method)
            appendix_worst = max(ratios.values())
        mass_drift = abs(mass - mass0) / mass0 if mass0 > 0.0 else abs(mass)
        rows.append({
            "t": t, "mass": mass, "linf": linf_val, "tv": tv_val, "u_rho": u_rho,
            "entropy_resid": ent, "linf_margin": linf_margin, "tv_margin": tv_margin,
        })
        bound_reports.append(BoundReport(
            time=t, mass_drift=mass_drift, linf_margin=linf_margin,
            tv_margin=tv_margin, time_continuity_margin=tc_margin,
            entropy_max_positive_residual=ent, appendix_max_violation=appendix_worst,
        ))
        timings["diagnostics"] += time.perf_counter() - t_diag
        if config.write_snapshots:
            t_io = time.perf_counter()
            path = out_dir / f"snapshot_{len(snapshots):04d}.txt"
            save_snapshot(cur_field, path)
            snapshots.append((t, str(path)))
            timings["io"] += time.perf_counter() - t_io

    record(0.0, None, None, field, None, dt, 0)

    t = 0.0
    next_out = config.output_every
    step_index = 0
    need_intermediate = config.diag_entropy and config.scheme == "roe"
    while t < config.t_end - 1e-14:
        step_dt = min(dt, config.t_end - t)
        t_conv = time.perf_counter()
        J = build_interface_velocities(field, spec, config.epsilon,
                                       stencils=stencils, method=method,
                                       time_index=step_index)
        timings["convolution"] += time.perf_counter() - t_conv
        t_sweep = time.perf_counter()
        prev = field
        half = None
        try:
            if config.scheme == "roe":
                stepped = roe_step(field, J, vfield, model, step_dt, scheme_cfg,
                                   y_sweep_state=config.y_sweep_state,
                                   return_intermediate=need_intermediate)
            else:
                stepped = lxf_step(field, J, vfield, model, scheme_cfg, step_dt,
                                   y_sweep_state=config.y_sweep_state,
                                   return_intermediate=need_intermediate)
        except ValueError as exc:
            raise RuntimeError(f"non-finite state at step {step_index}: {exc}") from exc
        field, half = stepped if need_intermediate else (stepped, None)
        timings["sweeps"] += time.perf_counter() - t_sweep
        t += step_dt
        step_index += 1
        if t >= next_out - 1e-12 or t >= config.t_end - 1e-14:
            record(t, prev, half, field, J, step_dt, step_index)
            while next_out <= t + 1e-12:
                next_out += config.output_every

    resolved = {
        "version": __version__,
        "scheme": config.scheme,
        "dt": dt,
        "n_steps": time_grid.n_steps,
        "steps_taken": step_index,
        "t_end": config.t_end,
        "epsilon": config.epsilon,
        "L_f": lipschitz_constant(model),
        "sigma": spec.sigma,
        "truncation_radius": spec.truncation_radius,
        "rho_max": config.rho_max,
        "heaviside_kind": config.heaviside_kind,
        "cfl_mode": config.cfl_mode,
        "cfl_safety": config.cfl_safety,
        "y_sweep_state": config.y_sweep_state,
        "nx": grid.nx, "ny": grid.ny, "dx": grid.dx, "dy": grid.dy,
        "x0": grid.x0, "y0": grid.y0,
        "mass0": mass0,
        "outflow_x_d": x_d,
        "entropy_kappa": config.entropy_kappa,
        "seed": config.seed,
        "convolution": method,
        "v1_inf": inputs.v_norms["v1_inf"],
        "v2_inf": inputs.v_norms["v2_inf"],
    }
    if alpha is not None:
        resolved["alpha"] = alpha
        resolved["beta"] = beta

    t_io = time.perf_counter()
    write_diagnostics_csv(rows, out_dir / "diagnostics.csv")
    write_manifest(resolved, out_dir / "manifest.txt")
    timings["io"] += time.perf_counter() - t_io
    return RunReport(rows=rows, bound_reports=bound_reports, snapshots=snapshots,
                     timings=timings, resolved=resolved, out_dir=str(out_dir))


def _worker_count() -> int:
    env = os.environ.get("BELTFLOW_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigurationError(f"BELTFLOW_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ConfigurationError("BELTFLOW_THREADS must be at least 1")
        return n
    return os.cpu_count() or 1


def compare_schemes(config: RunConfig):
    """Run both schemes on identical data and write aligned outflow/norm series."""
    configs = {
        name: config.replace(scheme=name,
                             output_dir=str(Path(config.output_dir) / name))
        for name in ("roe", "lxf")
    }
    with ThreadPoolExecutor(max_workers=min(2, _worker_count())) as pool:
        futures = {name: pool.submit(advance, cfg) for name, cfg in configs.items()}
        reports = {name: fut.result() for name, fut in futures.items()}

    t_roe = np.array([row["t"] for row in reports["roe"].rows])
    series = {}
    for name, rep in reports.items():
        ts = np.array([row["t"] for row in rep.rows])
        series[name] = {
            "u": np.interp(t_roe, ts, [row["u_rho"] for row in rep.rows]),
            "linf": np.interp(t_roe, ts, [row["linf"] for row in rep.rows]),
        }
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "compare.csv", "w") as fh:
        fh.write("t,u_rho_roe,u_rho_lxf,linf_roe,linf_lxf\n")
        for i, t in enumerate(t_roe):
            fh.write(",".join(_fmt(float(v)) for v in (
                t, series["roe"]["u"][i], series["lxf"]["u"][i],
                series["roe"]["linf"][i], series["lxf"]["linf"][i])) + "\n")
    return reports["roe"], reports["lxf"]


def convergence_study(config: RunConfig, levels) -> dict:
    """Self-convergence of the outflow series over grid refinement levels.

    Levels must halve dx from one to the next; each level runs with its own
    CFL step, the outflow series is interpolated onto the finest level's
    output times, and L1/L2/Linf errors against the finest level are
    reported with empirical orders.
    """
    levels = sorted((float(lv) for lv in levels), reverse=True)
    if len(levels) < 3:
        raise ConfigurationError("convergence study needs at least 3 levels")
    for coarse, fine in zip(levels, levels[1:]):
        if abs(coarse / fine - 2.0) > 1e-9:
            raise ConfigurationError(
                f"levels must halve dx: {coarse:g} -> {fine:g} is not nested")
    configs = [
        config.replace(dx=lv, dy=lv,
                       output_dir=str(Path(config.output_dir) / f"level_{i}"))
        for i, lv in enumerate(levels)
    ]
    for cfg in configs:
        cfg.build_grid()  # fail fast on non-divisible domains
    with ThreadPoolExecutor(max_workers=min(len(configs), _worker_count())) as pool:
        reports = list(pool.map(advance, configs))

    ref = reports[-1]
    t_ref = np.array([row["t"] for row in ref.rows])
    u_ref = np.array([row["u_rho"] for row in ref.rows])
    errors = {"l1": [], "l2": [], "linf": []}
    for rep in reports[:-1]:
        ts = np.array([row["t"] for row in rep.rows])
        us = np.array([row["u_rho"] for row in rep.rows])
        diff = np.interp(t_ref, ts, us) - u_ref
        errors["l1"].append(float(np.trapezoid(np.abs(diff), t_ref)))
        errors["l2"].append(float(np.sqrt(np.trapezoid(diff ** 2, t_ref))))
        errors["linf"].append(float(np.max(np.abs(diff))))
    orders = {
        norm: [float(np.log2(errs[i] / errs[i + 1])) if errs[i + 1] > 0 else float("nan")
               for i in range(len(errs) - 1)]
        for norm, errs in errors.items()
    }
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "convergence.csv", "w") as fh:
        fh.write("dx,l1,l2,linf\n")
        for i, lv in enumerate(levels[:-1]):
            fh.write(",".join(_fmt(v) for v in (
                lv, errors["l1"][i], errors["l2"][i], errors["linf"][i])) + "\n")
    return {"levels": levels, "errors": errors, "orders": orders,
            "reports": reports}


def audit_run(out_dir) -> list:
    """Re-check the recorded invariants of a finished run; returns violations."""
    out_dir = Path(out_dir)
    csv_path = out_dir / "diagnostics.csv"
    manifest_path = out_dir / "manifest.txt"
    if not csv_path.is_file():
        raise ConfigurationError(f"no diagnostics.csv under {out_dir}")
    manifest = read_manifest(manifest_path) if manifest_path.is_file() else {}

    lines = csv_path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        return [f"diagnostics header mismatch: {lines[0] if lines else '<empty>'}"]
    data = {col: [] for col in CSV_HEADER.split(",")}
    for line in lines[1:]:
        for col, tok in zip(CSV_HEADER.split(","), line.split(",")):
            data[col].append(float(tok))
    violations = []
    ts = np.array(data["t"])
    if np.any(np.diff(ts) <= 0):
        violations.append("output times are not strictly increasing")
    mass = np.array(data["mass"])
    if mass.size:
        scale = max(abs(mass[0]), 1e-300)
        drift = np.max(np.abs(mass - mass[0])) / scale
        if drift > 1e-8:
            violations.append(f"mass conservation violated: relative drift {drift:.3e}")
    for col, label in (("linf_margin", "max-norm bound"), ("tv_margin", "variation bound")):
        vals = np.array(data[col])
        finite = vals[np.isfinite(vals)]
        if finite.size and finite.min() < -1e-8:
            violations.append(f"{label} violated: margin {finite.min():.3e}")
    if manifest.get("y_sweep_state") == "intermediate":
        ent = np.array(data["entropy_resid"])
        finite = ent[np.isfinite(ent)]
        kappa = float(manifest.get("entropy_kappa", 0.0))
        if finite.size and finite.max() > 1e-8 * (1.0 + abs(kappa)):
            violations.append(f"entropy condition violated: residual {finite.max():.3e}")
    return violations
