"""Static conveyor velocity fields and numerical sup norms of their derivatives.

The production preset models a straight belt moving at speed v_T in +x with
a diverter segment: inside a strip around the segment the velocity component
normal to the diverter is removed (smoothly, with a quintic blend, so the
field stays twice continuously differentiable), which redirects transport
along the diverter toward its free end.  Away from the strip the field is
exactly (v_T, 0).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError


def _quintic(z):
    """C^2 smoothstep: 0 at z<=0, 1 at z>=1, zero first/second derivatives at both ends."""
    z = np.clip(z, 0.0, 1.0)
    return z ** 3 * (10.0 + z * (-15.0 + 6.0 * z))


class StaticField:
    """Time-independent velocity field with cached samples and sup norms."""

    def __init__(self, evaluator, params=None):
        self.evaluator = evaluator
        self.params = dict(params or {})
        self._norms = {}
        self._samples = {}

    def __call__(self, x, y):
        return self.evaluator(x, y)

    def sample_x_interfaces(self, grid):
        """First component at x-interface points (x_i+1/2, y_j); cached per grid."""
        key = ("x", grid)
        if key not in self._samples:
            xi = grid.interfaces_x()[:, None]
            yc = grid.cell_centers_y()[None, :]
            v1, _ = self.evaluator(xi, yc)
            self._samples[key] = np.broadcast_to(np.asarray(v1, float),
                                                 (grid.nx + 1, grid.ny)).copy()
        return self._samples[key]

    def sample_y_interfaces(self, grid):
        """Second component at y-interface points (x_i, y_j+1/2); cached per grid."""
        key = ("y", grid)
        if key not in self._samples:
            xc = grid.cell_centers_x()[:, None]
            yi = grid.interfaces_y()[None, :]
            _, v2 = self.evaluator(xc, yi)
            self._samples[key] = np.broadcast_to(np.asarray(v2, float),
                                                 (grid.nx, grid.ny + 1)).copy()
        return self._samples[key]

    def norms(self, domain, samples: int = 250_000) -> dict:
        key = (tuple(domain), samples)
        if key not in self._norms:
            self._norms[key] = field_norms(self, domain, samples)
        return self._norms[key]


def field_norms(field: StaticField, domain, samples: int = 250_000) -> dict:
    """Sup norms of the field and its first/second derivatives over a rectangle.

    Dense lattice sampling; derivatives by central differences.  Derivative
    norms are inflated by 1% to stay on the safe side of the scan
    resolution; the zeroth-order sup is reported as sampled.
    """
    if samples < 10_000:
        raise ConfigurationError("need at least 1e4 sample points")
    x0, y0, x1, y1 = domain
    if not (x1 > x0 and y1 > y0):
        raise ConfigurationError("domain rectangle is degenerate")
    aspect = (x1 - x0) / (y1 - y0)
    ny = max(int(math.sqrt(samples / aspect)), 32)
    nx = max(int(samples / ny), 32)
    xs = np.linspace(x0, x1, nx)[:, None]
    ys = np.linspace(y0, y1, ny)[None, :]
    h = 1e-5 * max(x1 - x0, y1 - y0)

    def ev(x, y):
        v1, v2 = field.evaluator(x, y)
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))
        return (np.broadcast_to(np.asarray(v1, float), shape),
                np.broadcast_to(np.asarray(v2, float), shape))

    v1, v2 = ev(xs, ys)
    v1xp, v2xp = ev(xs + h, ys)
    v1xm, v2xm = ev(xs - h, ys)
    v1yp, v2yp = ev(xs, ys + h)
    v1ym, v2ym = ev(xs, ys - h)
    v1pp, v2pp = ev(xs + h, ys + h)
    v1pm, v2pm = ev(xs + h, ys - h)
    v1mp, v2mp = ev(xs - h, ys + h)
    v1mm, v2mm = ev(xs - h, ys - h)

    def d_x(fp, fm):
        return (fp - fm) / (2.0 * h)

    def d2(fp, f0, fm):
        return (fp - 2.0 * f0 + fm) / (h * h)

    def d_xy(fpp, fpm, fmp, fmm):
        return (fpp - fpm - fmp + fmm) / (4.0 * h * h)

    d1v1, d2v1 = d_x(v1xp, v1xm), d_x(v1yp, v1ym)
    d1v2, d2v2 = d_x(v2xp, v2xm), d_x(v2yp, v2ym)
    second = [
        d2(v1xp, v1, v1xm), d2(v1yp, v1, v1ym), d_xy(v1pp, v1pm, v1mp, v1mm),
        d2(v2xp, v2, v2xm), d2(v2yp, v2, v2ym), d_xy(v2pp, v2pm, v2mp, v2mm),
    ]

    inflate = 1.01
    sup = lambda a: float(np.max(np.abs(a)))
    return {
        "v1_inf": sup(v1),
        "v2_inf": sup(v2),
        "v_inf": float(np.max(np.sqrt(v1 ** 2 + v2 ** 2))),
        "d1v1_inf": inflate * sup(d1v1),
        "d2v2_inf": inflate * sup(d2v2),
        "grad_inf": inflate * max(sup(d1v1), sup(d2v1), sup(d1v2), sup(d2v2)),
        "hess_inf": inflate * max(sup(s) for s in second),
    }


def uniform_field(vx: float, vy: float = 0.0) -> StaticField:
    """Spatially constant velocity (vx, vy)."""

    def evaluator(x, y):
        shape = np.broadcast_shapes(np.shape(x), np.shape(y))
        return np.full(shape, float(vx)), np.full(shape, float(vy))

    return StaticField(evaluator, params={"preset": "uniform", "vx": vx, "vy": vy})


def conveyor_diverter_field(v_T: float, diverter, blend_width: float,
                            theta_deg: float | None = None) -> StaticField:
    """Belt at speed v_T in +x with a diverter segment removing normal transport.

    ``diverter`` is (x1, y1, x2, y2); (x2, y2) is the free end the redirected
    material slides toward.  Within distance blend_width/2 of the segment's
    line the normal velocity component is fully removed; it returns smoothly
    to zero removal at distance blend_width.  The removal also fades out
    over one blend_width at the free end (material slides off the tip) and
    builds up over one blend_width upstream of the anchored end.
    """
    if v_T <= 0.0:
        raise ConfigurationError("belt speed v_T must be positive")
    if blend_width <= 0.0:
        raise ConfigurationError("blend_width must be positive")
    x1, y1, x2, y2 = (float(c) for c in diverter)
    seg = np.array([x2 - x1, y2 - y1])
    length = float(np.hypot(*seg))
    if length <= 0.0:
        raise ConfigurationError("diverter segment is degenerate")
    tau = seg / length
    nrm = np.array([-tau[1], tau[0]])
    if theta_deg is not None:
        actual = math.degrees(math.atan2(abs(tau[1]), abs(tau[0])))
        if abs(actual - theta_deg) > 0.5:
            raise ConfigurationError(
                f"diverter segment angle {actual:.2f} deg contradicts "
                f"field.theta_deg = {theta_deg:g}"
            )
    b = float(blend_width)
    n1, n2 = float(nrm[0]), float(nrm[1])

    def evaluator(x, y):
        rx = np.asarray(x, dtype=float) - x1
        ry = np.asarray(y, dtype=float) - y1
        s = rx * tau[0] + ry * tau[1]
        d = rx * n1 + ry * n2
        across = _quintic((b - np.abs(d)) / (0.5 * b))       # 1 on the core strip
        along = _quintic((s + b) / b) * _quintic((length - s) / b)
        a = across * along
        v1 = v_T * (1.0 - a * n1 * n1)
        v2 = -v_T * a * n1 * n2
        return v1, v2

    params = {
        "preset": "conveyor_diverter", "v_T": v_T,
        "diverter": (x1, y1, x2, y2), "blend_width": b,
        "free_end": (x2, y2),
    }
    return StaticField(evaluator, params=params)


def tabulated_field(grid, v1_table, v2_table, smooth_passes: int = 2) -> StaticField:
    """Field interpolated from per-cell tables, smoothed so it is C^2.

    The tables are smoothed ``smooth_passes`` times with a one-cell Gaussian
    and then interpolated with a bicubic spline, which keeps the solver's
    smoothness hypotheses valid for arbitrary tabulated input.
    """
    from scipy.interpolate import RectBivariateSpline
    from scipy.ndimage import gaussian_filter

    v1 = np.asarray(v1_table, dtype=float)
    v2 = np.asarray(v2_table, dtype=float)
    if v1.shape != (grid.nx, grid.ny) or v2.shape != (grid.nx, grid.ny):
        raise ConfigurationError("velocity tables must match the grid shape")
    for _ in range(smooth_passes):
        v1 = gaussian_filter(v1, sigma=1.0, mode="nearest")
        v2 = gaussian_filter(v2, sigma=1.0, mode="nearest")
    xs = grid.cell_centers_x()
    ys = grid.cell_centers_y()
    kx = min(3, grid.nx - 1)
    ky = min(3, grid.ny - 1)
    s1 = RectBivariateSpline(xs, ys, v1, kx=kx, ky=ky)
    s2 = RectBivariateSpline(xs, ys, v2, kx=kx, ky=ky)

    def evaluator(x, y):
        xq = np.clip(np.asarray(x, dtype=float), xs[0], xs[-1])
        yq = np.clip(np.asarray(y, dtype=float), ys[0], ys[-1])
        xb, yb = np.broadcast_arrays(xq, yq)
        return (s1.ev(xb, yb), s2.ev(xb, yb))

    return StaticField(evaluator, params={"preset": "file"})
