"""Smooth Heaviside approximations and the congestion flux factor.

The collision operator is gated by f(r) = r * H(r), where H is a smooth
switch that turns on near the maximal density (the shift by rho_max is
built into H).  Two production switches are provided, an inverse-tangent
one and a clamped cubic spline, plus a degenerate always-on model for
testing.  The Lipschitz constant of f drives every CFL condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

ATAN = "atan"
SPLINE = "spline"
ALWAYS_ON = "always_on"


@dataclass
class CongestionModel:
    """Smooth congestion switch H, flux factor f(r) = r H(r), and cached L_f."""

    kind: str
    rho_max: float
    params: dict
    _h: callable
    _h_prime: callable
    _lipschitz: float | None = field(default=None, repr=False)

    def lipschitz_constant(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = _scan_lipschitz(self)
        return self._lipschitz


def heaviside(model: CongestionModel, u):
    """Switch value in [0, 1] at density u."""
    return model._h(np.asarray(u, dtype=float))


def heaviside_prime(model: CongestionModel, u):
    return model._h_prime(np.asarray(u, dtype=float))


def f_eval(model: CongestionModel, r):
    """Congestion flux factor r * H(r); rejects negative densities.

    Values in [-1e-12, 0) are treated as exact zeros so roundoff dust from
    the positivity-preserving schemes does not trip the domain check.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < -1e-12):
        raise ValueError("f is only defined for non-negative densities")
    r = np.maximum(r, 0.0)
    return r * model._h(r)


def f_prime(model: CongestionModel, r):
    """Analytic derivative H(r) + r H'(r)."""
    r = np.asarray(r, dtype=float)
    return model._h(r) + r * model._h_prime(r)


def atan_congestion(rho_max: float = 1.0, slope: float = 50.0) -> CongestionModel:
    """Inverse-tangent switch: H(u) = arctan(slope (u - rho_max)) / pi + 1/2."""
    if rho_max <= 0.0 or slope <= 0.0:
        raise ConfigurationError("rho_max and slope must be positive")

    def h(u):
        return np.arctan(slope * (u - rho_max)) / np.pi + 0.5

    def hp(u):
        return (slope / np.pi) / (1.0 + (slope * (u - rho_max)) ** 2)

    return CongestionModel(kind=ATAN, rho_max=rho_max,
                           params={"slope": slope}, _h=h, _h_prime=hp)


def spline_congestion(d_l: float = 0.5, d_r: float = 1.6, rho_max: float = 1.0) -> CongestionModel:
    """Clamped cubic-spline switch.

    Two cubic pieces on [d_l, rho_max] and [rho_max, d_r] interpolate the
    values 0, 1/2, 1 with zero end slopes; twice-continuous matching at the
    middle knot pins the one remaining free coefficient.  H is identically
    0 below d_l and 1 above d_r.  Non-monotone parameter choices are
    rejected because the schemes' variation bounds need f' >= 0.
    """
    if not (0.0 < d_l < rho_max < d_r):
        raise ConfigurationError("need 0 < d_l < rho_max < d_r")
    h0 = rho_max - d_l
    h1 = d_r - rho_max
    # interior slope of the clamped spline through (d_l,0), (rho_max,1/2), (d_r,1)
    mid_slope = 3.0 * (h1 * 0.5 / h0 + h0 * 0.5 / h1) / (2.0 * (h0 + h1))

    def _piece(u, u_lo, span, y0, y1, m0, m1):
        t = (u - u_lo) / span
        h00 = 2 * t ** 3 - 3 * t ** 2 + 1
        h10 = t ** 3 - 2 * t ** 2 + t
        h01 = -2 * t ** 3 + 3 * t ** 2
        h11 = t ** 3 - t ** 2
        return y0 * h00 + span * m0 * h10 + y1 * h01 + span * m1 * h11

    def _piece_d(u, u_lo, span, y0, y1, m0, m1):
        t = (u - u_lo) / span
        d00 = 6 * t ** 2 - 6 * t
        d10 = 3 * t ** 2 - 4 * t + 1
        d01 = -6 * t ** 2 + 6 * t
        d11 = 3 * t ** 2 - 2 * t
        return (y0 * d00 + span * m0 * d10 + y1 * d01 + span * m1 * d11) / span

    def h(u):
        u = np.asarray(u, dtype=float)
        out = np.where(u >= d_r, 1.0, 0.0)
        lo = (u > d_l) & (u < rho_max)
        hi = (u >= rho_max) & (u < d_r)
        out = np.where(lo, _piece(u, d_l, h0, 0.0, 0.5, 0.0, mid_slope), out)
        out = np.where(hi, _piece(u, rho_max, h1, 0.5, 1.0, mid_slope, 0.0), out)
        return out

    def hp(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        lo = (u > d_l) & (u < rho_max)
        hi = (u >= rho_max) & (u < d_r)
        out = np.where(lo, _piece_d(u, d_l, h0, 0.0, 0.5, 0.0, mid_slope), out)
        out = np.where(hi, _piece_d(u, rho_max, h1, 0.5, 1.0, mid_slope, 0.0), out)
        return out

    probe = np.linspace(d_l, d_r, 20_001)
    if np.any(hp(probe) < -1e-12):
        raise ConfigurationError(
            f"spline switch with d_l={d_l:g}, d_r={d_r:g} is not monotone"
        )
    return CongestionModel(kind=SPLINE, rho_max=rho_max,
                           params={"d_l": d_l, "d_r": d_r, "mid_slope": mid_slope},
                           _h=h, _h_prime=hp)


def always_on_congestion(rho_max: float = 1.0) -> CongestionModel:
    """Degenerate constant switch H = 1, so f(r) = r and L_f = 1 (test model)."""

    def h(u):
        return np.ones_like(np.asarray(u, dtype=float))

    def hp(u):
        return np.zeros_like(np.asarray(u, dtype=float))

    return CongestionModel(kind=ALWAYS_ON, rho_max=rho_max, params={}, _h=h, _h_prime=hp)


def lipschitz_constant(model: CongestionModel) -> float:
    """sup |f'| over densities, cached on the model."""
    return model.lipschitz_constant()


def _scan_lipschitz(model: CongestionModel, points: int = 1_000_001) -> float:
    r = np.linspace(0.0, 4.0 * model.rho_max, points)
    fp = f_prime(model, r)
    i = int(np.argmax(fp))
    lo = r[max(i - 1, 0)]
    hi = r[min(i + 1, points - 1)]
    return max(float(fp[i]), _golden_max(lambda x: float(f_prime(model, x)), lo, hi))


def _golden_max(fun, lo, hi, tol=1e-12, max_iter=200):
    """Plain golden-section maximisation on [lo, hi]."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a < tol * (1.0 + abs(a)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    return max(fc, fd)
