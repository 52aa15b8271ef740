import numpy as np
import pytest

from beltflow import (ConfigurationError, Grid, conveyor_diverter_field,
                      field_norms, tabulated_field, uniform_field)

BENCH_DIVERTER = (0.55, 0.58, 1.03, 0.10)
DOMAIN = (0.0, 0.0, 1.6, 0.6)


@pytest.fixture(scope="module")
def preset():
    return conveyor_diverter_field(0.42, BENCH_DIVERTER, blend_width=0.06, theta_deg=45.0)


class TestConveyorPreset:
    def test_far_upstream_is_exact_belt_velocity(self, preset):
        v1, v2 = preset(0.1, 0.3)
        assert float(v1) == 0.42
        assert float(v2) == 0.0

    def test_centerline_velocity_parallel_to_diverter(self, preset):
        x1, y1, x2, y2 = BENCH_DIVERTER
        tau = np.array([x2 - x1, y2 - y1])
        tau = tau / np.linalg.norm(tau)
        nrm = np.array([-tau[1], tau[0]])
        # mid-segment point, away from the end tapers
        mid = np.array([0.5 * (x1 + x2), 0.5 * (y1 + y2)])
        v1, v2 = preset(mid[0], mid[1])
        assert abs(float(v1) * nrm[0] + float(v2) * nrm[1]) < 1e-12

    def test_speed_never_exceeds_belt_speed(self, preset):
        rng = np.random.default_rng(7)
        xs = rng.uniform(0.0, 1.6, 4000)
        ys = rng.uniform(0.0, 0.6, 4000)
        v1, v2 = preset(xs, ys)
        assert np.max(np.sqrt(v1 ** 2 + v2 ** 2)) <= 0.42 * (1 + 1e-12)

    def test_hessian_continuous_across_strip_edge(self, preset):
        # cross the outer strip edge along the normal through mid-segment and
        # compare the one-sided limits of the finite-difference Hessian
        x1, y1, x2, y2 = BENCH_DIVERTER
        tau = np.array([x2 - x1, y2 - y1])
        tau = tau / np.linalg.norm(tau)
        nrm = np.array([-tau[1], tau[0]])
        mid = np.array([0.5 * (x1 + x2), 0.5 * (y1 + y2)])
        h = 1e-5

        def second_derivative(d):
            pts = [mid + (d + off) * nrm for off in (-h, 0.0, h)]
            vals = [preset(p[0], p[1])[1] for p in pts]
            return float((vals[0] - 2 * vals[1] + vals[2]) / h ** 2)

        def one_sided_limit(side):
            ds = side * h * np.arange(2, 11)
            sec = np.array([second_derivative(0.06 + d) for d in ds])
            slope, intercept = np.polyfit(ds, sec, 1)
            return intercept

        scale = max(abs(second_derivative(d)) for d in np.linspace(0.0, 0.06, 31))
        jump = abs(one_sided_limit(+1) - one_sided_limit(-1))
        assert jump < 1e-3 * scale

    def test_degenerate_segment_rejected(self):
        with pytest.raises(ConfigurationError):
            conveyor_diverter_field(0.42, (0.5, 0.5, 0.5, 0.5), blend_width=0.05)

    def test_angle_mismatch_rejected(self):
        with pytest.raises(ConfigurationError):
            conveyor_diverter_field(0.42, BENCH_DIVERTER, 0.05, theta_deg=30.0)

    @pytest.mark.parametrize("bad", [dict(v_T=0.0), dict(blend_width=-0.1)])
    def test_bad_parameters(self, bad):
        kw = dict(v_T=0.42, diverter=BENCH_DIVERTER, blend_width=0.05)
        kw.update(bad)
        with pytest.raises(ConfigurationError):
            conveyor_diverter_field(**kw)


class TestNorms:
    def test_uniform_field_norms(self):
        f = uniform_field(0.42, 0.0)
        norms = field_norms(f, DOMAIN, samples=10_000)
        assert norms["v_inf"] == 0.42
        assert norms["v1_inf"] == 0.42
        assert norms["v2_inf"] == 0.0
        assert norms["grad_inf"] == 0.0
        assert norms["hess_inf"] == pytest.approx(0.0, abs=1e-9)

    def test_preset_speed_norm(self, preset):
        norms = preset.norms(DOMAIN)
        assert norms["v_inf"] == pytest.approx(0.42, rel=1e-2)
        assert norms["v1_inf"] <= 0.42 * (1 + 1e-12)

    def test_halving_blend_width_roughly_doubles_gradient(self):
        wide = conveyor_diverter_field(0.42, BENCH_DIVERTER, blend_width=0.08)
        narrow = conveyor_diverter_field(0.42, BENCH_DIVERTER, blend_width=0.04)
        gw = field_norms(wide, DOMAIN)["grad_inf"]
        gn = field_norms(narrow, DOMAIN)["grad_inf"]
        assert 1.5 <= gn / gw <= 2.5

    def test_norms_cached(self, preset):
        a = preset.norms(DOMAIN)
        b = preset.norms(DOMAIN)
        assert a is b

    def test_too_few_samples_rejected(self, preset):
        with pytest.raises(ConfigurationError):
            field_norms(preset, DOMAIN, samples=100)


class TestInterfaceSamples:
    def test_shapes_and_values(self, preset):
        g = Grid(nx=8, ny=5, dx=0.2, dy=0.12)
        v1 = preset.sample_x_interfaces(g)
        v2 = preset.sample_y_interfaces(g)
        assert v1.shape == (9, 5)
        assert v2.shape == (8, 6)
        expect, _ = preset(g.interfaces_x()[3], g.cell_centers_y()[2])
        assert v1[3, 2] == float(expect)

    def test_cached_per_grid(self, preset):
        g = Grid(nx=8, ny=5, dx=0.2, dy=0.12)
        assert preset.sample_x_interfaces(g) is preset.sample_x_interfaces(g)


class TestTabulatedField:
    def test_matches_smooth_table_away_from_edges(self):
        g = Grid(nx=40, ny=40, dx=0.05, dy=0.05)
        xc = g.cell_centers_x()[:, None]
        yc = g.cell_centers_y()[None, :]
        v1 = 0.3 + 0.05 * np.sin(2 * np.pi * xc / 2.0) * np.ones_like(yc)
        v2 = 0.02 * np.cos(2 * np.pi * yc / 2.0) * np.ones_like(xc)
        f = tabulated_field(g, v1, v2)
        got1, got2 = f(1.0, 1.0)
        # two smoothing passes keep slowly varying tables close to themselves
        assert float(got1) == pytest.approx(0.3 + 0.05 * np.sin(np.pi), abs=5e-3)
        assert float(got2) == pytest.approx(0.02 * np.cos(np.pi), abs=5e-3)

    def test_shape_mismatch_rejected(self):
        g = Grid(nx=8, ny=8, dx=0.1, dy=0.1)
        with pytest.raises(ConfigurationError):
            tabulated_field(g, np.zeros((4, 4)), np.zeros((4, 4)))
