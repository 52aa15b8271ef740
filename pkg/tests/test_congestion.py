import numpy as np
import pytest

from beltflow import (ConfigurationError, always_on_congestion, atan_congestion,
                      f_eval, f_prime, heaviside, lipschitz_constant,
                      spline_congestion)
from beltflow.congestion import heaviside_prime


class TestAtanSwitch:
    def test_half_at_rho_max(self):
        m = atan_congestion(rho_max=1.0, slope=50.0)
        assert heaviside(m, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_quarter_turn(self):
        # arctan(50 * 0.02) = arctan(1) = pi/4
        m = atan_congestion(rho_max=1.0, slope=50.0)
        assert heaviside(m, 1.02) == pytest.approx(0.75, rel=1e-14)

    def test_f_prime_at_rho_max(self):
        m = atan_congestion()
        assert float(f_prime(m, 1.0)) == pytest.approx(0.5 + 50.0 / np.pi, rel=1e-14)

    def test_lipschitz_matches_reference_value(self):
        m = atan_congestion()
        assert lipschitz_constant(m) == pytest.approx(16.42, rel=5e-3)

    def test_lipschitz_cached(self):
        m = atan_congestion()
        assert lipschitz_constant(m) is not None
        assert m._lipschitz == lipschitz_constant(m)


class TestSplineSwitch:
    def test_interpolation_conditions(self):
        m = spline_congestion(d_l=0.5, d_r=1.6, rho_max=1.0)
        assert heaviside(m, 0.5) == 0.0
        assert heaviside(m, 1.0) == pytest.approx(0.5, abs=1e-14)
        assert heaviside(m, 1.6) == 1.0
        assert heaviside_prime(m, 0.5 + 1e-13) == pytest.approx(0.0, abs=1e-10)
        assert heaviside_prime(m, 1.6 - 1e-13) == pytest.approx(0.0, abs=1e-10)
        assert heaviside(m, 0.2) == 0.0
        assert heaviside(m, 2.5) == 1.0

    def test_c1_at_middle_knot(self):
        m = spline_congestion(d_l=0.5, d_r=1.6, rho_max=1.0)
        h = 1e-9
        left = heaviside_prime(m, 1.0 - h)
        right = heaviside_prime(m, 1.0 + h)
        assert left == pytest.approx(right, rel=1e-6)
        assert float(heaviside_prime(m, 1.0)) == pytest.approx(61.0 / 44.0, rel=1e-12)

    def test_lipschitz_matches_reference_value(self):
        m = spline_congestion(d_l=0.5, d_r=1.6)
        assert lipschitz_constant(m) == pytest.approx(2.09, rel=2e-2)

    def test_below_activation_flux_vanishes(self):
        m = spline_congestion(d_l=0.5, d_r=1.6)
        assert float(f_eval(m, 0.4)) == 0.0

    def test_non_monotone_parameters_rejected(self):
        with pytest.raises(ConfigurationError):
            spline_congestion(d_l=0.999, d_r=2.0)

    def test_bad_ordering_rejected(self):
        with pytest.raises(ConfigurationError):
            spline_congestion(d_l=1.2, d_r=1.6, rho_max=1.0)


class TestFluxFactor:
    @pytest.mark.parametrize("make", [atan_congestion,
                                      lambda: spline_congestion(0.5, 1.6),
                                      always_on_congestion])
    def test_f_below_identity(self, make):
        m = make()
        r = np.linspace(0.0, 4.0, 20_001)
        f = f_eval(m, r)
        assert np.all(f <= r + 1e-14)
        assert np.all(f >= 0.0)

    @pytest.mark.parametrize("make", [atan_congestion, lambda: spline_congestion(0.5, 1.6)])
    def test_monotone_derivative(self, make):
        m = make()
        r = np.linspace(0.0, 4.0, 20_001)
        assert np.all(f_prime(m, r) >= -1e-12)

    def test_negative_density_rejected(self):
        with pytest.raises(ValueError):
            f_eval(atan_congestion(), -0.1)

    def test_roundoff_dust_tolerated(self):
        assert float(f_eval(atan_congestion(), -1e-15)) == 0.0

    @pytest.mark.parametrize("make", [atan_congestion, lambda: spline_congestion(0.5, 1.6)])
    @pytest.mark.parametrize("r", [0.3, 0.8, 1.1, 1.9])
    def test_derivative_matches_central_differences(self, make, r):
        m = make()

        def err(h):
            num = (float(f_eval(m, r + h)) - float(f_eval(m, r - h))) / (2 * h)
            return abs(num - float(f_prime(m, r)))

        e1, e2 = err(1e-4), err(5e-5)
        # second order: error ratio close to 4 (unless already at roundoff)
        assert e2 < 1e-6 or e1 / e2 == pytest.approx(4.0, rel=0.3)

    def test_always_on_lipschitz_is_one(self):
        assert lipschitz_constant(always_on_congestion()) == pytest.approx(1.0, rel=1e-12)
