import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qoverlap.model import (INF, ConfigError, GaussianParams, QueueModel, RateFunction,
                            gaussian_cdf, gaussian_pdf, load_model, model_from_dict, rate_f2,
                            rate_g2, sinusoidal_model)


def model(n=30, mu=1.0):
    return QueueModel(n, mu, RateFunction.constant(1.0))


# standard-normal values from mpmath at 30 digits (independent of math.erfc)
PHI_AT_1 = 0.841344746068542948585232545632
PDF_AT_0 = 0.398942280401432677939946059934
PDF_AT_1 = 0.241970724519143349797830192936


class TestGaussian:
    def test_oracle_constants(self):
        import mpmath
        mpmath.mp.dps = 30
        assert float(mpmath.ncdf(1)) == pytest.approx(PHI_AT_1, abs=1e-15)
        assert float(mpmath.npdf(0)) == pytest.approx(PDF_AT_0, abs=1e-15)
        assert float(mpmath.npdf(1)) == pytest.approx(PDF_AT_1, abs=1e-15)

    @pytest.mark.parametrize("params,expected", [
        ((0, 0, 1), 0.5),
        ((30, 20, 0), 1.0),
        ((10, 20, 0), 0.0),
        ((30, 28, 2), PHI_AT_1),
    ])
    def test_cdf(self, params, expected):
        assert gaussian_cdf(*params) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("params,expected", [
        ((0, 0, 1), PDF_AT_0),
        ((5, 5, 0), 0.0),
        ((31, 30, 1), PDF_AT_1),
    ])
    def test_pdf(self, params, expected):
        assert gaussian_pdf(*params) == pytest.approx(expected, abs=1e-12)

    def test_named_params(self):
        p = GaussianParams(point=30, mean=28, stddev=2)
        assert gaussian_cdf(*p) == pytest.approx(PHI_AT_1, abs=1e-12)

    @pytest.mark.parametrize("fn", [gaussian_cdf, gaussian_pdf])
    def test_negative_stddev(self, fn):
        with pytest.raises(ValueError):
            fn(0, 0, -1)

    @given(st.floats(-50, 50), st.floats(-50, 50), st.floats(1e-3, 20))
    def test_cdf_symmetry(self, a, b, c):
        assert gaussian_cdf(a, b, c) + gaussian_cdf(2 * b - a, b, c) == pytest.approx(1.0, abs=1e-12)


class TestRates:
    @pytest.mark.parametrize("x,n,mu,expected", [(20, 30, 1, 20), (45, 30, 1, 30), (12.5, INF, 2, 25)])
    def test_f2(self, x, n, mu, expected):
        assert rate_f2(x, model(n, mu)) == expected

    def test_g2_examples(self):
        m = model()
        assert rate_g2(20, 0, m) == 20
        assert rate_g2(30, 1, m) == pytest.approx(30 - PDF_AT_0, abs=1e-10)
        assert round(rate_g2(45, 4, m), 4) == 30.0

    def test_g2_quadrature_oracle(self):
        from scipy import integrate
        m = model()
        for x, u in [(30, 1), (25, 9), (33, 16), (10, 30)]:
            s = math.sqrt(u)
            dens = lambda y: math.exp(-0.5 * ((y - x) / s) ** 2) / (s * math.sqrt(2 * math.pi))
            val, _ = integrate.quad(lambda y: min(y, 30) * dens(y), x - 12 * s, x + 12 * s,
                                    points=[30], limit=200)
            assert rate_g2(x, u, m) == pytest.approx(val, abs=1e-8)

    def test_g2_negative_variance(self):
        with pytest.raises(ValueError):
            rate_g2(10, -1, model())

    @given(st.floats(0, 60), st.floats(0, 30))
    def test_g2_below_f2(self, x, u):
        m = model()
        assert rate_g2(x, u, m) <= rate_f2(x, m) + 1e-12

    @given(st.floats(0, 60))
    def test_g2_small_variance_limit(self, x):
        m = model()
        assert abs(rate_g2(x, 1e-12, m) - rate_f2(x, m)) < 1e-6 * m.mu * m.servers

    @pytest.mark.parametrize("u", [0.0, 0.5, 4.0, 30.0])
    def test_g2_monotone_in_x(self, u):
        m = model()
        xs = np.linspace(0, 60, 601)
        vals = [rate_g2(x, u, m) for x in xs]
        assert np.all(np.diff(vals) >= -1e-12)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0, 60), st.floats(0.1, 30))
    def test_g2_monte_carlo(self, x, u):
        rng = np.random.default_rng(1234)
        draws = np.minimum(rng.normal(x, math.sqrt(u), 100_000), 30)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        # all draws capped at n gives se = 0; the exact tail mass is then below 1e-6
        assert abs(rate_g2(x, u, model()) - draws.mean()) < 4 * se + 1e-6

    def test_g2_infinite_servers(self):
        assert rate_g2(12.0, 3.0, model(INF, 2.0)) == 24.0


class TestRateFunction:
    @given(st.floats(0, 3), st.floats(0, 1), st.floats(0, 100))
    def test_sinusoidal_bounds(self, alpha, beta, t):
        r = RateFunction.sinusoidal(alpha, beta, 1.0, 30, 0.8)
        lo, hi = (1 - beta) * 24, (1 + beta) * 24
        assert lo - 1e-9 <= r(t) <= hi + 1e-9
        assert r(t) <= r.upper_bound + 1e-9

    def test_eq4_shape(self):
        r = RateFunction.sinusoidal(0.5, 0.5, 1.0, 30, 1.0)
        t = 1.3
        assert r(t) == pytest.approx(30 * (0.5 * math.sin(0.5 * t) + 1.0))
        assert r.evaluate(np.array([t]))[0] == pytest.approx(r(t))

    def test_negative_rate_rejected(self):
        with pytest.raises(ConfigError):
            RateFunction.sinusoidal(0.5, 2.0, 1.0)

    def test_tabulated(self):
        r = RateFunction.tabulated([(0, 0), (1, 10), (3, 2)])
        assert r(0.5) == pytest.approx(5)
        assert r(2) == pytest.approx(6)
        assert r(-1) == 0 and r(9) == 2
        assert r.upper_bound == 10
        np.testing.assert_allclose(r.evaluate([0.5, 2.0]), [5, 6])

    @pytest.mark.parametrize("bps,bound", [
        ([(0, -1)], None), ([(1, 1), (0, 1)], None), ([(0, 5)], 4.0), ([], None),
    ])
    def test_tabulated_invalid(self, bps, bound):
        with pytest.raises(ConfigError):
            RateFunction.tabulated(bps, bound)

    def test_scaled(self):
        r = RateFunction.sinusoidal(0.5, 0.3, 1.0, 30, 0.8).scaled(4)
        assert r(2.0) == pytest.approx(4 * (0.3 * math.sin(1.0) + 1) * 24)
        assert r.upper_bound == pytest.approx(4 * 1.3 * 24)


class TestQueueModel:
    @pytest.mark.parametrize("kwargs", [dict(servers=0), dict(servers=2.5), dict(mu=0.0),
                                        dict(initial_count=-1)])
    def test_invalid(self, kwargs):
        base = dict(servers=30, mu=1.0, arrival=RateFunction.constant(1.0), initial_count=0.0)
        base.update(kwargs)
        with pytest.raises(ConfigError):
            QueueModel(**base)

    def test_accelerated(self):
        m = sinusoidal_model(0.5, 0.5, n=30, rho=1.0, initial_count=2.4).accelerated(4)
        assert m.servers == 120 and m.initial_count == 10
        assert m.arrival(0.0) == pytest.approx(120)

    def test_config_roundtrip(self, tmp_path):
        cfg = {"servers": 30, "mu": 1.0, "initial_count": 0,
               "arrival": {"kind": "sinusoidal", "alpha": 0.5, "beta": 0.3, "lambda": 1.0, "rho": 0.8}}
        path = tmp_path / "m.json"
        path.write_text(json.dumps(cfg))
        m = load_model(path)
        assert m == sinusoidal_model(0.5, 0.3)
        assert model_from_dict(m.to_dict()) == m

    def test_config_infinite_and_tabulated(self):
        m = model_from_dict({"servers": "inf", "mu": 2,
                             "arrival": {"kind": "tabulated", "breakpoints": [[0, 1], [5, 3]]}})
        assert m.infinite and m.arrival(2.5) == pytest.approx(2.0)
        m2 = model_from_dict({"servers": "inf", "mu": 1,
                              "arrival": {"kind": "sinusoidal", "alpha": 0.5, "beta": 2, "lambda": 10}})
        assert m2.arrival(0.0) == pytest.approx(10.0)

    @pytest.mark.parametrize("cfg", [
        {"mu": 1, "arrival": {"kind": "sinusoidal", "lambda": 1}},
        {"servers": 3, "mu": 1, "arrival": {"kind": "weird"}},
        {"servers": "three", "mu": 1, "arrival": {"kind": "sinusoidal", "lambda": 1}},
        {"servers": 3, "mu": 1, "arrival": {"kind": "sinusoidal"}},
    ])
    def test_config_errors(self, cfg):
        with pytest.raises(ConfigError):
            model_from_dict(cfg)

    def test_unreadable_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ConfigError):
            load_model(bad)
