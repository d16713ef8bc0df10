import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from gbergomi.model import ForwardCurve, ModelParams, vix_futures_upper_bound
from gbergomi.montecarlo import (
    GridSpec,
    McConfig,
    default_workers,
    markovian_nodes,
    price_from_samples,
    simulate_spot,
    simulate_spot_markovian,
    simulate_vix,
)
from gbergomi.specfun import mittag_leffler


def params(H=0.07, beta=0.9, eta=1.23, rho=-0.9, scenario=1):
    return ModelParams(H, beta, eta, rho, ForwardCurve.scenario(scenario))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(n_paths=1), dict(n_paths=5, antithetic=True), dict(seed=-1),
                                    dict(truncation_l=0), dict(workers=0)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            McConfig(**kw)

    def test_grid_spec(self):
        np.testing.assert_allclose(GridSpec(0.0, 1.0, 4).grid(), [0, 0.25, 0.5, 0.75, 1.0])
        with pytest.raises(ValueError):
            GridSpec(1.0, 1.0, 3)
        with pytest.raises(ValueError):
            GridSpec(0.0, 1.0, 0)

    def test_workers_env(self, monkeypatch):
        monkeypatch.setenv("GBERGOMI_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("GBERGOMI_WORKERS", "x")
        with pytest.raises(ValueError):
            default_workers()


class TestVixEngine:
    def test_deterministic_when_eta_zero(self):
        s = simulate_vix(params(eta=0.0), 0.2, McConfig(n_paths=10))
        np.testing.assert_allclose(s.vix, 0.235, rtol=1e-14)
        assert s.engine == "deterministic"

    def test_seed_reproducible_and_worker_independent(self):
        p = params()
        a = simulate_vix(p, 0.1, McConfig(n_paths=9000, seed=4, workers=1), n_points=20)
        b = simulate_vix(p, 0.1, McConfig(n_paths=9000, seed=4, workers=3), n_points=20)
        c = simulate_vix(p, 0.1, McConfig(n_paths=9000, seed=5, workers=1), n_points=20)
        np.testing.assert_array_equal(a.log_vix, b.log_vix)
        assert not np.array_equal(a.log_vix, c.log_vix)

    def test_second_moment_unbiased(self):
        # E[VIX^2] equals the trapezoid of the mean forward variance, known in closed form
        p = params(H=0.1, beta=0.7, eta=1.0)
        T, D, m = 0.1, 1 / 12, 30
        s = simulate_vix(p, T, McConfig(n_paths=40_000, seed=5, truncation_l=None), n_points=m)
        g = s.grid
        E = lambda x: mittag_leffler(0.7, x)
        H, b = p.H, p.b
        mean_fv = np.array([0.235**2 * E(b * (u ** (2 * H) - (u - T) ** (2 * H))) * E(b * (u - T) ** (2 * H))
                            / E(b * u ** (2 * H)) for u in g])
        w = np.full(m, g[1] - g[0])
        w[[0, -1]] *= 0.5
        exact = float(w @ mean_fv) / D
        v2 = s.vix**2
        assert abs(v2.mean() - exact) < 4 * v2.std() / math.sqrt(v2.size)

    def test_truncated_close_to_full(self):
        p = params()
        mc = McConfig(n_paths=20_000, seed=2)
        tr = simulate_vix(p, 0.25, mc).futures()
        full = simulate_vix(p, 0.25, McConfig(n_paths=20_000, seed=2, truncation_l=None)).futures()
        assert abs(tr.estimate - full.estimate) < 2 * full.stderr
        assert full.estimate < vix_futures_upper_bound(0.25, p)

    def test_antithetic_pairs(self):
        p = params(beta=1.0, eta=0.5)
        s = simulate_vix(p, 0.1, McConfig(n_paths=200, seed=1, antithetic=True, truncation_l=None), n_points=10)
        assert s.futures().n_paths == 200
        # the two halves use negated normals, so they are different but identically distributed
        assert not np.allclose(s.log_vix[:100], s.log_vix[100:])

    def test_log_futures_and_relative(self):
        s = simulate_vix(params(), 0.1, McConfig(n_paths=2000, seed=0), n_points=20)
        assert math.exp(s.log_futures()) == pytest.approx(s.futures().estimate, rel=1e-12)
        assert s.relative().mean() == pytest.approx(1.0, rel=1e-12)

    def test_grid_must_cover_window(self):
        with pytest.raises(ValueError):
            simulate_vix(params(), 0.1, McConfig(n_paths=10), grid=np.linspace(0.1, 0.15, 5))


class TestSpotEngines:
    def test_black_scholes_limit_exact_law(self):
        # eta = 0: log S_T ~ N(-sigma^2 T / 2, sigma^2 T)
        p = params(eta=0.0)
        s = simulate_spot(p, np.linspace(0, 0.5, 11), McConfig(n_paths=20_000, seed=3))
        x = np.log(s.terminal())
        sig2 = 0.235**2 * 0.5
        assert stats.kstest(x, "norm", args=(-0.5 * sig2, math.sqrt(sig2))).pvalue > 1e-3

    @pytest.mark.parametrize("beta", [0.5, 1.0])
    def test_martingale(self, beta):
        p = params(H=0.1, beta=beta, eta=1.0)
        s = simulate_spot(p, np.linspace(0, 0.5, 51), McConfig(n_paths=20_000, seed=8))
        r = s.martingale_check()
        assert abs(r.estimate - 1.0) < 4 * r.stderr
        assert r.martingale_regime == "guaranteed"

    def test_antithetic_gbm_pairs(self):
        # constant vol and rho = -1: pair sums of log S are exactly -sigma^2 T
        p = params(H=0.5, beta=1.0, eta=0.0, rho=-1.0)
        s = simulate_spot(p, np.linspace(0, 1, 5), McConfig(n_paths=100, seed=1, antithetic=True))
        x = s.log_s[:, -1]
        np.testing.assert_allclose(x[:50] + x[50:], -(0.235**2), atol=1e-12)

    def test_record_times(self):
        g = np.linspace(0, 1, 11)
        s = simulate_spot(params(), g, McConfig(n_paths=100, seed=0), record_times=[0.0, 0.5, 1.0])
        np.testing.assert_array_equal(s.at(0.0), 1.0)
        np.testing.assert_array_equal(s.at(1.0), s.terminal())
        with pytest.raises(KeyError):
            s.at(0.3)
        with pytest.raises(ValueError):
            simulate_spot(params(), g, McConfig(n_paths=10), record_times=[0.33])
        with pytest.raises(ValueError):
            simulate_spot(params(), g[1:], McConfig(n_paths=10))

    def test_worker_independent(self):
        g = np.linspace(0, 0.1, 11)
        a = simulate_spot(params(), g, McConfig(n_paths=9000, seed=2, workers=1))
        b = simulate_spot(params(), g, McConfig(n_paths=9000, seed=2, workers=2))
        np.testing.assert_array_equal(a.log_s, b.log_s)

    def test_markov_equals_cholesky_for_brownian_kernel(self):
        # H = 1/2: a single factor with zero speed is the Brownian motion itself
        p = params(H=0.5, beta=0.6, eta=0.8)
        g = np.linspace(0, 0.5, 21)
        mc = McConfig(n_paths=500, seed=9)
        a = simulate_spot(p, g, mc)
        b = simulate_spot_markovian(p, g, mc)
        np.testing.assert_allclose(a.log_s, b.log_s, atol=1e-6)

    def test_markov_martingale(self):
        p = params(H=0.1, beta=0.8, eta=1.0)
        s = simulate_spot_markovian(p, np.linspace(0, 0.5, 51), McConfig(n_paths=20_000, seed=8), N=10)
        r = s.martingale_check()
        assert abs(r.estimate - 1.0) < 4 * r.stderr
        assert s.engine == "markovian-N10"


class TestMarkovNodes:
    def test_brownian(self):
        w, x = markovian_nodes(0.5, 7)
        np.testing.assert_array_equal(w, [1.0])
        np.testing.assert_array_equal(x, [0.0])

    def test_sup_error_levels(self):
        n20 = markovian_nodes(0.07, 20)
        n40 = markovian_nodes(0.07, 40)
        assert n20.kernel_error < 1e-2
        assert n40.kernel_error < n20.kernel_error
        t = np.geomspace(1e-3, 1.0, 50)
        np.testing.assert_allclose(n20.kernel(t), t ** (0.07 - 0.5), rtol=1e-2)

    def test_l2_objective(self):
        n = markovian_nodes(0.1, 10, objective="l2")
        # the squared L2 error by direct quadrature of (K - K_N)^2
        f = lambda t: (t ** (-0.4) - float(n.kernel(t))) ** 2
        direct = integrate.quad(f, 0, 1, limit=400, points=[1e-6, 1e-4, 1e-2])[0] / (1 / 0.2)
        assert n.l2_error == pytest.approx(direct, rel=1e-3, abs=1e-10)
        assert n.l2_error < markovian_nodes(0.1, 5, objective="l2").l2_error

    def test_nodes_read_only(self):
        w, _ = markovian_nodes(0.1, 5)
        with pytest.raises(ValueError):
            w[0] = 1.0

    @pytest.mark.parametrize("kw", [dict(H=0.7, N=5), dict(H=0.1, N=0), dict(H=0.1, N=5, objective="x"),
                                    dict(H=0.1, N=5, delta=2.0)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            markovian_nodes(**kw)

    @settings(max_examples=10)
    @given(st.floats(0.02, 0.45), st.integers(2, 12))
    def test_positive_weights(self, H, N):
        w, x = markovian_nodes(H, N)
        assert np.all(w > 0) and np.all(np.diff(x) > 0) and x[0] >= 0


class TestPriceFromSamples:
    def test_constant_payoff(self):
        r = price_from_samples(np.arange(10.0), lambda s: np.ones_like(s))
        assert r.estimate == 1.0 and r.stderr == 0.0

    def test_call_put(self):
        s = np.array([0.5, 1.0, 1.5, 2.0])
        assert price_from_samples(s, ("call", 1.0)).estimate == pytest.approx(0.375)
        assert price_from_samples(s, ("put", 1.0)).estimate == pytest.approx(0.125)
        with pytest.raises(ValueError):
            price_from_samples(s, ("digital", 1.0))
        with pytest.raises(ValueError):
            price_from_samples(np.array([]))

    def test_antithetic_stderr_from_pairs(self):
        s = np.array([1.0, 2.0, 3.0, 5.0, 4.0, 3.0])
        r = price_from_samples(s, antithetic=True)
        assert r.estimate == pytest.approx(3.0) and r.stderr == 0.0
        assert r.ci() == (3.0, 3.0)
