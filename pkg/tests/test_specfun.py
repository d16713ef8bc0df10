import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from gbergomi.specfun import (
    GreyLaw,
    gauss_2f1,
    log_mittag_leffler,
    m_wright_density,
    m_wright_moment,
    mittag_leffler,
    sample_m_wright,
)


def _direct_sum(term, dps):
    """Plain summation at ``dps`` digits until terms are negligible."""
    with mpmath.workdps(dps):
        tot, n, small = mpmath.mpf(0), 0, 0
        while small < 5:
            t = term(n)
            tot += t
            small = small + 1 if abs(t) < abs(tot) * mpmath.mpf(10) ** (-dps + 5) and n > 5 else 0
            n += 1
        return tot


def ml_oracle_log(beta, z, dps=120):
    b, z = mpmath.mpf(beta), mpmath.mpf(z)
    with mpmath.workdps(dps):
        return float(mpmath.log(_direct_sum(lambda n: z**n * mpmath.rgamma(b * n + 1), dps)))


def ml_oracle(beta, z, dps=120):
    b, z = mpmath.mpf(beta), mpmath.mpf(z)
    return float(_direct_sum(lambda n: z**n * mpmath.rgamma(b * n + 1), dps))


def mw_oracle(beta, x, dps=60):
    with mpmath.workdps(dps):
        b, x = mpmath.mpf(beta), mpmath.mpf(x)
        return float(_direct_sum(
            lambda n: (-x) ** n / mpmath.factorial(n) * mpmath.rgamma(-b * n + 1 - b), dps))


class TestMittagLeffler:
    def test_beta_one_is_exp(self):
        for z in (-20.0, -1.0, 0.0, 1.0, 5.0, 30.0):
            assert mittag_leffler(1.0, z) == pytest.approx(math.exp(z), rel=1e-14)

    def test_beta_half_closed_form(self):
        # E_{1/2}(z) = exp(z^2) erfc(-z)
        for z in (-10.0, -3.0, -0.5, 0.0, 0.5, 2.0, 5.0):
            exact = special.erfcx(-z) if z < 0 else math.exp(z * z) * special.erfc(-z)
            assert mittag_leffler(0.5, z) == pytest.approx(exact, rel=1e-12)

    @pytest.mark.parametrize("beta,z", [
        (0.11, -1.2), (0.11, -0.3), (0.11, 0.4), (0.11, 1.5),
        (0.3, -2.5), (0.3, -0.3), (0.3, 1.5), (0.3, 6.0),
        (0.6, -8.0), (0.6, -2.5), (0.6, 0.4), (0.6, 6.0),
        (0.9, -8.0), (0.9, -0.3), (0.9, 1.5), (0.9, 6.0),
    ])
    def test_against_high_precision_series(self, beta, z):
        if z > 0:
            assert log_mittag_leffler(beta, z) == pytest.approx(ml_oracle_log(beta, z), rel=1e-11)
        else:
            assert mittag_leffler(beta, z) == pytest.approx(ml_oracle(beta, z), rel=1e-11, abs=1e-15)

    @pytest.mark.parametrize("beta", [0.11, 0.3, 0.7])
    @pytest.mark.parametrize("x", [3.0, 20.0, 200.0])
    def test_negative_axis_against_laplace_oracle(self, beta, x):
        # E_beta(-x) = int_0^inf exp(-x y) M_beta(y) dy, M_beta from its series
        # in 60-digit arithmetic, integrated by composite Gauss-Legendre
        b = mpmath.mpf(beta)

        def m(y):
            with mpmath.workdps(60):
                s, n, y = mpmath.mpf(0), 0, mpmath.mpf(float(y))
                while True:
                    t = (-y) ** n / mpmath.factorial(n) * mpmath.rgamma(1 - b - b * n)
                    s += t
                    n += 1
                    if n > 10 and abs(t) < mpmath.mpf(10) ** -25:
                        return float(s)

        cut = min(40.0 / x, 6.0)
        edges = np.concatenate(([0.0], cut * 2.0 ** -np.arange(10, -1, -1.0)))
        g, w = np.polynomial.legendre.leggauss(20)
        exact = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            y = 0.5 * (hi - lo) * g + 0.5 * (hi + lo)
            exact += 0.5 * (hi - lo) * sum(wi * math.exp(-x * yi) * m(yi) for wi, yi in zip(w, y))
        assert mittag_leffler(beta, -x) == pytest.approx(exact, rel=1e-10)

    def test_large_argument_asymptote(self):
        # E_beta(x) ~ exp(x^(1/beta)) / beta
        beta, x = 0.8, 40.0
        ratio = math.exp(log_mittag_leffler(beta, x) - x ** (1 / beta)) * beta
        assert ratio == pytest.approx(1.0, rel=1e-10)

    def test_overflow_raises_and_log_survives(self):
        with pytest.raises(OverflowError):
            mittag_leffler(0.5, 40.0)
        assert log_mittag_leffler(0.5, 40.0) == pytest.approx(1600.0 + math.log(2.0), rel=1e-12)

    def test_bad_beta(self):
        for b in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                mittag_leffler(b, 1.0)

    @given(st.floats(0.05, 1.0), st.floats(-30.0, 0.0))
    def test_negative_axis_is_completely_monotone_value(self, beta, z):
        # E_beta(-x) is a Laplace transform of a probability law: in (0, 1]
        v = mittag_leffler(beta, z)
        assert 0.0 < v <= 1.0 + 1e-14

    @given(st.floats(0.05, 1.0), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
    def test_monotone_increasing(self, beta, a, b):
        lo, hi = sorted((a, b))
        assert log_mittag_leffler(beta, lo) <= log_mittag_leffler(beta, hi) + 1e-13


class TestMWright:
    def test_half_closed_form(self):
        # M_{1/2}(x) = exp(-x^2/4) / sqrt(pi)
        for x in (0.0, 0.3, 1.0, 2.0, 5.0):
            assert m_wright_density(0.5, x) == pytest.approx(math.exp(-x * x / 4) / math.sqrt(math.pi), rel=1e-12)

    def test_zero(self):
        assert m_wright_density(0.5, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)

    @pytest.mark.parametrize("beta", [0.11, 0.4, 0.75, 0.9])
    @pytest.mark.parametrize("x", [0.1, 0.7, 1.3, 2.5])
    def test_against_series(self, beta, x):
        if beta == 0.9 and x > 2:
            pytest.skip("series needs ~10^4 terms here; covered by the quadrature tests")
        assert m_wright_density(beta, x) == pytest.approx(mw_oracle(beta, x), rel=1e-9)

    @pytest.mark.parametrize("beta", [0.2, 0.6, 0.9])
    def test_normalised(self, beta):
        val, _ = integrate.quad(lambda x: m_wright_density(beta, x), 0, np.inf, limit=400)
        assert val == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("beta", [0.3, 0.6, 0.9])
    @pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0])
    def test_moment_formula_matches_quadrature(self, beta, kappa):
        val, _ = integrate.quad(lambda x: x**kappa * m_wright_density(beta, x), 0, np.inf, limit=400)
        assert m_wright_moment(GreyLaw(beta), kappa) == pytest.approx(val, rel=1e-8)

    def test_moment_formula(self):
        law = GreyLaw(0.7)
        assert m_wright_moment(law, 1.0) == pytest.approx(1 / special.gamma(1.7), rel=1e-15)

    def test_degenerate_law(self):
        law = GreyLaw(1.0)
        assert law.degenerate
        assert m_wright_moment(law, 3.0) == 1.0
        assert np.all(sample_m_wright(law, np.random.default_rng(0), 10) == 1.0)

    def test_negative_x_rejected(self):
        with pytest.raises(ValueError):
            m_wright_density(0.5, -1.0)


class TestSampler:
    def test_deterministic(self):
        a = sample_m_wright(GreyLaw(0.6), np.random.default_rng(3), 1000)
        b = sample_m_wright(GreyLaw(0.6), np.random.default_rng(3), 1000)
        assert np.array_equal(a, b)

    def test_half_is_abs_normal_squared_scaled(self):
        # Y_{1/2} has density exp(-y^2/4)/sqrt(pi): Y = sqrt(2) |Z|
        y = sample_m_wright(GreyLaw(0.5), np.random.default_rng(1), 200_000)
        from scipy import stats

        assert stats.kstest(y / math.sqrt(2), stats.halfnorm.cdf).pvalue > 1e-3

    def test_laplace_transform(self):
        beta = 0.8
        y = sample_m_wright(GreyLaw(beta), np.random.default_rng(5), 200_000)
        for s in (0.5, 2.0):
            v = np.exp(-s * y)
            assert abs(v.mean() - mittag_leffler(beta, -s)) < 4 * v.std() / math.sqrt(v.size)


class TestHypergeometric:
    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.3, 4.0), st.floats(-5.0, 0.95))
    def test_against_mpmath(self, a, b, c, u):
        exact = float(mpmath.hyp2f1(a, b, c, u))
        got = float(gauss_2f1(a, b, c, u))
        assert got == pytest.approx(exact, rel=1e-9, abs=1e-12)

    def test_kernel_parameters_near_one(self):
        H = 0.07
        for u in (0.9, 0.99, 0.999999):
            exact = float(mpmath.hyp2f1(0.5 - H, 1.0, 1.5 + H, u))
            assert float(gauss_2f1(0.5 - H, 1.0, 1.5 + H, u)) == pytest.approx(exact, rel=1e-12)

    def test_elementary(self):
        # 2F1(1, 1; 2; u) = -log(1-u)/u
        u = np.array([-3.0, -0.4, 0.2, 0.7, 0.95])
        np.testing.assert_allclose(gauss_2f1(1.0, 1.0, 2.0, u), -np.log1p(-u) / u, rtol=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 1.0, 1.5, 1.5)
        with pytest.raises(ValueError):
            gauss_2f1(0.5, 1.0, -2.0, 0.3)
