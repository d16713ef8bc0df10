import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from gbergomi.asymptotics import (
    AsymptoticInputs,
    j1,
    j2,
    j3,
    j3_scaled_limit,
    spx_atm_level_limit,
    spx_skew_scaled_limit,
    sweep,
    vix_atm_curvature_scaled_limit,
    vix_atm_level_limit,
    vix_atm_skew_limit,
)
from gbergomi.model import ForwardCurve, ModelParams
from gbergomi.specfun import m_wright_density


def mixing_moment(beta, q):
    """``E[Y**q]`` by quadrature against the mixing density."""
    return integrate.quad(lambda y: y**q * m_wright_density(beta, y), 0, np.inf, epsrel=1e-12)[0]


def inputs(H=0.07, beta=0.9, eta=1.23, xi0=0.235**2, Delta=1 / 12):
    return AsymptoticInputs(xi0, H, beta, eta, Delta)


class TestIntegrals:
    @pytest.mark.parametrize("beta", [0.3, 0.9])
    def test_j1_quadrature(self, beta):
        a = inputs(beta=beta)
        val = a.xi0_flat * a.eta * a.c * mixing_moment(beta, 0.5) * integrate.quad(
            lambda r: 1.0, 0, a.Delta, weight="alg", wvar=(a.H - 0.5, 0))[0]
        assert j1(a) == pytest.approx(val, rel=1e-9)

    @pytest.mark.parametrize("beta", [0.3, 0.9])
    def test_j2_quadrature(self, beta):
        a = inputs(beta=beta)
        time = integrate.quad(lambda r: 1.0, 0, a.Delta, weight="alg", wvar=(2 * a.H - 1, 0))[0]
        val = a.xi0_flat * (a.eta * a.c) ** 2 * mixing_moment(beta, 1.0) * time
        assert j2(a) == pytest.approx(val, rel=1e-9)

    def test_j3_scaled_limit(self):
        a = inputs()
        T = 1e-12
        assert T ** (0.5 - 3 * a.H) * j3(T, a) == pytest.approx(j3_scaled_limit(a), rel=1e-3)

    def test_j3_pole(self):
        with pytest.raises(ValueError, match="pole"):
            j3(0.1, inputs(H=1 / 6))
        with pytest.raises(ValueError):
            j3_scaled_limit(inputs(H=0.2))


class TestLimits:
    def test_beta_one_reductions(self):
        a = inputs(beta=1.0)
        H, hp, hm = a.H, a.H + 0.5, a.H - 0.5
        J1 = a.xi0_flat * a.eta * a.c * a.Delta**hp / hp
        J2 = a.xi0_flat * a.eta**2 * a.c**2 * a.Delta ** (2 * H) / (2 * H)
        assert j1(a) == pytest.approx(J1, rel=1e-12)
        assert j2(a) == pytest.approx(J2, rel=1e-12)
        skew = a.eta * a.Delta**hm / (2 * special.gamma(hp)) * (hp / (2 * H) - 1 / hp)
        assert vix_atm_skew_limit(a) == pytest.approx(skew, rel=1e-12)

    def test_level_proportional_to_eta(self):
        assert vix_atm_level_limit(inputs(eta=2.0)) == pytest.approx(2 * vix_atm_level_limit(inputs(eta=1.0)), rel=1e-14)

    @given(st.floats(0.01, 0.49), st.floats(0.05, 1.0), st.floats(0.1, 3.0), st.floats(0.01, 0.2))
    def test_level_independent_of_xi0(self, H, beta, eta, xi0):
        a = AsymptoticInputs(xi0, H, beta, eta)
        b = a.with_(xi0_flat=2 * xi0)
        assert vix_atm_level_limit(a) == pytest.approx(vix_atm_level_limit(b), rel=1e-12)
        assert vix_atm_skew_limit(a) == pytest.approx(vix_atm_skew_limit(b), rel=1e-12)

    def test_eta_zero(self):
        a = inputs(eta=0.0)
        assert vix_atm_skew_limit(a) == 0.0
        with pytest.raises(ZeroDivisionError):
            vix_atm_curvature_scaled_limit(a)

    def test_curvature_regime(self):
        assert math.isfinite(vix_atm_curvature_scaled_limit(inputs(H=0.1)))
        with pytest.raises(ValueError, match="1/6"):
            vix_atm_curvature_scaled_limit(inputs(H=0.3))
        with pytest.raises(ValueError, match="1/2"):
            vix_atm_level_limit(inputs(H=0.6))

    def test_spx(self):
        a = inputs()
        assert spx_atm_level_limit(a) == pytest.approx(0.235)
        # with beta = 1 the Gaussian constant 2 rho eta c / ((2H+1)(2H+3))
        b = inputs(beta=1.0)
        assert spx_skew_scaled_limit(b, -0.9) == pytest.approx(
            2 * -0.9 * b.eta * b.c / ((2 * b.H + 1) * (2 * b.H + 3)), rel=1e-14)
        # general beta scales by E[sqrt Y]
        assert spx_skew_scaled_limit(a, -0.9) == pytest.approx(
            2 * -0.9 * a.eta * a.c * mixing_moment(0.9, 0.5) / ((2 * a.H + 1) * (2 * a.H + 3)), rel=1e-9)
        with pytest.raises(ValueError):
            spx_skew_scaled_limit(a, -1.5)


class TestInputs:
    def test_from_params(self):
        p = ModelParams(0.07, 0.9, 1.23, -0.9, ForwardCurve.scenario(1))
        assert AsymptoticInputs.from_params(p).xi0_flat == pytest.approx(0.235**2)
        with pytest.raises(ValueError):
            AsymptoticInputs.from_params(p.replace(xi0=ForwardCurve.scenario(2)))

    @pytest.mark.parametrize("kw", [dict(xi0=0.0), dict(H=0.0), dict(beta=1.2), dict(eta=-1.0), dict(Delta=0.0)])
    def test_domain(self, kw):
        with pytest.raises(ValueError):
            inputs(**kw)


def test_sweep():
    rows = sweep(inputs(), "H", [0.05, 0.1, 0.2, 0.3], rho=-0.7)
    assert [r["ssr_limit"] for r in rows] == pytest.approx([1.55, 1.6, 1.7, 1.8])
    assert math.isnan(rows[2]["curvature_scaled"]) and math.isfinite(rows[1]["curvature_scaled"])
    assert all(r["spx_level"] == pytest.approx(0.235) for r in rows)
    assert rows[0]["level"] == pytest.approx(vix_atm_level_limit(inputs(H=0.05)), rel=1e-15)
