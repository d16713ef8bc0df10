"""Short-maturity at-the-money limits for VIX and SPX implied volatilities.

All formulas assume a flat initial forward variance ``xi0`` (so that
``VIX_0**2 = xi0``). ``c = 1/Gamma(H + 1/2)`` throughout.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy import special

from ._validation import check_beta, check_scalar

__all__ = [
    "AsymptoticInputs",
    "j1",
    "j2",
    "j3",
    "j3_scaled_limit",
    "vix_atm_level_limit",
    "vix_atm_skew_limit",
    "vix_atm_curvature_scaled_limit",
    "spx_atm_level_limit",
    "spx_skew_scaled_limit",
    "sweep",
]

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class AsymptoticInputs:
    """Flat forward variance ``xi0_flat``, model parameters and VIX window."""

    xi0_flat: float
    H: float
    beta: float
    eta: float
    Delta: float = 1.0 / 12.0
    T_mkt: float | None = None

    def __post_init__(self):
        check_scalar(self.xi0_flat, "xi0_flat", lo=0.0, lo_open=True)
        check_scalar(self.H, "H", lo=0.0, hi=1.0, lo_open=True, hi_open=True)
        check_beta(self.beta)
        check_scalar(self.eta, "eta", lo=0.0)
        check_scalar(self.Delta, "Delta", lo=0.0, lo_open=True)
        if self.T_mkt is not None:
            check_scalar(self.T_mkt, "T_mkt", lo=0.0, lo_open=True)

    @classmethod
    def from_params(cls, p, Delta=1.0 / 12.0, T_mkt=None):
        """Build from :class:`~gbergomi.model.ModelParams`; non-flat curves are refused."""
        if not p.xi0.is_flat:
            raise ValueError("asymptotic formulas need a flat forward variance curve")
        return cls(p.xi0.level, p.H, p.beta, p.eta, Delta, T_mkt)

    @property
    def c(self):
        return float(special.rgamma(self.H + 0.5))

    def with_(self, **kw):
        return replace(self, **kw)


def _need_rough(a):
    if not a.H < 0.5:
        raise ValueError(f"limit requires H < 1/2, got H={a.H}")


def _need_curv(a):
    if not a.H < 1.0 / 6.0:
        raise ValueError(f"curvature limit requires H < 1/6, got H={a.H}")


def j1(a: AsymptoticInputs):
    """``int_0^Delta E[D_0 V_r] dr = xi0 eta c sqrt(pi) / (2 Gamma(1 + beta/2)) Delta**(H+1/2) / (H+1/2)``."""
    hp = a.H + 0.5
    return (
        a.xi0_flat * a.eta * a.c * _SQRT_PI / (2.0 * special.gamma(1.0 + 0.5 * a.beta))
        * a.Delta**hp / hp
    )


def j2(a: AsymptoticInputs):
    """``xi0 eta**2 c**2 Delta**(2H) / (2H Gamma(1 + beta))``."""
    return a.xi0_flat * (a.eta * a.c) ** 2 * a.Delta ** (2 * a.H) / (special.gamma(1.0 + a.beta) * 2 * a.H)


def _j3_pref(a):
    e = 3.0 * a.H - 0.5
    if e == 0.0:
        raise ValueError("J3 has a pole at H = 1/6")
    return a.xi0_flat * (a.eta * a.c) ** 3 * 3.0 * _SQRT_PI / (4.0 * special.gamma(1.0 + 1.5 * a.beta) * e), e


def j3(T, a: AsymptoticInputs):
    """``J3(T)``; the bracket ``(T+Delta)**(3H-1/2) - T**(3H-1/2)`` is evaluated as written."""
    T = check_scalar(T, "T", lo=0.0, lo_open=True)
    pref, e = _j3_pref(a)
    return pref * ((T + a.Delta) ** e - T**e)


def j3_scaled_limit(a: AsymptoticInputs):
    """``lim_{T -> 0} T**(1/2 - 3H) J3(T)`` for ``H < 1/6``."""
    _need_curv(a)
    pref, _ = _j3_pref(a)
    return -pref


def vix_atm_level_limit(a: AsymptoticInputs):
    """Short-time ATM VIX implied volatility ``J1 / (2 Delta VIX_0**2)``."""
    _need_rough(a)
    return j1(a) / (2.0 * a.Delta * a.xi0_flat)


def vix_atm_skew_limit(a: AsymptoticInputs):
    """Short-time ATM VIX skew ``J2 / (2 J1) - J1 / (2 Delta VIX_0**2)``."""
    _need_rough(a)
    if a.eta == 0.0:
        return 0.0
    J1 = j1(a)
    return j2(a) / (2.0 * J1) - J1 / (2.0 * a.Delta * a.xi0_flat)


def vix_atm_curvature_scaled_limit(a: AsymptoticInputs):
    """``lim T**(1/2 - 3H) C_T = 2 Delta VIX_0**2 / (3 J1**2) * lim T**(1/2 - 3H) J3(T)``."""
    _need_curv(a)
    J1 = j1(a)
    if J1 == 0.0:
        raise ZeroDivisionError("curvature limit is undefined for eta = 0")
    return 2.0 * a.Delta * a.xi0_flat / (3.0 * J1**2) * j3_scaled_limit(a)


def spx_atm_level_limit(a: AsymptoticInputs):
    """Short-time ATM SPX implied volatility ``sqrt(xi0)``."""
    return math.sqrt(a.xi0_flat)


def spx_skew_scaled_limit(a: AsymptoticInputs, rho):
    """``lim T**(1/2 - H) S_T = rho eta c sqrt(pi) / ((2H+1)(2H+3) Gamma(1 + beta/2))``.

    ``S_T`` is the ATM SPX skew in log-strike.
    """
    rho = check_scalar(rho, "rho", lo=-1.0, hi=1.0)
    H = a.H
    return rho * a.eta * a.c * _SQRT_PI / ((2 * H + 1) * (2 * H + 3) * special.gamma(1.0 + 0.5 * a.beta))


def sweep(base: AsymptoticInputs, name, values, rho=None):
    """Evaluate all limits while varying one field of ``base``.

    Returns a list of dicts with keys ``name, level, skew, curvature_scaled``
    and, if ``rho`` is given, ``spx_skew_scaled``; quantities outside their
    parameter regime are ``nan``.
    """
    rows = []
    for v in values:
        a = base.with_(**{name: float(v)})
        row = {name: float(v)}
        for key, fn in (
            ("level", vix_atm_level_limit),
            ("skew", vix_atm_skew_limit),
            ("curvature_scaled", vix_atm_curvature_scaled_limit),
        ):
            try:
                row[key] = float(fn(a))
            except (ValueError, ZeroDivisionError):
                row[key] = float("nan")
        row["spx_level"] = spx_atm_level_limit(a)
        if rho is not None:
            row["spx_skew_scaled"] = float(spx_skew_scaled_limit(a, rho))
        row["ssr_limit"] = a.H + 1.5
        rows.append(row)
    return rows
