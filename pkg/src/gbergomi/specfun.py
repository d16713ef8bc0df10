"""Scalar special functions: Mittag-Leffler, M-Wright, Gauss hypergeometric.

The Gamma function itself comes from :mod:`scipy.special`.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import mpmath
import numpy as np
from scipy import integrate, special

from ._validation import check_beta, check_scalar

_SERIES_CAP = 500
_EXP_MAX = 709.0

__all__ = [
    "GreyLaw",
    "mittag_leffler",
    "log_mittag_leffler",
    "m_wright_density",
    "m_wright_moment",
    "sample_m_wright",
    "gauss_2f1",
]


# ---------------------------------------------------------------------------
# Mittag-Leffler function
# ---------------------------------------------------------------------------

def _ml_series(beta, z, cap=_SERIES_CAP):
    """Kahan-summed Taylor series. Returns (value, converged)."""
    if z == 0.0:
        return 1.0, True
    lz = math.log(abs(z))
    neg = z < 0
    s, comp = 1.0, 0.0
    for n in range(1, cap):
        t = math.exp(n * lz - special.gammaln(beta * n + 1.0))
        if neg and n % 2:
            t = -t
        y = t - comp
        tot = s + y
        comp = (tot - s) - y
        s = tot
        if abs(t) < 1e-16 * abs(s):
            return s, True
    return s, False


def _ml_remainder_quad(beta, x):
    """E_beta(x) - exp(x**(1/beta))/beta for x > 0, 0 < beta < 1.

    Integral form of the algebraic part; exact up to quadrature error.
    """
    sb, cb = math.sin(math.pi * beta), math.cos(math.pi * beta)
    inv = 1.0 / beta

    def f(r):
        return math.exp(-r**inv) / (r * r - 2.0 * r * x * cb + x * x)

    lo = integrate.quad(f, 0.0, x, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    hi = integrate.quad(f, x, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return -x * sb / (math.pi * beta) * (lo + hi)


def _ml_negative_quad(beta, x):
    """E_beta(-x) for x > 0, 0 < beta < 1, from its completely monotone integral form."""
    sb, cb = math.sin(math.pi * beta), math.cos(math.pi * beta)
    inv = 1.0 / beta

    def f(r):
        return math.exp(-r**inv) / (r * r + 2.0 * r * x * cb + x * x)

    lo = integrate.quad(f, 0.0, x, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    hi = integrate.quad(f, x, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return x * sb / (math.pi * beta) * (lo + hi)


def _ml_algebraic(beta, x):
    """Optimally truncated algebraic tail -sum_k x**-k / Gamma(1 - beta k)."""
    total, prev = 0.0, math.inf
    for k in range(1, 60):
        t = -(x ** -k) * special.rgamma(1.0 - beta * k)
        if abs(t) > prev and abs(t) > 0.0:
            break
        total += t
        if t != 0.0:
            prev = abs(t)
        if prev < 1e-18:
            break
    return total


@lru_cache(maxsize=256)
def _ml_crossover(beta):
    """Crossover points (z_series, z_tail) for positive arguments.

    Below ``z_series`` the 500-term series converges. Beyond ``z_tail`` the
    algebraic remainder is below 1e-10 of the exponential term, so the
    expansion alone is accurate. Both found by bisection.
    """
    lo, hi = 0.0, 1.0
    while _ml_series(beta, hi)[1] and hi < 1e6:
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _ml_series(beta, mid)[1]:
            lo = mid
        else:
            hi = mid
    z_series = 0.98 * lo

    def tail_small(x):
        e = x ** (1.0 / beta)
        if e > _EXP_MAX:
            return True
        return abs(_ml_remainder_quad(beta, x)) < 1e-10 * math.exp(e) / beta

    lo, hi = 1e-3, 1.0
    while not tail_small(hi):
        lo, hi = hi, 2.0 * hi
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if tail_small(mid):
            hi = mid
        else:
            lo = mid
    return z_series, hi


def _log_ml_positive(beta, x):
    """log E_beta(x) for x > 0 without overflow."""
    if beta > 1.0 - 1e-12:
        return x
    z_series, z_tail = _ml_crossover(beta)
    if x <= min(z_series, z_tail):
        return math.log(_ml_series(beta, x)[0])
    e = x ** (1.0 / beta)
    if x >= z_tail:
        rem = _ml_algebraic(beta, x)
    else:
        rem = _ml_remainder_quad(beta, x)
    lead = e - math.log(beta)
    if e > _EXP_MAX:
        return lead
    return lead + math.log1p(rem * beta * math.exp(-e))


def _ml_scalar(beta, z):
    if z == 0.0:
        return 1.0
    if beta > 1.0 - 1e-12:
        # the integral forms degenerate as sin(pi beta) -> 0; E_beta -> exp
        beta = 1.0
    if beta == 1.0:
        if z > _EXP_MAX:
            raise OverflowError(f"E_1({z}) exceeds the floating range")
        return math.exp(z)
    if z > 0.0:
        lv = _log_ml_positive(beta, z)
        if lv > _EXP_MAX:
            raise OverflowError(
                f"E_{beta}({z}) exceeds the floating range; use log_mittag_leffler"
            )
        return math.exp(lv)
    x = -z
    # the alternating series is only well conditioned while its largest
    # term, roughly exp(x**(1/beta)), stays small
    if x ** (1.0 / beta) <= 3.0:
        val, ok = _ml_series(beta, z)
        if ok:
            return val
    return _ml_negative_quad(beta, x)


def mittag_leffler(beta, z):
    """One-parameter Mittag-Leffler function ``E_beta(z)`` for real ``z``.

    Parameters
    ----------
    beta : float
        Index in (0, 1].
    z : float or array_like
        Real argument(s).

    Returns
    -------
    float or ndarray

    Raises
    ------
    OverflowError
        If the value exceeds the double range (see :func:`log_mittag_leffler`).
    """
    beta = check_beta(beta)
    if np.ndim(z) == 0:
        return _ml_scalar(beta, float(z))
    z = np.asarray(z, dtype=float)
    return np.array([_ml_scalar(beta, float(v)) for v in z.ravel()]).reshape(z.shape)


def log_mittag_leffler(beta, z):
    """Natural log of ``E_beta(z)``; finite for arguments where the value overflows."""
    beta = check_beta(beta)

    def one(v):
        if v > 0.0:
            return _log_ml_positive(beta, v)
        return math.log(_ml_scalar(beta, v))

    if np.ndim(z) == 0:
        return one(float(z))
    z = np.asarray(z, dtype=float)
    return np.array([one(float(v)) for v in z.ravel()]).reshape(z.shape)


# ---------------------------------------------------------------------------
# M-Wright law
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GreyLaw:
    """One-sided M-Wright law ``Y_beta`` used to mix the Gaussian driver.

    ``beta = 1`` is the point mass at 1.
    """

    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))

    @property
    def degenerate(self):
        return self.beta == 1.0

    def density(self, x):
        return m_wright_density(self.beta, x)

    def moment(self, kappa):
        return m_wright_moment(self, kappa)

    def laplace(self, s):
        """``E[exp(-s Y)] = E_beta(-s)``."""
        return mittag_leffler(self.beta, -np.asarray(s, dtype=float))

    def sample(self, rng, size=None):
        return sample_m_wright(self, rng, size=size)


def _as_law(law):
    return law if isinstance(law, GreyLaw) else GreyLaw(law)


def _mw_terms_log(beta, x, nmax):
    n = np.arange(nmax, dtype=float)
    with np.errstate(divide="ignore"):
        lx = np.log(x) if x > 0 else -np.inf
    return n * lx - special.gammaln(n + 1.0) + special.gammaln(beta * (n + 1.0))


def _kanter_log_a(beta, u):
    return (
        beta / (1.0 - beta) * np.log(np.sin(beta * u))
        + np.log(np.sin((1.0 - beta) * u))
        - np.log(np.sin(u)) / (1.0 - beta)
    )


def _mw_kanter(beta, x):
    """Density from the Kanter form of the stable law; smooth and bounded integrand."""
    scale = x ** (1.0 / (1.0 - beta))

    def f(u):
        la = _kanter_log_a(beta, u)
        return math.exp(la - scale * math.exp(la))

    val = integrate.quad(f, 0.0, math.pi, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return x ** (beta / (1.0 - beta)) * val / ((1.0 - beta) * math.pi)


def _mw_scalar(beta, x, cap=300):
    if x == 0.0:
        return special.rgamma(1.0 - beta)
    logs = _mw_terms_log(beta, x, cap)
    peak = float(np.max(logs))
    if logs[-1] > peak - 40.0:
        # far tail: the series needs more terms than the cap allows
        return _mw_kanter(beta, x)
    if peak < math.log(1e3):
        n = np.arange(cap, dtype=float)
        t = np.exp(logs) * np.sin(np.pi * beta * (n + 1.0)) * np.where(n % 2 == 1, -1.0, 1.0)
        s, comp = 0.0, 0.0
        for v in t:
            y = v - comp
            tot = s + y
            comp = (tot - s) - y
            s = tot
        return max(s / math.pi, 0.0)
    # cancellation: redo the same series with enough extra digits
    with mpmath.workdps(int(25 + peak / math.log(10.0))):
        b = mpmath.mpf(beta)
        mx = mpmath.mpf(x)
        tot = mpmath.mpf(0)
        for n in range(cap):
            tot += (-mx) ** n / mpmath.factorial(n) * mpmath.gamma(b * (n + 1)) * mpmath.sinpi(b * (n + 1))
        val = float(tot / mpmath.pi)
    return max(val, 0.0)


def m_wright_density(beta, x):
    """M-Wright density ``M_beta(x)`` on ``x >= 0`` for ``0 < beta < 1``.

    Series with the reflection formula applied to ``1/Gamma(1 - beta(n+1))``;
    extended precision is used automatically where the alternating series
    cancels.
    """
    beta = check_beta(beta, allow_one=False)
    if np.ndim(x) == 0:
        x = check_scalar(x, "x", lo=0.0)
        return _mw_scalar(beta, x)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("x must be finite and nonnegative")
    return np.array([_mw_scalar(beta, float(v)) for v in x.ravel()]).reshape(x.shape)


def m_wright_moment(law, kappa):
    """``E[Y_beta**kappa] = Gamma(1 + kappa) / Gamma(1 + beta kappa)`` for kappa > -1."""
    law = _as_law(law)
    kappa = check_scalar(kappa, "kappa", lo=-1.0, lo_open=True)
    return math.exp(special.gammaln(1.0 + kappa) - special.gammaln(1.0 + law.beta * kappa))


def sample_m_wright(law, rng, size=None):
    """Draw from the M-Wright law.

    Uses Kanter's representation of a one-sided ``beta``-stable variate
    ``S = (A(U) / E)**((1 - beta) / beta)`` and returns ``S**-beta``, which
    simplifies to ``(E / A(U))**(1 - beta)``.

    Parameters
    ----------
    law : GreyLaw or float
    rng : numpy.random.Generator
    size : int or tuple, optional
    """
    law = _as_law(law)
    beta = law.beta
    if beta == 1.0:
        return 1.0 if size is None else np.ones(size)
    u = np.pi * (1.0 - rng.random(size))  # (0, pi]
    u = np.where(u >= np.pi, np.nextafter(np.pi, 0.0), u)
    e = rng.standard_exponential(size)
    log_a = _kanter_log_a(beta, u)
    y = np.exp((1.0 - beta) * (np.log(e) - log_a))
    return float(y) if size is None else y


# ---------------------------------------------------------------------------
# Gauss hypergeometric 2F1
# ---------------------------------------------------------------------------

def _hyp_series(a, b, c, w, cap=4000):
    """Vectorised Kahan-summed series for |w| < 1."""
    w = np.asarray(w, dtype=float)
    s = np.ones_like(w)
    comp = np.zeros_like(w)
    t = np.ones_like(w)
    active = np.ones(w.shape, dtype=bool)
    for n in range(cap):
        t = t * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * w
        y = t - comp
        tot = s + y
        comp = np.where(active, (tot - s) - y, comp)
        s = np.where(active, tot, s)
        active &= np.abs(t) >= 1e-17 * np.abs(s)
        if not active.any():
            return s
    raise ArithmeticError("2F1 series failed to converge")


def _hyp_unit(a, b, c, w):
    """2F1 on w in [0, 1]."""
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    near = w > 0.9
    if (~near).any():
        out[~near] = _hyp_series(a, b, c, w[~near])
    if near.any():
        s = c - a - b
        wn = w[near]
        at_one = wn == 1.0
        if at_one.any() and s <= 0:
            raise ValueError(f"2F1 diverges at u=1 when c-a-b={s} <= 0")
        if abs(s - round(s)) < 1e-8:
            # connection formula degenerates; scipy handles the log case
            out[near] = special.hyp2f1(a, b, c, wn)
            return out
        om = 1.0 - wn
        g = special.gamma
        rg = special.rgamma
        A = g(c) * g(s) * rg(c - a) * rg(c - b)
        B = g(c) * g(-s) * rg(a) * rg(b)
        with np.errstate(divide="ignore", invalid="ignore"):
            first = A * _hyp_series(a, b, 1.0 - s, om)
            second = np.where(
                om > 0, B * om**s * _hyp_series(c - a, c - b, 1.0 + s, om), 0.0
            )
        out[near] = first + second
    return out


def gauss_2f1(a, b, c, u):
    """Gauss hypergeometric function ``2F1(a, b; c; u)`` for real ``u <= 1``.

    Negative arguments are mapped into [0, 1) by the Pfaff transformation
    ``2F1(a, b; c; u) = (1 - u)**-a 2F1(a, c - b; c; u / (u - 1))``; arguments
    close to one use the ``1 - u`` connection formula.
    """
    if c <= 0 and float(c).is_integer():
        raise ValueError(f"c={c} is a nonpositive integer")
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u > 1.0) or not np.all(np.isfinite(u)):
        raise ValueError("gauss_2f1 requires finite u <= 1")
    out = np.empty_like(u)
    small = np.abs(u) <= 0.5
    if small.any():
        out[small] = _hyp_series(a, b, c, u[small])
    pos = (~small) & (u > 0)
    if pos.any():
        out[pos] = _hyp_unit(a, b, c, u[pos])
    neg = (~small) & (u < 0)
    if neg.any():
        un = u[neg]
        out[neg] = (1.0 - un) ** (-a) * _hyp_unit(a, c - b, c, un / (un - 1.0))
    return float(out[0]) if scalar else out
