"""Black-Scholes pricing, implied volatility, Monte Carlo smiles and the arctan smile fit."""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import linalg, optimize
from scipy.interpolate import CubicSpline
from scipy.special import ndtr
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_1d, check_scalar

__all__ = [
    "BsInputs",
    "SmileFit",
    "AtmMetrics",
    "ArctanSmile",
    "bs_call",
    "bs_vega",
    "implied_vol",
    "smile_from_samples",
    "fit_arctan_smile",
    "atm_metrics",
    "spline_smile",
]


@dataclass(frozen=True)
class BsInputs:
    """Black-Scholes inputs: time ``t``, log-price ``x``, log-strike ``k``, vol, maturity ``T``."""

    t: float
    x: float
    k: float
    sigma: float
    T: float

    def __post_init__(self):
        if self.T < self.t:
            raise ValueError("maturity must not precede t")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")

    @property
    def tau(self):
        return self.T - self.t


def _bs(x, k, sigma, tau):
    x, k, sigma, tau = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, k, sigma, tau)))
    sq = sigma * np.sqrt(tau)
    intrinsic = np.maximum(np.exp(x) - np.exp(k), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = (x - k) / sq + 0.5 * sq
        dm = dp - sq
        price = np.exp(x) * ndtr(dp) - np.exp(k) * ndtr(dm)
    # rounding can push deep in-the-money prices a hair below intrinsic
    return np.where(sq > 0, np.maximum(price, intrinsic), intrinsic)


def bs_call(i, k=None, sigma=None, tau=None):
    """Black-Scholes call price ``e^x N(d+) - e^k N(d-)`` with unit discounting.

    Accepts either a :class:`BsInputs` or arrays ``(x, k, sigma, tau)``. When
    ``sigma * sqrt(tau) = 0`` the intrinsic value ``(e^x - e^k)^+`` is returned.
    """
    if isinstance(i, BsInputs):
        return float(_bs(i.x, i.k, i.sigma, i.tau))
    out = _bs(i, k, sigma, tau)
    return float(out) if out.ndim == 0 else out


def bs_vega(x, k, sigma, tau):
    sq = sigma * np.sqrt(tau)
    dp = (x - k) / sq + 0.5 * sq
    return np.exp(x) * np.exp(-0.5 * dp * dp) / math.sqrt(2.0 * math.pi) * np.sqrt(tau)


def implied_vol(price, t, x, k, T, lo=1e-8, hi=5.0):
    """Black-Scholes implied volatility of a call.

    Bisection on ``[lo, hi]`` followed by a few guarded Newton steps.

    Parameters
    ----------
    price : float or array_like
        Call price(s), in ``[(e^x - e^k)^+, e^x)``.
    t, x, k, T : float or array_like
        Valuation time, log-forward, log-strike and maturity.

    Returns
    -------
    float or ndarray
        0 where the price equals intrinsic value.

    Raises
    ------
    ValueError
        If a price lies outside the no-arbitrage band; the message names the bound.
    """
    price, t, x, k, T = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (price, t, x, k, T)))
    scalar = price.ndim == 0
    price, t, x, k, T = (np.atleast_1d(a).astype(float) for a in (price, t, x, k, T))
    tau = T - t
    if np.any(tau <= 0):
        raise ValueError("implied volatility needs T > t")
    intrinsic = np.maximum(np.exp(x) - np.exp(k), 0.0)
    upper = np.exp(x)
    below = price < intrinsic * (1 - 1e-15) - 1e-300
    if np.any(below):
        j = int(np.flatnonzero(below)[0])
        raise ValueError(f"price {price[j]} below the lower bound (e^x - e^k)^+ = {intrinsic[j]}")
    above = price >= upper
    if np.any(above):
        j = int(np.flatnonzero(above)[0])
        raise ValueError(f"price {price[j]} not below the upper bound e^x = {upper[j]}")
    at_floor = price <= intrinsic
    a = np.full(price.shape, lo)
    b = np.full(price.shape, hi)
    fb = _bs(x, k, b, tau) - price
    if np.any((fb < 0) & ~at_floor):
        j = int(np.flatnonzero((fb < 0) & ~at_floor)[0])
        raise ValueError(f"price {price[j]} needs a volatility above {hi}")
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = _bs(x, k, m, tau) - price
        up = fm > 0
        b = np.where(up, m, b)
        a = np.where(up, a, m)
        if np.all(b - a < 1e-15 * np.maximum(b, 1e-300)):
            break
    sig = 0.5 * (a + b)
    for _ in range(3):
        f = _bs(x, k, sig, tau) - price
        v = bs_vega(x, k, sig, tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(v > 0, f / v, 0.0)
        cand = sig - step
        ok = (cand >= a - 1e-12) & (cand <= b + 1e-12) & np.isfinite(cand)
        sig = np.where(ok, cand, sig)
    sig = np.where(at_floor, 0.0, sig)
    return float(sig[0]) if scalar else sig


def smile_from_samples(samples, forward, strikes, T):
    """Implied volatilities of calls on Monte Carlo terminal values.

    Out-of-the-money puts are used below the forward and converted with
    put-call parity, which is exact when ``forward`` is the sample mean.

    Returns
    -------
    log_strikes : ndarray
        ``log(K / forward)``.
    vols : ndarray
        Implied volatilities; ``nan`` where the price has no time value or
        leaves the arbitrage band.
    """
    s = check_1d(samples, "samples")
    K = check_1d(strikes, "strikes")
    F = check_scalar(forward, "forward", lo=0.0, lo_open=True)
    T = check_scalar(T, "T", lo=0.0, lo_open=True)
    vols = np.full(K.shape, np.nan)
    for j, kk in enumerate(K):
        if kk >= F:
            c = float(np.mean(np.maximum(s - kk, 0.0)))
        else:
            c = float(np.mean(np.maximum(kk - s, 0.0))) + F - kk
        if c <= max(F - kk, 0.0):
            continue  # no time value in the samples: the vol is not identified
        try:
            vols[j] = implied_vol(c, 0.0, math.log(F), math.log(kk), T)
        except ValueError:
            pass
    return np.log(K / F), vols


# ---------------------------------------------------------------------------
# arctan smile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmileFit:
    """``f(x) = a * arctan(b x + c) + d`` in the coordinate named by ``coordinate``."""

    a: float
    b: float
    c: float
    d: float
    residual: float = 0.0
    coordinate: str = "strike"

    def __call__(self, x):
        return self.a * np.arctan(self.b * np.asarray(x, dtype=float) + self.c) + self.d

    def derivatives(self, x):
        u = self.b * x + self.c
        g = 1.0 + u * u
        return (
            self.a * math.atan(u) + self.d,
            self.a * self.b / g,
            -2.0 * self.a * self.b**2 * u / g**2,
        )


class AtmMetrics(tuple):
    """``(level, skew, curvature)`` triple."""

    def __new__(cls, level, skew, curvature):
        return super().__new__(cls, (level, skew, curvature))

    level = property(lambda s: s[0])
    skew = property(lambda s: s[1])
    curvature = property(lambda s: s[2])


def _basis(x, b, c):
    return np.column_stack([np.arctan(b * x + c), np.ones_like(x)])


def _solve_linear(x, y, b, c):
    A = _basis(x, b, c)
    coef, *_ = linalg.lstsq(A, y)
    return coef, y - A @ coef


class ArctanSmile(BaseEstimator, RegressorMixin):
    """Least-squares fit of ``a * arctan(b x + c) + d`` to a smile.

    The linear coefficients ``(a, d)`` are profiled out for each ``(b, c)``;
    the nonlinear pair is searched from a fixed set of starts and the best
    candidate is polished on all four parameters. The sign ambiguity of the
    form is resolved by returning ``b >= 0``.

    Parameters
    ----------
    n_starts : int
        Number of random starts added to the deterministic start grid.
    random_state : int
        Seed for the random starts.
    coordinate : str
        Label of the input coordinate (``"strike"`` or ``"log-strike"``).
    """

    def __init__(self, n_starts=16, random_state=0, coordinate="strike"):
        self.n_starts = n_starts
        self.random_state = random_state
        self.coordinate = coordinate

    def fit(self, X, y):
        x = check_1d(X, "X")
        y = check_1d(y, "y")
        if x.size != y.size:
            raise ValueError("X and y lengths differ")
        if x.size < 4:
            raise ValueError(f"need at least 4 points, got {x.size}")
        if np.ptp(x) == 0:
            raise np.linalg.LinAlgError("all abscissae coincide; the fit is rank deficient")
        if np.ptp(y) <= 1e-14 * max(1.0, np.max(np.abs(y))):
            self.a_, self.b_, self.c_, self.d_ = 0.0, 0.0, 0.0, float(np.mean(y))
            self.residual_ = float(linalg.norm(y - self.d_))
            return self
        mid, half = 0.5 * (x.max() + x.min()), 0.5 * np.ptp(x)

        def prof(theta):
            return _solve_linear(x, y, theta[0], theta[1])[1]

        starts = []
        for bs in (0.3, 1.0, 3.0):
            for cs in (-1.0, 0.0, 1.0):
                b0 = bs / half
                starts.append((b0, cs - b0 * mid))
        rng = np.random.default_rng(self.random_state)
        for _ in range(self.n_starts):
            b0 = 10 ** rng.uniform(-1, 1) / half * rng.choice([-1, 1])
            starts.append((b0, rng.uniform(-3, 3) - b0 * mid))
        best = None
        for s0 in starts:
            r = optimize.least_squares(prof, s0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
            if best is None or r.cost < best.cost:
                best = r
        (a0, d0), _ = _solve_linear(x, y, *best.x)
        theta0 = np.array([a0, best.x[0], best.x[1], d0])

        def full(th):
            return th[0] * np.arctan(th[1] * x + th[2]) + th[3] - y

        r = optimize.least_squares(full, theta0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=5000)
        th = r.x if r.cost <= 0.5 * np.sum(full(theta0) ** 2) else theta0
        if th[1] < 0:
            # arctan is odd: (a, b, c) and (-a, -b, -c) give the same curve
            th = np.array([-th[0], -th[1], -th[2], th[3]])
        self.a_, self.b_, self.c_, self.d_ = (float(v) for v in th)
        self.residual_ = float(linalg.norm(full(th)))
        lvl = self.predict(np.linspace(x.min(), x.max(), 200))
        if np.any(lvl <= 0):
            warnings.warn("fitted smile is not positive on the strike range", RuntimeWarning)
        return self

    def predict(self, X):
        x = np.asarray(X, dtype=float).ravel()
        return self.a_ * np.arctan(self.b_ * x + self.c_) + self.d_

    def to_fit(self):
        return SmileFit(self.a_, self.b_, self.c_, self.d_, self.residual_, self.coordinate)


def fit_arctan_smile(points, coordinate="strike", n_starts=16, random_state=0):
    """Fit the arctan form to ``(strike, vol)`` pairs; see :class:`ArctanSmile`."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array of (strike, vol)")
    est = ArctanSmile(n_starts=n_starts, random_state=random_state, coordinate=coordinate)
    return est.fit(pts[:, 0], pts[:, 1]).to_fit()


def atm_metrics(fit: SmileFit, forward, log_strike=False):
    """At-the-money level, skew and curvature of a fitted smile.

    Derivatives are analytic in the fit coordinate. With ``log_strike=True``
    and a strike-coordinate fit they are converted to log-strike derivatives,
    ``I_k = f'(F) F`` and ``I_kk = f''(F) F**2 + f'(F) F``; for a log-strike
    fit ``forward`` is the ATM abscissa and no conversion is applied.
    """
    F = float(forward)
    lvl, d1, d2 = fit.derivatives(F)
    if log_strike and fit.coordinate == "strike":
        return AtmMetrics(lvl, d1 * F, d2 * F * F + d1 * F)
    return AtmMetrics(lvl, d1, d2)


def spline_smile(strikes, vols):
    """Natural cubic spline through a smile, for inspection only."""
    k = check_1d(strikes, "strikes", min_size=2)
    v = check_1d(vols, "vols", min_size=2)
    order = np.argsort(k)
    return CubicSpline(k[order], v[order], bc_type="natural")
