"""The grey Bergomi model: parameters, forward variance and VIX functionals.

Instantaneous variance is

    V_t = xi0(t) * exp(eta * c * sqrt(Y) * V_t^RL) / E_beta(b * t**(2H)),

with ``c = 1/Gamma(H + 1/2)``, ``b = eta**2 c**2 / (4H)`` and ``V^RL`` the
Riemann-Liouville Volterra process of :mod:`gbergomi.ggbm`. Several
quantities overflow double precision for small ``beta``, so most functions
have a log-space counterpart.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, special
from scipy.special import logsumexp

from ._validation import check_beta, check_hurst, check_scalar
from .specfun import GreyLaw, log_mittag_leffler, m_wright_density

__all__ = [
    "ForwardCurve",
    "ModelParams",
    "VixConvention",
    "LowerBound",
    "wick_blacklozenge_normalizer",
    "log_wick_normalizer",
    "variance_given_factors",
    "zeta_series",
    "zeta_array",
    "forward_variance",
    "log_forward_variance",
    "vix_squared_from_path",
    "log_vix_squared_from_path",
    "vix_futures_upper_bound",
    "vix_futures_lower_bound",
    "ssr_short_time_limit",
]

SCENARIO_LEVEL = 0.235


class ForwardCurve:
    """Initial forward variance curve ``t -> xi0(t)``.

    Use the constructors :meth:`flat`, :meth:`scenario` or :meth:`from_vix`;
    arbitrary positive callables are accepted through :meth:`custom`.
    """

    def __init__(self, kind, level, func=None):
        self.kind = kind
        self.level = float(level)
        self._func = func

    @classmethod
    def flat(cls, xi0):
        return cls("flat", check_scalar(xi0, "xi0", lo=0.0, lo_open=True))

    @classmethod
    def from_vix(cls, vix0):
        vix0 = check_scalar(vix0, "vix_spot", lo=0.0, lo_open=True)
        return cls("flat", vix0 * vix0)

    @classmethod
    def scenario(cls, k, level=SCENARIO_LEVEL):
        """Test curves: 1 flat, 2 ``(1+t)**2``, 3 ``sqrt(1+t)``, all scaled by ``level**2``."""
        if k not in (1, 2, 3):
            raise ValueError(f"scenario must be 1, 2 or 3, got {k}")
        kind = {1: "flat", 2: "scenario2", 3: "scenario3"}[k]
        return cls(kind, level * level)

    @classmethod
    def custom(cls, func, name="custom"):
        return cls(name, float(func(0.0)), func=func)

    @property
    def is_flat(self):
        return self.kind == "flat"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "flat":
            out = np.full(t.shape, self.level)
        elif self.kind == "scenario2":
            out = self.level * (1.0 + t) ** 2
        elif self.kind == "scenario3":
            out = self.level * np.sqrt(1.0 + t)
        else:
            out = np.asarray(self._func(t), dtype=float)
            if np.any(out <= 0):
                raise ValueError("forward variance curve must be positive")
        return float(out) if out.ndim == 0 else out

    def integral(self, a, b):
        """``int_a^b xi0(t) dt``."""
        L = self.level
        if self.kind == "flat":
            return L * (b - a)
        if self.kind == "scenario2":
            return L * ((1.0 + b) ** 3 - (1.0 + a) ** 3) / 3.0
        if self.kind == "scenario3":
            return L * 2.0 / 3.0 * ((1.0 + b) ** 1.5 - (1.0 + a) ** 1.5)
        return integrate.quad(lambda t: float(self(t)), a, b, epsrel=1e-12)[0]

    def to_dict(self):
        return {"kind": self.kind, "level": self.level}

    def __repr__(self):
        return f"ForwardCurve({self.kind!r}, level={self.level:g})"


@dataclass(frozen=True)
class VixConvention:
    """Accrual window of the VIX in years (one month by default)."""

    Delta: float = 1.0 / 12.0

    def __post_init__(self):
        check_scalar(self.Delta, "Delta", lo=0.0, lo_open=True)


@dataclass(frozen=True)
class ModelParams:
    """Parameter set ``(H, beta, eta, rho)`` with forward curve ``xi0``.

    Derived constants are properties, so they never go stale.
    """

    H: float
    beta: float
    eta: float
    rho: float
    xi0: ForwardCurve

    def __post_init__(self):
        object.__setattr__(self, "H", check_hurst(self.H))
        object.__setattr__(self, "beta", check_beta(self.beta))
        object.__setattr__(self, "eta", check_scalar(self.eta, "eta", lo=0.0))
        object.__setattr__(self, "rho", check_scalar(self.rho, "rho", lo=-1.0, hi=1.0))
        if not isinstance(self.xi0, ForwardCurve):
            raise TypeError("xi0 must be a ForwardCurve")

    @property
    def h_plus(self):
        return self.H + 0.5

    @property
    def h_minus(self):
        return self.H - 0.5

    @property
    def c(self):
        """Kernel constant ``1/Gamma(H + 1/2)``."""
        return float(special.rgamma(self.H + 0.5))

    @property
    def b(self):
        """``eta**2 c**2 / (4H)``."""
        return self.eta**2 * self.c**2 / (4.0 * self.H)

    @property
    def law(self):
        return GreyLaw(self.beta)

    @property
    def martingale_regime(self):
        return "guaranteed" if self.rho <= 0 else "unverified martingality"

    @property
    def rbergomi_equivalent(self):
        return self.beta == 1.0

    def replace(self, **kw):
        d = dict(H=self.H, beta=self.beta, eta=self.eta, rho=self.rho, xi0=self.xi0)
        d.update(kw)
        return ModelParams(**d)

    def to_dict(self):
        return {
            "H": self.H,
            "beta": self.beta,
            "eta": self.eta,
            "rho": self.rho,
            "xi0": self.xi0.to_dict(),
        }


# ---------------------------------------------------------------------------
# variance and the normaliser
# ---------------------------------------------------------------------------

def log_wick_normalizer(t, p: ModelParams):
    """``log E_beta(b t**(2H))``, vectorised in ``t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    arg = p.b * np.power(t, 2.0 * p.H)
    if p.beta == 1.0:
        out = arg
    else:
        out = np.asarray(log_mittag_leffler(p.beta, arg), dtype=float)
    return float(out) if out.ndim == 0 else out


def wick_blacklozenge_normalizer(t, p: ModelParams):
    """``E[exp(eta c sqrt(Y) V_t)] = E_beta(b t**(2H))``.

    Dividing by it gives the variance process unit mean relative to ``xi0``.
    """
    lv = log_wick_normalizer(t, p)
    if np.max(lv) > 709.0:
        raise OverflowError("normaliser exceeds the floating range; use log_wick_normalizer")
    return np.exp(lv) if np.ndim(lv) else math.exp(lv)


def variance_given_factors(t, sqrtY, volterra_value, p: ModelParams):
    """Instantaneous variance given ``sqrt(Y)`` and the Volterra value at ``t``."""
    sqrtY = np.asarray(sqrtY, dtype=float)
    if np.any(sqrtY < 0):
        raise ValueError("sqrtY must be nonnegative")
    logv = (
        np.log(p.xi0(t))
        + p.eta * p.c * sqrtY * np.asarray(volterra_value, dtype=float)
        - log_wick_normalizer(t, p)
    )
    if np.max(logv) > 709.0:
        raise OverflowError("variance exceeds the floating range")
    out = np.exp(logv)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# zeta series
# ---------------------------------------------------------------------------

def _zeta_log_coeffs(p, kmax):
    k = np.arange(kmax + 1, dtype=float)
    with np.errstate(divide="ignore"):
        lec = np.log(p.eta * p.c) if p.eta > 0 else -np.inf
    lc = k * lec - special.gammaln(k + 1.0) + special.gammaln(1.0 + 0.5 * k) - special.gammaln(
        1.0 + 0.5 * p.beta * k
    )
    lc[0] = 0.0
    return lc


def zeta_series(v, p: ModelParams, tol=1e-12, cap=1000):
    """``zeta(v) = sum_k (eta c v)**k / k! * Gamma(1 + k/2) / Gamma(1 + beta k/2)``.

    Equivalently ``E[exp(eta c sqrt(Y) v)]`` over the mixing law. Summation
    stops once the last term is below ``tol`` times the partial sum.

    Raises
    ------
    ArithmeticError
        If ``cap`` terms do not reach the tolerance; the partial sum is
        attached as ``err.partial_sum``.
    """
    v = check_scalar(v, "v")
    tol = check_scalar(tol, "tol", lo=0.0, lo_open=True)
    if p.beta == 1.0:
        return math.exp(p.eta * p.c * v)
    if v == 0.0 or p.eta == 0.0:
        return 1.0
    lc = _zeta_log_coeffs(p, cap)
    lv = math.log(abs(v))
    s, comp = 1.0, 0.0
    for k in range(1, cap + 1):
        t = math.exp(lc[k] + k * lv)
        if v < 0 and k % 2:
            t = -t
        y = t - comp
        tot = s + y
        comp = (tot - s) - y
        s = tot
        if abs(t) < tol * abs(s):
            return s
    err = ArithmeticError(f"zeta series did not converge in {cap} terms at v={v}")
    err.partial_sum = s
    raise err


@lru_cache(maxsize=32)
def _mixing_nodes(beta, panels=40, order=10):
    """Quadrature nodes ``r`` and weights for ``E[f(sqrt Y)] = int f(r) 2r M_beta(r**2) dr``."""
    R = 1.0
    while m_wright_density(beta, R * R) > 1e-18:
        R *= 1.5
    # uniform panels for the bulk, geometric ones for the exponential decay near 0
    edges = np.unique(np.concatenate(([0.0], R * np.geomspace(1e-4, 1.0, 24), np.linspace(0.0, R, panels + 1))))
    x, w = np.polynomial.legendre.leggauss(order)
    r = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    wr = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    dens = np.asarray(m_wright_density(beta, r * r))
    return r, wr * 2.0 * r * dens


def _zeta_mixture(v, p):
    """``zeta(v) = E[exp(eta c v sqrt(Y))]`` by quadrature against the mixing density."""
    r, w = _mixing_nodes(p.beta)
    x = p.eta * p.c * np.asarray(v, dtype=float)
    return np.exp(np.multiply.outer(x, r)) @ w


def zeta_array(v, p: ModelParams, tol=1e-12):
    """Vectorised :func:`zeta_series` for Monte Carlo use.

    The truncation order is fixed per call from the largest ``|v|``, using the
    Jensen lower bound ``zeta(v) >= exp(eta c v E[sqrt Y])`` so the tolerance
    holds relative to every entry. Entries whose alternating sum cancels too
    much for double precision are recomputed at extended precision.
    """
    v = np.asarray(v, dtype=float)
    if p.beta == 1.0:
        return np.exp(p.eta * p.c * v)
    if v.ndim == 0:
        return zeta_array(v.reshape(1), p, tol)[0]
    if p.eta == 0.0 or v.size == 0:
        return np.ones_like(v)
    vmax = float(np.max(np.abs(v)))
    if vmax == 0.0:
        return np.ones_like(v)
    m_half = math.exp(special.gammaln(1.5) - special.gammaln(1.0 + 0.5 * p.beta))
    floor = -p.eta * p.c * vmax * m_half
    lc = _zeta_log_coeffs(p, 1000)
    lt = lc + np.arange(lc.size) * math.log(vmax)
    kk = np.nonzero((lt < math.log(tol) + floor) & (np.arange(lc.size) > 2) & (np.diff(lt, append=lt[-1]) < 0))[0]
    if kk.size == 0:
        raise ArithmeticError(f"zeta series did not converge in 1000 terms at |v|={vmax}")
    K = int(kk[0])
    coef = np.exp(lc[: K + 1])
    out = np.full(v.shape, coef[K])
    for k in range(K - 1, -1, -1):
        out = out * v + coef[k]
    if np.any(v < 0):
        # cancellation estimate: sum of |terms| is zeta(|v|)
        absval = np.full(v.shape, coef[K])
        av = np.abs(v)
        for k in range(K - 1, -1, -1):
            absval = absval * av + coef[k]
        bad = (absval * 1e-16 > 1e-10 * np.abs(out)) | (out <= 0)
        if bad.any():
            out[bad] = _zeta_mixture(v[bad], p)
    return out


def _log_zeta(v, p):
    if p.beta == 1.0:
        return p.eta * p.c * np.asarray(v, dtype=float)
    return np.log(zeta_array(v, p))


# ---------------------------------------------------------------------------
# forward variance and VIX
# ---------------------------------------------------------------------------

def log_forward_variance(T, t, v, p: ModelParams):
    """Log of the forward variance ``xi_T(t)`` given the forward Volterra value ``v``."""
    T = check_scalar(T, "T", lo=0.0)
    t = np.asarray(t, dtype=float)
    if np.any(t < T):
        raise ValueError("forward variance needs t >= T")
    det = np.log(p.xi0(t)) - log_wick_normalizer(t, p) + log_wick_normalizer(t - T, p)
    if T == 0.0:
        return det + np.zeros(np.shape(v))
    return det + _log_zeta(v, p)


def forward_variance(T, t, v, p: ModelParams):
    """``xi_T(t) = xi0(t) / E_beta(b t**2H) * zeta(v) * E_beta(b (t - T)**2H)``.

    At ``T = 0`` this is ``xi0(t)`` exactly.
    """
    if check_scalar(T, "T", lo=0.0) == 0.0:
        out = np.asarray(p.xi0(t), dtype=float) + np.zeros(np.shape(v))
    else:
        out = np.exp(log_forward_variance(T, t, v, p))
    return float(out) if np.ndim(out) == 0 else out


def _check_window(T, grid, conv):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("VIX grid needs at least two points")
    scale = max(1.0, T + conv.Delta)
    if abs(grid[0] - T) > 1e-12 * scale or abs(grid[-1] - T - conv.Delta) > 1e-12 * scale:
        raise ValueError(
            f"VIX grid must cover [T, T+Delta] = [{T}, {T + conv.Delta}], got [{grid[0]}, {grid[-1]}]"
        )
    if np.any(np.diff(grid) <= 0):
        raise ValueError("VIX grid must be strictly increasing")
    return grid


def _trap_weights(grid):
    h = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def log_vix_squared_from_path(T, grid, v_values, p: ModelParams, conv=VixConvention()):
    """Log of the trapezoidal VIX squared; ``v_values`` has the grid as its last axis."""
    T = check_scalar(T, "T", lo=0.0)
    grid = _check_window(T, grid, conv)
    v = np.asarray(v_values, dtype=float)
    if v.shape[-1] != grid.size:
        raise ValueError("v_values must have one column per grid point")
    lf = log_forward_variance(T, grid, v, p)
    lw = np.log(_trap_weights(grid) / conv.Delta)
    return logsumexp(lf + lw, axis=-1)


def vix_squared_from_path(T, grid, v_values, p: ModelParams, conv=VixConvention()):
    """``(1/Delta) int_T^{T+Delta} xi_T(s) ds`` by the trapezoid rule on ``grid``."""
    out = np.exp(log_vix_squared_from_path(T, grid, v_values, p, conv))
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# futures bounds
# ---------------------------------------------------------------------------

def vix_futures_upper_bound(T, p: ModelParams, conv=VixConvention()):
    """``sqrt((1/Delta) int_T^{T+Delta} xi0(s) ds)``."""
    T = check_scalar(T, "T", lo=0.0)
    if p.xi0.is_flat:
        return math.sqrt(p.xi0.level)
    return math.sqrt(p.xi0.integral(T, T + conv.Delta) / conv.Delta)


@dataclass(frozen=True)
class LowerBound:
    estimate: float
    stderr: float
    n_draws: int
    seed: int


def _graded_nodes(T, Delta, levels=12, order=6):
    """Gauss-Legendre nodes on a mesh refined geometrically towards ``T``."""
    edges = T + Delta * np.concatenate(([0.0], 2.0 ** -np.arange(levels - 1, -1, -1.0)))
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def vix_futures_lower_bound(T, p: ModelParams, conv=VixConvention(), mc=None):
    """Lower bound for the VIX future from Jensen's inequality on the window.

    ``(1/Delta) int sqrt(xi0(s) E_beta(b (s-T)**2H) / E_beta(b s**2H)) E[sqrt(zeta(V^s_T))] ds``
    with ``V^s_T ~ N(0, (s**2H - (s-T)**2H) / (2H))``. The inner expectation is
    a Monte Carlo average over common normal draws (antithetic pairs) shared
    by all outer quadrature nodes.

    Parameters
    ----------
    mc : McConfig, optional
        Draw count and seed; defaults to 10**5 draws with seed 0.

    Returns
    -------
    LowerBound
    """
    T = check_scalar(T, "T", lo=0.0)
    n = 100_000 if mc is None else mc.n_paths
    seed = 0 if mc is None else mc.seed
    D = conv.Delta
    if T == 0.0:
        s, w = _graded_nodes(0.0, D)
        val = float(np.sum(w * np.sqrt(p.xi0(s)))) / D
        return LowerBound(val, 0.0, n, seed)
    s, w = _graded_nodes(T, D)
    H = p.H
    var = (np.power(s, 2 * H) - np.power(s - T, 2 * H)) / (2 * H)
    log_pref = 0.5 * (np.log(p.xi0(s)) + log_wick_normalizer(s - T, p) - log_wick_normalizer(s, p))
    lw = np.log(w / D) + log_pref
    # shift keeps the sum finite when the prefactor underflows
    shift = float(np.max(lw))
    coef = np.exp(lw - shift)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0xB0,))))
    half = (n + 1) // 2
    z = rng.standard_normal(half)
    sd = np.sqrt(var)
    chunk = 2048
    g = np.empty(half)
    for i in range(0, half, chunk):
        zc = z[i:i + chunk, None] * sd[None, :]
        a = np.sqrt(zeta_array(zc, p)) @ coef
        b = np.sqrt(zeta_array(-zc, p)) @ coef
        g[i:i + chunk] = 0.5 * (a + b)
    est = float(np.mean(g))
    se = float(np.std(g, ddof=1) / math.sqrt(half))
    scale = math.exp(shift) if shift < 709 else math.inf
    return LowerBound(est * scale, se * scale, 2 * half, seed)


def ssr_short_time_limit(H):
    """Short-time limit of the skew-stickiness ratio, ``H + 3/2``."""
    return check_hurst(H) + 1.5
