"""Monte Carlo engines for VIX and SPX under the grey Bergomi model.

Random numbers are drawn in fixed-size chunks of paths. Each chunk owns a
Philox stream keyed by ``(seed, purpose, chunk index)``, so results do not
depend on the number of worker threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import functools
import math
import os

import numpy as np
from scipy import optimize, special
from scipy.special import logsumexp

from ._validation import check_grid, check_hurst, check_scalar
from .ggbm import build_cov_matrix, _forward_cov_array
from .model import (
    ModelParams,
    VixConvention,
    log_forward_variance,
    log_wick_normalizer,
)
from .specfun import sample_m_wright

__all__ = [
    "McConfig",
    "GridSpec",
    "McResult",
    "VixSamples",
    "SpotSamples",
    "MarkovNodes",
    "simulate_vix",
    "simulate_spot",
    "simulate_spot_markovian",
    "markovian_nodes",
    "price_from_samples",
    "default_workers",
]

CHUNK = 4096
_PURPOSE_Y = 1
_PURPOSE_GAUSS = 2
_PURPOSE_PERP = 3
_PURPOSE_MARKOV = 4


def default_workers():
    """Worker count from ``GBERGOMI_WORKERS`` (default 1)."""
    raw = os.environ.get("GBERGOMI_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GBERGOMI_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    ``truncation_l`` is the size of the initial exact Cholesky block of the
    VIX engine; ``None`` means exact Cholesky on the full grid.
    """

    n_paths: int = 100_000
    seed: int = 0
    antithetic: bool = False
    truncation_l: int | None = 8
    workers: int = field(default_factory=default_workers)

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 2:
            raise ValueError(f"n_paths must be an integer >= 2, got {self.n_paths}")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even n_paths")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.truncation_l is not None and self.truncation_l < 1:
            raise ValueError("truncation_l must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def to_dict(self):
        return {
            "n_paths": self.n_paths,
            "seed": self.seed,
            "antithetic": self.antithetic,
            "truncation_l": self.truncation_l,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with ``n_steps`` intervals on ``[start, end]``."""

    start: float
    end: float
    n_steps: int

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("grid end must exceed start")
        if self.n_steps < 1:
            raise ValueError("n_steps must be positive")

    def grid(self):
        return np.linspace(self.start, self.end, self.n_steps + 1)


@dataclass(frozen=True)
class McResult:
    estimate: float
    stderr: float
    n_paths: int
    seed: int | None = None
    engine: str = ""
    martingale_regime: str = ""

    def ci(self, z=1.959963984540054):
        return self.estimate - z * self.stderr, self.estimate + z * self.stderr

    def to_dict(self):
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# streams and chunking
# ---------------------------------------------------------------------------

def _rng(seed, purpose, chunk):
    ss = np.random.SeedSequence(int(seed), spawn_key=(purpose, chunk))
    return np.random.Generator(np.random.Philox(ss))


def _chunks(n_paths):
    sizes = [CHUNK] * (n_paths // CHUNK)
    if n_paths % CHUNK:
        sizes.append(n_paths % CHUNK)
    return sizes


def _normals(seed, purpose, chunk, n, dim, antithetic):
    """Standard normals of shape ``(n, dim)``; antithetic pairs split first/second half."""
    rng = _rng(seed, purpose, chunk)
    if not antithetic:
        return rng.standard_normal((n, dim))
    z = rng.standard_normal((n // 2, dim))
    return np.concatenate([z, -z])


def _run_chunks(func, mc):
    """Evaluate ``func(chunk_index, size)`` over all chunks and merge in order.

    Each call returns a tuple of arrays whose first axis is the path axis.
    With antithetic sampling the merged output lists all first members of the
    pairs, then all second members, so pairs are ``(i, i + n/2)``.
    """
    sizes = _chunks(mc.n_paths)
    if mc.antithetic and any(s % 2 for s in sizes):
        raise ValueError("antithetic sampling needs even chunk sizes")
    jobs = list(enumerate(sizes))
    if mc.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=mc.workers) as ex:
            parts = list(ex.map(lambda a: func(*a), jobs))
    else:
        parts = [func(i, s) for i, s in jobs]
    merged = []
    for k in range(len(parts[0])):
        arrs = [p[k] for p in parts]
        if mc.antithetic:
            first = [a[: a.shape[0] // 2] for a in arrs]
            second = [a[a.shape[0] // 2:] for a in arrs]
            merged.append(np.concatenate(first + second))
        else:
            merged.append(np.concatenate(arrs))
    return merged


def _mean_se(x, antithetic):
    x = np.asarray(x, dtype=float)
    if antithetic:
        h = x.shape[0] // 2
        x = 0.5 * (x[:h] + x[h:])
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.shape[0]))


# ---------------------------------------------------------------------------
# VIX engine
# ---------------------------------------------------------------------------

@dataclass
class VixSamples:
    """Simulated ``VIX_T`` values, kept in log form to survive extreme parameters."""

    log_vix: np.ndarray
    T: float
    grid: np.ndarray
    params: ModelParams
    mc: McConfig
    engine: str = "cholesky-truncated"

    @property
    def vix(self):
        return np.exp(self.log_vix)

    def futures(self):
        est, se = _mean_se(self.vix, self.mc.antithetic)
        return McResult(est, se, self.log_vix.size, self.mc.seed, "vix:" + self.engine,
                        self.params.martingale_regime)

    def log_futures(self):
        """``log E[VIX_T]`` computed without overflow or underflow."""
        return float(logsumexp(self.log_vix) - math.log(self.log_vix.size))

    def relative(self):
        """``VIX_T / E[VIX_T]``; the smile depends only on this ratio."""
        return np.exp(self.log_vix - self.log_futures())


def _vix_gauss_factor(T, grid, H, truncation_l):
    """Return a function mapping normals ``(n, m)`` to forward Volterra values."""
    m = grid.size
    if truncation_l is None or truncation_l >= m - 1:
        L = build_cov_matrix(grid, "forward", H, T=T).factor
        return lambda z: z @ L.T
    if truncation_l >= m:
        raise ValueError("truncation_l must be smaller than the grid size")
    l = truncation_l
    L0 = build_cov_matrix(grid[: l + 1], "forward", H, T=T).factor
    # adjacent covariances, computed directly from the covariance function
    var = _forward_cov_array(grid, grid, T, H)
    cov = _forward_cov_array(grid[:-1], grid[1:], T, H)
    a = cov / var[:-1]
    s = np.sqrt(np.maximum(var[1:] - cov * a, 0.0))

    def draw(z):
        out = np.empty_like(z)
        out[:, : l + 1] = z[:, : l + 1] @ L0.T
        for j in range(l + 1, m):
            out[:, j] = a[j - 1] * out[:, j - 1] + s[j - 1] * z[:, j]
        return out

    return draw


def simulate_vix(p: ModelParams, T, mc: McConfig, grid=None, conv=VixConvention(), n_points=100):
    """Simulate ``VIX_T`` by trapezoidal integration of the forward variance.

    The forward Volterra values ``V^T_s`` on the window are drawn by exact
    Cholesky on the first ``truncation_l + 1`` points and extended with the
    adjacent-correlation recursion.

    Parameters
    ----------
    p : ModelParams
    T : float
        Observation date of the VIX.
    mc : McConfig
    grid : array_like, optional
        Points covering ``[T, T + Delta]``; default ``n_points`` uniform points.

    Returns
    -------
    VixSamples
    """
    T = check_scalar(T, "T", lo=0.0)
    if grid is None:
        grid = np.linspace(T, T + conv.Delta, n_points)
    grid = check_grid(grid, "grid", min_size=2)
    from .model import _check_window, _trap_weights

    _check_window(T, grid, conv)
    lw = np.log(_trap_weights(grid) / conv.Delta)
    if T == 0.0 or p.eta == 0.0:
        det = log_forward_variance(T, grid, np.zeros(grid.size), p)
        val = 0.5 * float(logsumexp(det + lw))
        return VixSamples(np.full(mc.n_paths, val), T, grid, p, mc, "deterministic")
    draw = _vix_gauss_factor(T, grid, p.H, mc.truncation_l)
    engine = "cholesky-full" if mc.truncation_l is None or mc.truncation_l >= grid.size - 1 else "cholesky-truncated"

    def chunk(i, n):
        z = _normals(mc.seed, _PURPOSE_GAUSS, i, n, grid.size, mc.antithetic)
        v = draw(z)
        lf = log_forward_variance(T, grid, v, p)
        return (0.5 * logsumexp(lf + lw, axis=1),)

    (log_vix,) = _run_chunks(chunk, mc)
    return VixSamples(log_vix, T, grid, p, mc, engine)


# ---------------------------------------------------------------------------
# spot engines
# ---------------------------------------------------------------------------

@dataclass
class SpotSamples:
    """Log-prices ``X = log S`` at the recorded times (``S_0 = 1``)."""

    times: np.ndarray
    log_s: np.ndarray  # shape (n_paths, len(times))
    params: ModelParams
    mc: McConfig
    engine: str

    def terminal(self):
        return np.exp(self.log_s[:, -1])

    def at(self, t):
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-12 * max(1.0, t):
            raise KeyError(f"time {t} was not recorded")
        return np.exp(self.log_s[:, k])

    def martingale_check(self):
        return price_from_samples(self.terminal(), ("identity",), antithetic=self.mc.antithetic,
                                  engine="spot:" + self.engine, seed=self.mc.seed,
                                  regime=self.params.martingale_regime)


def _spot_grid(grid):
    grid = check_grid(grid, "grid", min_size=2)
    if grid[0] != 0.0:
        raise ValueError("spot grid must start at 0")
    return grid


def _record_index(grid, record_times):
    if record_times is None:
        return np.array([grid.size - 1])
    idx = []
    for t in np.atleast_1d(record_times):
        k = int(np.argmin(np.abs(grid - t)))
        if abs(grid[k] - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"record time {t} is not a grid point")
        idx.append(k)
    return np.array(idx)


def _euler(p, grid, sqrt_y, dB, vol_values, z_perp, rec):
    """Log-Euler scheme; ``vol_values[:, i]`` is the Volterra value at ``grid[i+1]``."""
    n, N = dB.shape
    h = np.diff(grid)
    lxi = np.log(p.xi0(grid[:-1]))
    lnorm = log_wick_normalizer(grid[:-1], p)
    ec = p.eta * p.c
    rho, rbar = p.rho, math.sqrt(max(0.0, 1.0 - p.rho**2))
    x = np.zeros(n)
    out = np.empty((n, rec.size))
    want = {int(k): j for j, k in enumerate(rec)}
    if 0 in want:
        out[:, want[0]] = 0.0
    for i in range(N):
        if i == 0:
            logv = np.full(n, lxi[0] - lnorm[0])
        else:
            logv = lxi[i] - lnorm[i] + ec * sqrt_y * vol_values[:, i - 1]
        v = np.exp(logv)
        dw = rho * dB[:, i] + rbar * math.sqrt(h[i]) * z_perp[:, i]
        x += -0.5 * v * h[i] + np.sqrt(v) * dw
        if i + 1 in want:
            out[:, want[i + 1]] = x
    return out


def _draw_y(p, mc, i, n):
    if p.beta == 1.0:
        return np.ones(n)
    return np.sqrt(sample_m_wright(p.law, _rng(mc.seed, _PURPOSE_Y, i), size=n))


def simulate_spot(p: ModelParams, grid, mc: McConfig, record_times=None):
    """Simulate ``log S`` with the exact joint law of Volterra values and increments.

    Parameters
    ----------
    p : ModelParams
    grid : array_like
        Time grid starting at 0.
    mc : McConfig
    record_times : array_like, optional
        Grid times at which to keep ``log S`` (default: terminal only).

    Returns
    -------
    SpotSamples
    """
    grid = _spot_grid(grid)
    rec = _record_index(grid, record_times)
    N = grid.size - 1
    L = build_cov_matrix(grid[1:], "spot+increments", p.H).factor

    def chunk(i, n):
        z = _normals(mc.seed, _PURPOSE_GAUSS, i, n, 2 * N, mc.antithetic)
        joint = z @ L.T
        zp = _normals(mc.seed, _PURPOSE_PERP, i, n, N, mc.antithetic)
        sy = _draw_y(p, mc, i, n)
        return (_euler(p, grid, sy, joint[:, :N], joint[:, N:], zp, rec),)

    (xs,) = _run_chunks(chunk, mc)
    return SpotSamples(grid[rec], xs, p, mc, "cholesky")


@dataclass(frozen=True)
class MarkovNodes:
    """Exponential sum ``sum_i w_i exp(-x_i t)`` approximating ``t**(H - 1/2)``.

    ``kernel_error`` is the sup relative error on ``window``; ``l2_error`` is
    the relative squared L2 error on ``[0, window[1]]``.
    """

    weights: np.ndarray
    speeds: np.ndarray
    kernel_error: float
    H: float
    window: tuple
    l2_error: float = float("nan")

    def __iter__(self):
        yield self.weights
        yield self.speeds

    def kernel(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.multiply.outer(t, self.speeds)) @ self.weights


def _nodes_from_edges(H, edges):
    """Moment matching of ``mu(dx) = x**(-H-1/2) dx / Gamma(1/2 - H)`` on each interval."""
    a, b = edges[:-1], edges[1:]
    e0, e1 = 0.5 - H, 1.5 - H
    g = special.gamma(0.5 - H)
    m0 = (b**e0 - a**e0) / (e0 * g)
    m1 = (b**e1 - a**e1) / (e1 * g)
    return m0, m1 / m0


def _kernel_sup_error(H, w, x, ts):
    k = ts ** (H - 0.5)
    approx = np.exp(-np.multiply.outer(ts, x)) @ w
    return float(np.max(np.abs(approx - k) / k))


def _l2_parts(H, w, x, T):
    """``int K**2``, ``int K K_N`` and ``int K_N**2`` over ``[0, T]``."""
    hp = H + 0.5
    kk = T ** (2 * H) / (2 * H)
    kn = float(np.sum(w * x ** (-hp) * special.gamma(hp) * special.gammainc(hp, x * T)))
    xs = x[:, None] + x[None, :]
    nn = float(np.sum(np.outer(w, w) * (-np.expm1(-xs * T)) / xs))
    return kk, kn, nn


def _l2_error(H, w, x, T):
    kk, kn, nn = _l2_parts(H, w, x, T)
    return (kk - 2 * kn + nn) / kk


def _geometric_edges(lo, hi, N):
    if N == 1:
        return np.array([0.0, hi])
    return np.concatenate(([0.0], np.geomspace(lo, hi, N)))


def markovian_nodes(H, N, delta=1e-3, horizon=1.0, objective="sup"):
    """Weights and mean-reversion speeds approximating the power-law kernel.

    The measure ``mu`` with ``t**(H-1/2) = int exp(-x t) mu(dx)`` is cut into
    ``N`` intervals ``[0, x_1], [x_1, x_2], ...`` with geometric ``x_k``; on
    each interval the mass and first moment are matched by a single Dirac
    mass and the tail beyond ``x_N`` is dropped. A common factor then
    rescales all weights. The two endpoints and the factor are chosen by
    ``objective``:

    ``"sup"``
        sup relative kernel error on ``[delta, horizon]``.
    ``"l2"``
        squared L2 error on ``[0, horizon]``; the factor is the L2 projection.
        This keeps the variance of the approximate Volterra process close to
        the exact one and is what the Markovian engine uses.

    Returns
    -------
    MarkovNodes
        Unpacks as ``weights, speeds``.
    """
    H = check_hurst(H)
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    if objective not in ("sup", "l2"):
        raise ValueError(f"unknown objective {objective!r}")
    check_scalar(delta, "delta", lo=0.0, lo_open=True)
    check_scalar(horizon, "horizon", lo=delta, lo_open=True)
    if H > 0.5:
        raise ValueError("the completely monotone representation needs H <= 1/2")
    return _markovian_nodes(float(H), int(N), float(delta), float(horizon), objective)


@functools.lru_cache(maxsize=64)
def _markovian_nodes(H, N, delta, horizon, objective):
    if H == 0.5:
        return MarkovNodes(np.array([1.0]), np.array([0.0]), 0.0, H, (delta, horizon), 0.0)
    ts = np.geomspace(delta, horizon, 400)

    def build(theta):
        # trial points may overflow; the objectives map non-finite nodes to inf
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            lo, hi = np.exp(theta[0]), np.exp(theta[0] + np.exp(theta[1]))
            return _nodes_from_edges(H, _geometric_edges(lo, hi, N))

    if objective == "sup":
        def weights(theta, w, x):
            return w * np.exp(theta[2])

        def obj(theta):
            w, x = build(theta)
            if not np.all(np.isfinite(x)):
                return np.inf
            return _kernel_sup_error(H, weights(theta, w, x), x, ts)

        spans = (10.0 / delta, 100.0 / delta, 1e4 / delta)
        extra = [0.0]
    else:
        def weights(theta, w, x):
            _, kn, nn = _l2_parts(H, w, x, horizon)
            return w * (kn / nn)

        def obj(theta):
            w, x = build(theta)
            if not np.all(np.isfinite(x)) or not np.all(np.isfinite(w)):
                return np.inf
            kk, kn, nn = _l2_parts(H, w, x, horizon)
            return (kk - kn * kn / nn) / kk

        spans = (1e4, 1e8, 1e12)
        extra = []

    best = None
    for lo0 in (np.log(0.1 / horizon), 0.0, np.log(10.0 / horizon)):
        for span in spans:
            r = optimize.minimize(obj, [lo0, np.log(np.log(span))] + extra, method="Nelder-Mead",
                                  options={"xatol": 1e-8, "fatol": 1e-14, "maxiter": 4000})
            if best is None or r.fun < best.fun:
                best = r
    w, x = build(best.x)
    w = weights(best.x, w, x)
    w.setflags(write=False)
    x.setflags(write=False)
    return MarkovNodes(w, x, _kernel_sup_error(H, w, x, ts), H, (delta, horizon),
                       _l2_error(H, w, x, horizon))


def simulate_spot_markovian(p: ModelParams, grid, mc: McConfig, N=20, record_times=None, nodes=None):
    """Simulate ``log S`` with the Volterra value replaced by ``N`` OU factors.

    Each factor ``Y_k(t) = int_0^t exp(-x_k (t - u)) dB_u`` is advanced by its
    exact Gaussian update jointly with the Brownian increment; the increments,
    the orthogonal noise and the mixing variable use the same streams as
    :func:`simulate_spot`.
    """
    grid = _spot_grid(grid)
    rec = _record_index(grid, record_times)
    if nodes is None:
        nodes = markovian_nodes(p.H, N, delta=min(1e-3, 0.5 * grid[-1]), horizon=grid[-1], objective="l2")
    w, x = nodes.weights, nodes.speeds
    K = x.size
    Nst = grid.size - 1
    h = np.diff(grid)
    # per-step conditional laws of the OU increments given dB
    steps = {}
    for hh in np.unique(h):
        xs = x[:, None] + x[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            cII = np.where(xs > 0, -np.expm1(-xs * hh) / xs, hh)
            cIB = np.where(x > 0, -np.expm1(-x * hh) / x, hh)
        beta_coef = cIB / hh
        cond = cII - np.outer(cIB, cIB) / hh
        lam, vec = np.linalg.eigh(0.5 * (cond + cond.T))
        keep = lam > 1e-14 * max(lam.max(), 1e-300)
        A = vec[:, keep] * np.sqrt(lam[keep])
        steps[hh] = (np.exp(-x * hh), beta_coef, A)
    rank = max(s[2].shape[1] for s in steps.values())

    def chunk(i, n):
        zb = _normals(mc.seed, _PURPOSE_GAUSS, i, n, 2 * Nst, mc.antithetic)[:, :Nst]
        dB = zb * np.sqrt(h)
        zm = _normals(mc.seed, _PURPOSE_MARKOV, i, n, Nst * rank, mc.antithetic).reshape(n, Nst, rank)
        zp = _normals(mc.seed, _PURPOSE_PERP, i, n, Nst, mc.antithetic)
        sy = _draw_y(p, mc, i, n)
        factors = np.zeros((n, K))
        vol = np.empty((n, Nst))
        for j in range(Nst):
            decay, bc, A = steps[h[j]]
            factors = factors * decay + np.outer(dB[:, j], bc) + zm[:, j, : A.shape[1]] @ A.T
            vol[:, j] = factors @ w
        return (_euler(p, grid, sy, dB, vol, zp, rec),)

    (xs,) = _run_chunks(chunk, mc)
    return SpotSamples(grid[rec], xs, p, mc, f"markovian-N{K}")


# ---------------------------------------------------------------------------
# payoffs
# ---------------------------------------------------------------------------

def _payoff(samples, payoff):
    if callable(payoff):
        return np.asarray(payoff(samples), dtype=float)
    kind = payoff[0]
    if kind == "identity":
        return samples
    if kind == "call":
        return np.maximum(samples - payoff[1], 0.0)
    if kind == "put":
        return np.maximum(payoff[1] - samples, 0.0)
    raise ValueError(f"unknown payoff {payoff!r}")


def price_from_samples(samples, payoff=("identity",), antithetic=False, engine="", seed=None, regime=""):
    """Average a payoff over samples.

    Parameters
    ----------
    samples : array_like
        Terminal values. With ``antithetic=True`` entry ``i`` is paired with
        ``i + n/2`` and the standard error is computed from pair means.
    payoff : tuple or callable
        ``("identity",)``, ``("call", K)``, ``("put", K)`` or a vectorised
        function of the samples.

    Returns
    -------
    McResult
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("no samples")
    vals = _payoff(samples, payoff)
    if samples.size == 1:
        return McResult(float(vals[0]), math.inf, 1, seed, engine, regime)
    est, se = _mean_se(vals, antithetic)
    return McResult(est, se, samples.size, seed, engine, regime)
