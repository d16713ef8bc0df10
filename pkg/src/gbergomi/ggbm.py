"""Generalised grey Brownian motion and Riemann-Liouville Volterra covariances.

The Volterra process is ``V_t = int_0^t (t - u)**(H - 1/2) dB_u`` (no
normalising constant). Its forward-conditioned version on ``[0, T]`` is
``V^T_t = int_0^T (t - u)**(H - 1/2) dB_u`` for ``t >= T``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg, special
from scipy.linalg import lapack

from ._validation import check_beta, check_grid, check_hurst, check_scalar
from .specfun import gauss_2f1, mittag_leffler

__all__ = [
    "GreyMotionParams",
    "CovMatrix",
    "FactorizationError",
    "ggbm_covariance",
    "ggbm_even_moment",
    "ggbm_char",
    "ggbm_mgf",
    "volterra_cov_spot",
    "volterra_cov_forward",
    "volterra_brownian_cross_cov",
    "build_cov_matrix",
]


@dataclass(frozen=True)
class GreyMotionParams:
    """Parameters of a ggBm: mixing index ``beta`` and self-similarity ``alpha = 2H``."""

    beta: float
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))
        object.__setattr__(
            self, "alpha", check_scalar(self.alpha, "alpha", lo=0.0, hi=2.0, lo_open=True, hi_open=True)
        )

    @classmethod
    def from_hurst(cls, H, beta):
        return cls(beta=beta, alpha=2.0 * check_hurst(H))


def _nonneg(t, name):
    return check_scalar(t, name, lo=0.0)


def ggbm_covariance(t, s, p: GreyMotionParams):
    """``E[B_t B_s] = (t**a + s**a - |t - s|**a) / (2 Gamma(1 + beta))``."""
    t, s = _nonneg(t, "t"), _nonneg(s, "s")
    a = p.alpha
    return (t**a + s**a - abs(t - s) ** a) / (2.0 * special.gamma(1.0 + p.beta))


def ggbm_even_moment(t, n, p: GreyMotionParams):
    """``E[B_t**(2n)] = (2n)! t**(n alpha) / (2**n Gamma(1 + beta n))``."""
    t = _nonneg(t, "t")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    logv = special.gammaln(2 * n + 1) - n * math.log(2.0) - special.gammaln(1.0 + p.beta * n)
    return math.exp(logv) * t ** (n * p.alpha)


def ggbm_char(u, delta, p: GreyMotionParams):
    """Characteristic function of an increment over lag ``delta``: ``E_beta(-u**2 |delta|**alpha / 2)``."""
    return mittag_leffler(p.beta, -0.5 * np.square(u) * abs(delta) ** p.alpha)


def ggbm_mgf(u, delta, p: GreyMotionParams):
    """Moment generating function of an increment: ``E_beta(u**2 |delta|**alpha / 2)``."""
    return mittag_leffler(p.beta, 0.5 * np.square(u) * abs(delta) ** p.alpha)


# ---------------------------------------------------------------------------
# Riemann-Liouville Volterra covariances
# ---------------------------------------------------------------------------

def _spot_cov_array(t, s, H):
    """Vectorised spot covariance for arrays with ``0 <= t <= s``."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    hp, hm = H + 0.5, H - 0.5
    out = np.zeros(np.broadcast(t, s).shape)
    t, s = np.broadcast_to(t, out.shape), np.broadcast_to(s, out.shape)
    pos = t > 0
    if not pos.any():
        return out
    tp, sp = t[pos], s[pos]
    u = tp / sp
    diag = u >= 1.0
    val = np.empty_like(tp)
    val[diag] = tp[diag] ** (2.0 * H) / (2.0 * H)
    off = ~diag
    if off.any():
        f = gauss_2f1(0.5 - H, 1.0, 1.5 + H, u[off])
        val[off] = tp[off] ** hp * sp[off] ** hm / hp * f
    out[pos] = val
    return out


def volterra_cov_spot(t, s, H):
    """``E[V_t V_s] = int_0^min(t,s) (t - u)**(H - 1/2) (s - u)**(H - 1/2) du``.

    Evaluated as ``t**(H+1/2) s**(H-1/2) / (H+1/2) * 2F1(1/2 - H, 1; 3/2 + H; t/s)``
    for ``t <= s``. Returns exactly 0 when either time is 0.
    """
    H = check_hurst(H)
    t, s = _nonneg(t, "t"), _nonneg(s, "s")
    if t > s:
        t, s = s, t
    return float(_spot_cov_array(t, s, H))


def volterra_cov_forward(t, s, T, H):
    """``E[V^T_t V^T_s] = int_0^T (t - u)**(H - 1/2) (s - u)**(H - 1/2) du`` for ``t, s >= T``.

    Uses the identity ``cov_spot(t, s) - cov_spot(t - T, s - T)``, which removes
    the Brownian contribution on ``(T, min(t, s))``.
    """
    H = check_hurst(H)
    T = _nonneg(T, "T")
    t, s = _nonneg(t, "t"), _nonneg(s, "s")
    if t > s:
        t, s = s, t
    if t < T:
        raise ValueError(f"forward covariance needs t >= T, got t={t} < T={T}")
    return float(_forward_cov_array(t, s, T, H))


def _forward_cov_array(t, s, T, H):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if t.ndim and s.ndim and t.shape != s.shape:
        t, s = np.broadcast_arrays(t, s)
    diag = np.isclose(t, s, rtol=0.0, atol=0.0)
    full = _spot_cov_array(t, s, H) - _spot_cov_array(t - T, s - T, H)
    # exact diagonal avoids cancellation
    dval = (np.power(t, 2.0 * H) - np.power(np.maximum(t - T, 0.0), 2.0 * H)) / (2.0 * H)
    return np.where(diag, dval, full)


def volterra_brownian_cross_cov(t, a, b, H):
    """``E[V_t (B_b - B_a)] = int_a^{min(b,t)} (t - u)**(H - 1/2) du`` for ``a < b``.

    Zero when ``a >= t``.
    """
    H = check_hurst(H)
    t, a, b = _nonneg(t, "t"), _nonneg(a, "a"), _nonneg(b, "b")
    if a >= b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    return float(_cross_cov_array(t, a, b, H))


def _cross_cov_array(t, a, b, H):
    hp = H + 0.5
    t, a, b = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (t, a, b)))
    live = a < t
    top = np.minimum(b, t)
    with np.errstate(invalid="ignore"):
        val = (np.power(np.where(live, t - a, 0.0), hp) - np.power(np.where(live, t - top, 0.0), hp)) / hp
    return np.where(live, val, 0.0)


# ---------------------------------------------------------------------------
# Covariance matrices
# ---------------------------------------------------------------------------

class FactorizationError(np.linalg.LinAlgError):
    """Cholesky failure; ``minor`` is the 1-based order of the failing leading minor."""

    def __init__(self, minor, size):
        self.minor = minor
        self.size = size
        super().__init__(
            f"covariance matrix of size {size} is not positive definite: "
            f"leading minor of order {minor} failed (near-duplicate grid times?)"
        )


@dataclass
class CovMatrix:
    """Covariance matrix on a time grid with a lazily computed Cholesky factor.

    Attributes
    ----------
    grid : ndarray
        Time grid (years).
    entries : ndarray
        Symmetric covariance matrix.
    kind : str
        ``"forward"``, ``"spot"`` or ``"spot+increments"``. For the joint kind
        the ordering is ``(dB_1, ..., dB_n, V_{t_1}, ..., V_{t_n})``.
    jitter : float
        Diagonal shift that was needed to factorise (0 if none).
    """

    grid: np.ndarray
    entries: np.ndarray
    kind: str
    jitter: float = 0.0
    _factor: np.ndarray = field(default=None, repr=False)

    @property
    def factor(self):
        if self._factor is None:
            self._factor = self._cholesky()
        return self._factor

    def _cholesky(self):
        c = np.ascontiguousarray(self.entries)
        L, info = lapack.dpotrf(c, lower=1, clean=1)
        if info > 0:
            # rounding-level shift, tried once
            self.jitter = 1e-12 * float(np.mean(np.diag(c)))
            L, info = lapack.dpotrf(c + self.jitter * np.eye(c.shape[0]), lower=1, clean=1)
            if info > 0:
                raise FactorizationError(info, c.shape[0])
        if info < 0:
            raise ValueError(f"dpotrf argument {-info} invalid")
        return L

    def residual(self):
        """Relative Frobenius error of ``factor @ factor.T`` against the entries."""
        L = self.factor
        return float(linalg.norm(L @ L.T - self.entries) / linalg.norm(self.entries))

    @property
    def size(self):
        return self.entries.shape[0]


def build_cov_matrix(grid, kind, H, T=None):
    """Assemble the covariance matrix of a Volterra process on ``grid``.

    Parameters
    ----------
    grid : array_like
        Strictly increasing times. For spot kinds, zero is not allowed (the
        value there is exactly 0 and is handled by the caller).
    kind : {"forward", "spot", "spot+increments"}
        ``forward`` gives ``Cov(V^T_{t_i}, V^T_{t_j})`` and requires ``T``.
        ``spot+increments`` gives the joint law of the Brownian increments
        ``B_{t_i} - B_{t_{i-1}}`` (with ``t_0 = 0``) and ``V_{t_i}``.
    H : float
        Hurst exponent.
    T : float, optional
        Conditioning time for the forward kind.

    Returns
    -------
    CovMatrix
    """
    H = check_hurst(H)
    grid = check_grid(grid)
    ti, tj = np.meshgrid(grid, grid, indexing="ij")
    lo, hi = np.minimum(ti, tj), np.maximum(ti, tj)
    if kind == "forward":
        if T is None:
            raise ValueError("forward kind needs T")
        T = _nonneg(T, "T")
        if grid[0] < T:
            raise ValueError(f"forward grid must start at or after T={T}")
        if T == 0.0:
            raise ValueError("forward covariance at T=0 is identically zero")
        C = _forward_cov_array(lo, hi, T, H)
    elif kind in ("spot", "spot+increments"):
        if grid[0] <= 0.0:
            raise ValueError("spot grid must exclude t=0")
        vv = _spot_cov_array(lo, hi, H)
        if kind == "spot":
            C = vv
        else:
            n = grid.size
            left = np.concatenate(([0.0], grid[:-1]))
            # cross[i, j] = Cov(V_{t_i}, dB_j)
            cross = _cross_cov_array(grid[:, None], left[None, :], grid[None, :], H)
            C = np.empty((2 * n, 2 * n))
            C[:n, :n] = np.diag(grid - left)
            C[:n, n:] = cross.T
            C[n:, :n] = cross
            C[n:, n:] = vv
    else:
        raise ValueError(f"unknown covariance kind {kind!r}")
    C = 0.5 * (C + C.T)
    return CovMatrix(grid=grid, entries=C, kind=kind)
