"""Independent rough Bergomi VIX reference used as an oracle for the beta = 1 case.

Shares no code with the package: the covariance comes from adaptive
quadrature, the square root from an eigendecomposition and the draws from
numpy's default generator.
"""

import math

import numpy as np
from scipy import integrate


def kernel_cov(s1, s2, T, H):
    """``int_0^T (s1 - u)**(H - 1/2) (s2 - u)**(H - 1/2) du`` for ``s1, s2 >= T``."""
    f = lambda u: (s1 - u) ** (H - 0.5) * (s2 - u) ** (H - 0.5)
    if s1 == T or s2 == T:
        other = max(s1, s2)
        g = lambda u: (other - u) ** (H - 0.5) if s1 != s2 else 1.0
        wv = (0.0, H - 0.5) if s1 != s2 else (0.0, 2 * H - 1.0)
        val, _ = integrate.quad(g, 0.0, T, weight="alg", wvar=wv, epsabs=0.0, epsrel=1e-13, limit=400)
        return val
    val, _ = integrate.quad(f, 0.0, T, epsabs=0.0, epsrel=1e-13, limit=400)
    return val


def deterministic_log_forward(T, s, H, eta, xi0):
    """``log xi0 - eta**2 c**2 (s**(2H) - (s - T)**(2H)) / (4H)`` with ``c = 1/Gamma(H + 1/2)``."""
    c = 1.0 / math.gamma(H + 0.5)
    s = np.asarray(s, dtype=float)
    return np.log(xi0) - eta**2 * c**2 * (s ** (2 * H) - (s - T) ** (2 * H)) / (4 * H)


def vix_futures(T, H, eta, xi0, n_paths, seed, Delta=1.0 / 12.0, n_points=100):
    """Monte Carlo ``E[VIX_T]`` for flat ``xi0``; returns ``(mean, stderr)``."""
    s = np.linspace(T, T + Delta, n_points)
    m = s.size
    C = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            C[i, j] = C[j, i] = kernel_cov(s[i], s[j], T, H)
    lam, vec = np.linalg.eigh(C)
    A = vec * np.sqrt(np.clip(lam, 0.0, None))
    c = 1.0 / math.gamma(H + 0.5)
    det = deterministic_log_forward(T, s, H, eta, xi0)
    w = np.full(m, (s[1] - s[0]) / Delta)
    w[0] *= 0.5
    w[-1] *= 0.5
    rng = np.random.default_rng(seed)
    out = np.empty(n_paths)
    for start in range(0, n_paths, 10000):
        n = min(10000, n_paths - start)
        g = rng.standard_normal((n, m)) @ A.T
        out[start:start + n] = np.sqrt(np.exp(det + eta * c * g) @ w)
    return float(out.mean()), float(out.std(ddof=1) / math.sqrt(n_paths))
