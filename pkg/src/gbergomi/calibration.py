"""Two-stage calibration: ``(H, beta, eta)`` from the VIX ATM limits, then ``rho``.

A grid search over Monte Carlo smiles is provided for the complementary
smile-level fit.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import itertools
import logging
import math
import warnings

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator

from ._validation import check_scalar
from .asymptotics import (
    AsymptoticInputs,
    spx_skew_scaled_limit,
    vix_atm_curvature_scaled_limit,
    vix_atm_level_limit,
    vix_atm_skew_limit,
)

__all__ = [
    "MarketTargets",
    "SearchSpec",
    "CalibrationResult",
    "GridSearchResult",
    "GreyBergomiCalibrator",
    "targets_from_model",
    "vix_residuals",
    "vix_objective",
    "calibrate_vix",
    "calibrate_rho",
    "grid_search_smile",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarketTargets:
    """Market ATM quantities for one VIX expiry and the SPX skew."""

    I_mkt: float
    S_mkt: float
    C_mkt: float
    spx_skew_mkt: float
    T_mkt: float
    vix_spot: float
    Delta: float = 1.0 / 12.0

    def __post_init__(self):
        check_scalar(self.T_mkt, "T_mkt", lo=0.0, lo_open=True)
        check_scalar(self.I_mkt, "I_mkt", lo=0.0, lo_open=True)
        check_scalar(self.vix_spot, "vix_spot", lo=0.0, lo_open=True)
        for name in ("S_mkt", "C_mkt", "spx_skew_mkt"):
            check_scalar(getattr(self, name), name)

    @property
    def xi0(self):
        return self.vix_spot**2

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class SearchSpec:
    """Coarse grid and local polish settings for :func:`calibrate_vix`."""

    H_range: tuple = (0.01, 0.16)
    beta_range: tuple = (0.05, 1.0)
    eta_range: tuple = (0.05, 4.0)
    n_grid: int = 20
    n_polish: int = 5
    tol: float = 1e-10
    max_evals: int = 2000

    def grids(self):
        return [np.linspace(lo, hi, self.n_grid) for lo, hi in (self.H_range, self.beta_range, self.eta_range)]

    def bounds(self):
        return [self.H_range, self.beta_range, self.eta_range]


@dataclass
class CalibrationResult:
    H: float
    beta: float
    eta: float
    rho: float | None
    objective: float
    residuals: list
    trace: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "H": self.H,
            "beta": self.beta,
            "eta": self.eta,
            "rho": self.rho,
            "objective": self.objective,
            "residuals": list(self.residuals),
            "trace": self.trace,
        }


def _inputs(H, beta, eta, targets):
    return AsymptoticInputs(targets.xi0, H, beta, eta, targets.Delta, targets.T_mkt)


def targets_from_model(H, beta, eta, rho, T_mkt, vix_spot, Delta=1.0 / 12.0):
    """Targets equal to the model's own limits (curvature scaled back to ``T_mkt``)."""
    a = AsymptoticInputs(vix_spot**2, H, beta, eta, Delta, T_mkt)
    return MarketTargets(
        I_mkt=vix_atm_level_limit(a),
        S_mkt=vix_atm_skew_limit(a),
        C_mkt=vix_atm_curvature_scaled_limit(a) * T_mkt ** (3 * H - 0.5),
        spx_skew_mkt=spx_skew_scaled_limit(a, rho) * T_mkt ** (H - 0.5),
        T_mkt=T_mkt,
        vix_spot=vix_spot,
        Delta=Delta,
    )


def vix_residuals(params, targets: MarketTargets, weights=(1.0, 1.0, 1.0)):
    """Weighted residuals of level, skew and scaled curvature.

    The market curvature is scaled by ``T_mkt**(1/2 - 3H)`` with the
    candidate ``H``.
    """
    H, beta, eta = (float(v) for v in params)
    a = _inputs(H, beta, eta, targets)
    w = np.sqrt(np.asarray(weights, dtype=float))
    r = np.array([
        vix_atm_level_limit(a) - targets.I_mkt,
        vix_atm_skew_limit(a) - targets.S_mkt,
        vix_atm_curvature_scaled_limit(a) - targets.C_mkt * targets.T_mkt ** (0.5 - 3 * H),
    ])
    return w * r


def vix_objective(params, targets: MarketTargets, weights=(1.0, 1.0, 1.0)):
    """Sum of squared residuals; ``inf`` outside the parameter domain."""
    try:
        r = vix_residuals(params, targets, weights)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        log.debug("objective domain violation at %s: %s", params, exc)
        return math.inf
    val = float(r @ r)
    return val if math.isfinite(val) else math.inf


def calibrate_vix(targets: MarketTargets, search: SearchSpec = SearchSpec(), weights=(1.0, 1.0, 1.0)):
    """Fit ``(H, beta, eta)`` to the VIX ATM targets.

    Exhaustive coarse grid, Nelder-Mead from the best ``n_polish`` grid
    points within the bounds, then a bounded least-squares polish of the
    best candidate.

    Returns
    -------
    CalibrationResult
        ``rho`` is left as ``None``.
    """
    grids = search.grids()
    pts = list(itertools.product(*grids))
    vals = np.array([vix_objective(q, targets, weights) for q in pts])
    order = np.argsort(vals, kind="stable")[: search.n_polish]
    bounds = search.bounds()
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    cands = []
    for i in order:
        r = optimize.minimize(
            vix_objective, np.array(pts[i]), args=(targets, weights), method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": search.tol, "fatol": search.tol**2, "maxfev": search.max_evals},
        )
        cands.append((r.fun, r.x, r.nfev))
    cands.sort(key=lambda c: c[0])
    x0 = np.clip(cands[0][1], lo, hi)

    def res(q):
        try:
            return vix_residuals(q, targets, weights)
        except (ValueError, ZeroDivisionError):
            return np.full(3, 1e6)

    # keep strictly inside the open H bound of the curvature regime
    hi_ls = hi.copy()
    hi_ls[0] = min(hi[0], 1.0 / 6.0 - 1e-9)
    ls = optimize.least_squares(res, np.clip(x0, lo, hi_ls), bounds=(lo, hi_ls), method="trf",
                                xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=search.max_evals)
    best_x, best_f = x0, cands[0][0]
    if vix_objective(ls.x, targets, weights) <= best_f:
        best_x, best_f = ls.x, vix_objective(ls.x, targets, weights)
    if not math.isfinite(best_f):
        warnings.warn("VIX calibration did not find a finite objective", RuntimeWarning)
    resid = vix_residuals(best_x, targets, weights).tolist() if math.isfinite(best_f) else [math.inf] * 3
    trace = {
        "grid_points": len(pts),
        "grid_best": float(vals[order[0]]),
        "nelder_mead": [{"objective": float(f), "nfev": int(n)} for f, _, n in cands],
        "least_squares_nfev": int(ls.nfev),
    }
    return CalibrationResult(float(best_x[0]), float(best_x[1]), float(best_x[2]), None,
                             float(best_f), resid, trace)


def calibrate_rho(H_star, beta_star, eta_star, targets: MarketTargets, bounds=(-1.0, 0.0)):
    """Correlation matching the scaled SPX skew limit, in closed form.

    The scaled limit ``lim T**(1/2 - H) S_T`` is linear in ``rho``; the market
    skew is scaled the same way with ``T_mkt``. The least-squares solution is
    the clamped linear solve.

    Returns
    -------
    rho : float
    residual : float
        Model minus market scaled skew at the returned ``rho``.
    """
    lo, hi = bounds
    if not -1.0 <= lo <= hi <= 1.0:
        raise ValueError("rho bounds must satisfy -1 <= lo <= hi <= 1")
    a = _inputs(H_star, beta_star, eta_star, targets)
    slope = spx_skew_scaled_limit(a, 1.0)
    target = targets.spx_skew_mkt * targets.T_mkt ** (0.5 - H_star)
    rho = 0.0 if slope == 0.0 else target / slope
    rho = min(max(rho, lo), hi)
    return rho, slope * rho - target


class GreyBergomiCalibrator(BaseEstimator):
    """Estimator wrapper around the two-stage calibration.

    Parameters
    ----------
    n_grid, n_polish : int
        Coarse grid size per axis and number of local polishes.
    rho_bounds : tuple
        Admissible correlation range; ``(-1, 0)`` keeps prices in the
        martingale regime.
    weights : tuple
        Weights of the level, skew and curvature terms.
    """

    def __init__(self, n_grid=20, n_polish=5, rho_bounds=(-1.0, 0.0), weights=(1.0, 1.0, 1.0)):
        self.n_grid = n_grid
        self.n_polish = n_polish
        self.rho_bounds = rho_bounds
        self.weights = weights

    def fit(self, targets: MarketTargets, y=None):
        res = calibrate_vix(targets, SearchSpec(n_grid=self.n_grid, n_polish=self.n_polish), self.weights)
        # beta is frozen at its VIX-stage value for the correlation stage
        rho, r = calibrate_rho(res.H, res.beta, res.eta, targets, self.rho_bounds)
        res.rho = rho
        res.trace["rho_residual"] = r
        self.result_ = res
        self.H_, self.beta_, self.eta_, self.rho_ = res.H, res.beta, res.eta, rho
        return self


@dataclass
class GridSearchResult:
    best_params: dict
    best_error: float
    surface: list  # dicts with the grid params and "error" (nan if the pricer failed)


def _expand_grid(param_grid):
    if isinstance(param_grid, dict):
        if not param_grid:
            return []
        keys = list(param_grid)
        return [dict(zip(keys, v)) for v in itertools.product(*(param_grid[k] for k in keys))]
    return [dict(g) for g in param_grid]


def grid_search_smile(param_grid, pricer, market_strikes, market_vols, metric="rmse", workers=1):
    """Grid search of a Monte Carlo smile against a market smile.

    Parameters
    ----------
    param_grid : dict of lists or list of dicts
    pricer : callable
        ``pricer(params, strikes) -> vols``; should use a fixed seed so the
        surface is deterministic.
    market_strikes, market_vols : array_like
    metric : {"rmse"}
        Root mean squared implied-volatility error over strikes where both
        smiles are finite.
    workers : int
        Threads used to evaluate grid points.

    Returns
    -------
    GridSearchResult
    """
    if metric != "rmse":
        raise ValueError(f"unknown metric {metric!r}")
    points = _expand_grid(param_grid)
    if not points:
        raise ValueError("empty parameter grid")
    K = np.asarray(market_strikes, dtype=float)
    mv = np.asarray(market_vols, dtype=float)

    def one(q):
        try:
            mvols = np.asarray(pricer(q, K), dtype=float)
        except Exception as exc:  # recorded, not fatal
            log.warning("pricer failed at %s: %s", q, exc)
            return math.nan
        ok = np.isfinite(mvols) & np.isfinite(mv)
        if not ok.any():
            return math.nan
        return float(np.sqrt(np.mean((mvols[ok] - mv[ok]) ** 2)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            errs = list(ex.map(one, points))
    else:
        errs = [one(q) for q in points]
    surface = [dict(q, error=e) for q, e in zip(points, errs)]
    finite = [i for i, e in enumerate(errs) if math.isfinite(e)]
    if not finite:
        return GridSearchResult({}, math.nan, surface)
    i = min(finite, key=lambda j: errs[j])
    return GridSearchResult(points[i], errs[i], surface)
