"""Input validation helpers shared by the public API."""

import numbers

import numpy as np


def check_scalar(x, name, *, lo=None, hi=None, lo_open=False, hi_open=False):
    """Validate a real scalar against optional bounds and return it as float.

    Raises
    ------
    TypeError
        If ``x`` is not a real number.
    ValueError
        If ``x`` is not finite or violates a bound.
    """
    if isinstance(x, bool) or not isinstance(x, (numbers.Real, np.floating, np.integer)):
        raise TypeError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    if lo is not None and (x < lo or (lo_open and x == lo)):
        bracket = "(" if lo_open else "["
        raise ValueError(f"{name}={x} outside {bracket}{lo}, ...")
    if hi is not None and (x > hi or (hi_open and x == hi)):
        bracket = ")" if hi_open else "]"
        raise ValueError(f"{name}={x} outside ..., {hi}{bracket}")
    return x


def check_beta(beta, *, allow_one=True):
    return check_scalar(beta, "beta", lo=0.0, lo_open=True, hi=1.0, hi_open=not allow_one)


def check_hurst(H):
    return check_scalar(H, "H", lo=0.0, hi=1.0, lo_open=True, hi_open=True)


def check_grid(grid, name="grid", *, min_size=1):
    """Return ``grid`` as a 1-d float array, requiring strictly increasing values."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if grid.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} points, got {grid.size}")
    if not np.all(np.isfinite(grid)):
        raise ValueError(f"{name} contains non-finite values")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return grid


def check_1d(x, name, *, min_size=1):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2 and 1 in x.shape:
        x = x.ravel()
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if x.size < min_size:
        raise ValueError(f"{name} needs at least {min_size} entries, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x
