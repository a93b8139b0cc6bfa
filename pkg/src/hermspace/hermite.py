"""Orthonormal Hermite polynomials for the standard normal weight.

The family h_0, h_1, ... is orthonormal in L2 of the standard normal law:
h_0 = 1, h_1(x) = x, and

    h_nu(x) = nu^{-1/2} * (x*h_{nu-1}(x) - (nu-1)^{1/2}*h_{nu-2}(x)).

Two facts used throughout the package: the derivative identity
h_nu' = nu^{1/2} * h_{nu-1}, and the square bound h_nu(x)^2 <= exp(x^2/2)
valid for every degree and argument.
"""
from __future__ import annotations

import math

import numpy as np


def hermite_eval(nu: int, x: float) -> float:
    """Value of the degree-``nu`` orthonormal Hermite polynomial at ``x``."""
    if nu < 0:
        raise ValueError(f"degree must be non-negative, got {nu}")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    if nu == 0:
        return 1.0
    prev, cur = 1.0, x
    for k in range(2, nu + 1):
        prev, cur = cur, (x * cur - math.sqrt(k - 1) * prev) / math.sqrt(k)
    return cur


def hermite_column(nu_max: int, x: float) -> np.ndarray:
    """Values (h_0(x), ..., h_{nu_max}(x)) as a float array."""
    if nu_max < 0:
        raise ValueError(f"degree must be non-negative, got {nu_max}")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    out = np.empty(nu_max + 1)
    out[0] = 1.0
    if nu_max >= 1:
        out[1] = x
    for k in range(2, nu_max + 1):
        out[k] = (x * out[k - 1] - math.sqrt(k - 1) * out[k - 2]) / math.sqrt(k)
    return out


def hermite_columns(nu_max: int, xs: np.ndarray) -> np.ndarray:
    """Matrix H with H[i, nu] = h_nu(xs[i]), shape (len(xs), nu_max + 1)."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1:
        raise ValueError("xs must be one-dimensional")
    if not np.all(np.isfinite(xs)):
        raise ValueError("arguments must be finite")
    H = np.empty((xs.size, nu_max + 1))
    H[:, 0] = 1.0
    if nu_max >= 1:
        H[:, 1] = xs
    for k in range(2, nu_max + 1):
        H[:, k] = (xs * H[:, k - 1] - math.sqrt(k - 1) * H[:, k - 2]) / math.sqrt(k)
    return H
