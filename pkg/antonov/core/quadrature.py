"""Quadrature rules shared by the numerical modules.

- ``gauss_legendre``: nodes/weights on [a, b].
- ``tanh_sinh``: double-exponential rule with level halving; tolerates
  integrable endpoint singularities such as inverse square roots.
- ``principal_value``: Cauchy principal value by singularity subtraction.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_legendre

from antonov.core.errors import DomainError, QuadratureError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
VectorFn = Callable[[FloatArray], FloatArray]

_HALF_PI = 0.5 * math.pi
_TS_T_MAX = 3.2


@lru_cache(maxsize=64)
def _legendre_reference(n: int) -> tuple[FloatArray, FloatArray]:
    x, w = roots_legendre(n)
    return np.asarray(x, dtype=float), np.asarray(w, dtype=float)


def gauss_legendre(n: int, a: float, b: float) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes (ascending) and weights mapped to [a, b]."""
    if n < 1:
        raise DomainError(f"Gauss-Legendre needs at least one node, got {n}")
    x, w = _legendre_reference(int(n))
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * x, half * w


def tanh_sinh_rule(level: int) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Nodes ``u`` on (-1, 1), weights, and the complements ``1 - |u|`` for step 2**-level."""
    h = 2.0 ** (-level)
    t = np.arange(-math.ceil(_TS_T_MAX / h), math.ceil(_TS_T_MAX / h) + 1) * h
    s = _HALF_PI * np.sinh(t)
    u = np.tanh(s)
    weights = h * _HALF_PI * np.cosh(t) / np.cosh(s) ** 2
    # 1 - tanh|s| without cancellation
    complement = 2.0 / (1.0 + np.exp(2.0 * np.abs(s)))
    return u, weights, complement


def tanh_sinh(
    f: VectorFn,
    a: float,
    b: float,
    *,
    tol: float = 1e-12,
    min_level: int = 2,
    max_level: int = 8,
) -> tuple[float, float]:
    """Integrate a vectorized ``f`` over [a, b]; returns (value, error estimate).

    Raises ``QuadratureError`` when successive levels still differ by more than
    ``tol`` (relative) at ``max_level``.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = tanh_sinh(f, b, a, tol=tol, min_level=min_level, max_level=max_level)
        return -value, err

    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    previous: float | None = None
    estimate = math.inf
    for level in range(min_level, max_level + 1):
        u, w, comp = tanh_sinh_rule(level)
        keep = comp * half > 4.0 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)
        x = np.where(u < 0.0, a + half * comp, b - half * comp)[keep]
        x = np.where(np.abs(u[keep]) < 0.5, mid + half * u[keep], x)
        value = float(half * np.sum(w[keep] * f(x)))
        if previous is not None:
            estimate = abs(value - previous)
            if estimate <= tol * max(abs(value), 1e-300):
                return value, estimate
        previous = value
    raise QuadratureError(
        f"tanh-sinh did not converge on [{a}, {b}] (estimate {estimate:.3e})",
        residual=estimate,
    )


def principal_value(
    f: VectorFn,
    a: float,
    b: float,
    gamma: float,
    *,
    nodes: int = 32,
) -> float:
    """PV of the integral of f(t)/(t - gamma) over [a, b] for a < gamma < b.

    Computed as the integral of (f(t) - f(gamma))/(t - gamma) plus
    f(gamma)*log((b - gamma)/(gamma - a)); the regular part is integrated on
    [a, gamma] and [gamma, b] separately so no node hits the pole.
    """
    if not a < gamma < b:
        raise DomainError(f"pole {gamma} is not inside ({a}, {b})")
    f_gamma = float(np.asarray(f(np.array([gamma], dtype=float)))[0])
    total = f_gamma * math.log((b - gamma) / (gamma - a))
    for lo, hi in ((a, gamma), (gamma, b)):
        t, w = gauss_legendre(nodes, lo, hi)
        total += float(np.sum(w * (f(t) - f_gamma) / (t - gamma)))
    return total
