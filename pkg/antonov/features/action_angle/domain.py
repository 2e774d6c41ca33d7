"""
Action-angle domain: per-energy orbit tables and the energy chart built from them.

Every orbit integral is written in the variable psi with x = x_plus * sin(psi).
The transformed integrand

    g(psi) = x_plus * cos(psi) / sqrt(2 * (e - W(x_plus * sin(psi))))

is smooth on [-pi/2, pi/2] (the inverse square roots at the turning points cancel
against cos(psi)), so the orbit is represented by a Chebyshev interpolant of g and
its antiderivative.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from threading import Lock
from typing import Any, Literal, overload

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicHermiteSpline

from antonov.core.errors import DomainError
from antonov.features.steady_state.domain import PotentialWell

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

HALF_PI = 0.5 * math.pi
NEWTON_STEPS = 2


@dataclass(frozen=True, slots=True, eq=False)
class OrbitTable:
    """Periodic orbit at one energy E in the well of ``state``."""

    state: PotentialWell
    E: float
    e: float
    x_plus: float
    period: float
    period_derivative: float
    density: Chebyshev
    cumulative: Chebyshev
    theta_knots: FloatArray
    psi_knots: FloatArray
    residual: float = 0.0
    _inverse: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self) -> None:
        slopes = self.period / self.density(self.psi_knots)
        object.__setattr__(
            self, "_inverse", CubicHermiteSpline(self.theta_knots, self.psi_knots, slopes)
        )

    @overload
    def theta(self, x: ArrayLike, *, return_flag: Literal[False] = ...) -> FloatArray: ...

    @overload
    def theta(
        self, x: ArrayLike, *, return_flag: Literal[True]
    ) -> tuple[FloatArray, NDArray[np.bool_]]: ...

    def theta(
        self, x: ArrayLike, *, return_flag: bool = False
    ) -> FloatArray | tuple[FloatArray, NDArray[np.bool_]]:
        """Angle in [0, 1/2] measured from the left turning point.

        Points outside [x_minus, x_plus] are clamped to the nearest turning point
        (angle 0 on the left, 1/2 on the right); ``return_flag`` exposes which.
        """
        ratio = np.asarray(x, dtype=float) / self.x_plus
        clamped = np.abs(ratio) > 1.0
        psi = np.arcsin(np.clip(ratio, -1.0, 1.0))
        out = np.clip(self.cumulative(psi) / self.period, 0.0, 0.5)
        if return_flag:
            return out, clamped
        return out

    def psi_of_theta(self, theta: ArrayLike) -> FloatArray:
        """Invert the angle map on [0, 1/2]: monotone table plus Newton polish."""
        th = np.clip(np.asarray(theta, dtype=float), 0.0, 0.5)
        psi = np.clip(self._inverse(th), -HALF_PI, HALF_PI)
        target = th * self.period
        for _ in range(NEWTON_STEPS):
            psi = np.clip(psi - (self.cumulative(psi) - target) / self.density(psi), -HALF_PI, HALF_PI)
        return psi

    def position(self, theta: ArrayLike) -> FloatArray:
        """x(theta) for theta in [0, 1); the second half retraces the first."""
        th = np.mod(np.asarray(theta, dtype=float), 1.0)
        folded = np.where(th > 0.5, 1.0 - th, th)
        return self.x_plus * np.sin(self.psi_of_theta(folded))

    def velocity(self, theta: ArrayLike) -> FloatArray:
        th = np.mod(np.asarray(theta, dtype=float), 1.0)
        x = self.position(th)
        speed = np.sqrt(2.0 * np.maximum(self.e - self.state.well(x), 0.0))
        return np.where(th > 0.5, -speed, speed)

    def to_record(self) -> dict[str, float]:
        return {"E": self.E, "x_plus": self.x_plus, "T": self.period, "dT": self.period_derivative}


@dataclass(frozen=True, slots=True, eq=False)
class ActionAngleChart:
    """Energy chart of a potential well.

    ``energies`` are Chebyshev-Lobatto nodes of [Emin, E0]; the bottom node carries
    the small-oscillation limit of the period. T and T' between nodes come from
    the Chebyshev interpolants; exact per-energy orbits come from ``orbit``.
    """

    state: PotentialWell
    energies: FloatArray
    x_plus: FloatArray
    periods: FloatArray
    period_derivatives: FloatArray
    period_series: Chebyshev
    derivative_series: Chebyshev
    quad_tol: float
    theta_table: int
    min_degree: int
    max_degree: int
    emin_cutoff: float
    _orbits: dict[float, OrbitTable] = field(default_factory=dict, repr=False)
    _lock: Lock = field(default_factory=Lock, repr=False)

    @property
    def Emin(self) -> float:
        return self.state.Emin

    @property
    def E0(self) -> float:
        return self.state.E0

    @property
    def period_bottom(self) -> float:
        return float(self.periods[0])

    @property
    def period_top(self) -> float:
        return float(self.periods[-1])

    def _offset(self, E: ArrayLike) -> FloatArray:
        e = np.asarray(E, dtype=float) - self.Emin
        depth = self.state.depth
        if np.any(e < -1e-12 * depth) or np.any(e > depth * (1.0 + 1e-12)):
            raise DomainError(f"energy outside [Emin, E0] = [{self.Emin:g}, {self.E0:g}]")
        return np.clip(e, 0.0, depth)

    def period(self, E: ArrayLike) -> FloatArray:
        return self.period_series(self._offset(E))

    def period_derivative(self, E: ArrayLike) -> FloatArray:
        return self.derivative_series(self._offset(E))

    def orbit(self, E: float) -> OrbitTable:
        key = float(E)
        with self._lock:
            cached = self._orbits.get(key)
        if cached is not None:
            return cached
        from antonov.features.action_angle.service import orbit_table

        table = orbit_table(
            self.state,
            key,
            tol=self.quad_tol,
            theta_table=self.theta_table,
            min_degree=self.min_degree,
            max_degree=self.max_degree,
            emin_cutoff=self.emin_cutoff,
        )
        with self._lock:
            self._orbits.setdefault(key, table)
        return table

    def prime(self, tables: list[OrbitTable]) -> None:
        """Seed the orbit cache with tables built elsewhere (e.g. in parallel)."""
        with self._lock:
            for t in tables:
                self._orbits.setdefault(float(t.E), t)

    def rows(self) -> list[dict[str, float]]:
        return [
            {"E": float(E), "x_plus": float(xp), "T": float(T), "dT": float(dT)}
            for E, xp, T, dT in zip(
                self.energies, self.x_plus, self.periods, self.period_derivatives, strict=True
            )
        ]

    def summary(self) -> dict[str, Any]:
        return {
            "Emin": self.Emin,
            "E0": self.E0,
            "chart_size": int(self.energies.size),
            "T_bottom": self.period_bottom,
            "T_top": self.period_top,
            "quad_tol": self.quad_tol,
        }
