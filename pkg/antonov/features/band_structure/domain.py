"""
Band structure of the free operator: beta_l(E) = (4 pi l)^2 / T(E)^2.

Bands are ordered by mode; segments are the maximal open intervals on which the
set of covering modes is constant (an empty set marks a spectral gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from antonov.core.errors import DomainError
from antonov.features.action_angle.domain import ActionAngleChart

FloatArray = NDArray[np.float64]

FOUR_PI = 4.0 * math.pi


def band_scale(l: int) -> float:
    return (FOUR_PI * l) ** 2


@dataclass(frozen=True, slots=True)
class Band:
    l: int
    beta_min: float
    beta_max: float

    @property
    def width(self) -> float:
        return self.beta_max - self.beta_min

    def contains(self, beta: float) -> bool:
        return self.beta_min <= beta <= self.beta_max

    def to_dict(self) -> dict[str, Any]:
        return {"l": self.l, "beta_min": self.beta_min, "beta_max": self.beta_max}


@dataclass(frozen=True, slots=True)
class Segment:
    lo: float
    hi: float
    modes: tuple[int, ...]

    @property
    def is_gap(self) -> bool:
        return not self.modes

    @property
    def multiplicity(self) -> int:
        return len(self.modes)

    def to_dict(self) -> dict[str, Any]:
        return {"interval": [self.lo, self.hi], "modes": list(self.modes)}


@dataclass(frozen=True, slots=True, eq=False)
class BandStructure:
    chart: ActionAngleChart
    lmax: int
    bands: tuple[Band, ...]
    period_top: float
    period_bottom: float
    degenerate: bool
    segments: tuple[Segment, ...] = field(default=())

    def band(self, l: int) -> Band:
        if not 1 <= l <= self.lmax:
            raise DomainError(f"mode {l} outside 1..{self.lmax}")
        return self.bands[l - 1]

    def beta(self, l: int, E: ArrayLike) -> FloatArray:
        return band_scale(l) / self.chart.period(E) ** 2

    def beta_slope(self, l: int, E: ArrayLike) -> FloatArray:
        """d beta_l / dE = -2 (4 pi l)^2 T' / T^3 (negative)."""
        T = self.chart.period(E)
        return -2.0 * band_scale(l) * self.chart.period_derivative(E) / T**3

    def energy(self, l: int, beta: float) -> float:
        """Inverse branch E_l(beta) on [Emin, E0]."""
        if self.degenerate:
            raise DomainError("period is constant; the inverse branch E_l(beta) does not exist")
        b = self.band(l)
        if not b.beta_min * (1 - 1e-12) <= beta <= b.beta_max * (1 + 1e-12):
            raise DomainError(
                f"beta={beta:.10g} outside band {l} [{b.beta_min:.10g}, {b.beta_max:.10g}]"
            )
        target = math.sqrt(band_scale(l) / beta)
        lo, hi = self.chart.Emin, self.chart.E0
        f_lo = float(self.chart.period(lo)) - target
        f_hi = float(self.chart.period(hi)) - target
        if f_lo >= 0.0:
            return lo
        if f_hi <= 0.0:
            return hi
        return float(
            brentq(
                lambda E: float(self.chart.period(E)) - target,
                lo,
                hi,
                xtol=1e-15 * max(abs(lo), abs(hi), 1.0),
                rtol=4.0 * np.finfo(float).eps,
            )
        )

    def density(self, l: int, beta: float) -> float:
        """|p_l(beta)| = |dE_l/dbeta| = T^3 / (2 (4 pi l)^2 T') at E_l(beta)."""
        E = self.energy(l, beta)
        T = float(self.chart.period(E))
        dT = float(self.chart.period_derivative(E))
        if dT <= 0.0:
            raise DomainError(f"T'(E) is not positive at E={E:.6g}; density undefined")
        return T**3 / (2.0 * band_scale(l) * dT)

    def modes_at(self, beta: float) -> tuple[int, ...]:
        return tuple(b.l for b in self.bands if b.beta_min < beta < b.beta_max)

    def in_union(self, beta: float) -> bool:
        return any(b.beta_min <= beta <= b.beta_max for b in self.bands)

    def edges(self) -> list[float]:
        return [v for b in self.bands for v in (b.beta_min, b.beta_max)]

    def no_gap_condition(self) -> dict[str, Any]:
        """T(E0) > 2 T(Emin) together with the direct overlap test of neighbouring bands."""
        overlap = all(
            self.bands[i + 1].beta_min < self.bands[i].beta_max for i in range(self.lmax - 1)
        )
        return {
            "T_E0": self.period_top,
            "T_Emin": self.period_bottom,
            "no_gap": bool(self.period_top > 2.0 * self.period_bottom),
            "bands_overlap": bool(overlap),
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "lmax": self.lmax,
            "degenerate": self.degenerate,
            "T_E0": self.period_top,
            "T_Emin": self.period_bottom,
            "bands": [b.to_dict() for b in self.bands],
            "segments": [s.to_dict() for s in self.segments],
        }
