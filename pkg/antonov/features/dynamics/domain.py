"""Evolution snapshots of the Antonov wave equation and the force/potential they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from antonov.features.operators.domain import FloatArray

INITIAL_KINDS = ("bump", "random_ac", "eigenvector", "quasi_mode")


@dataclass(frozen=True, slots=True, eq=False)
class InitialData:
    kind: str
    coefficients: FloatArray
    meta: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True, eq=False)
class EvolutionResult:
    """g(t) = cos(sqrt(A) t) f0, h(t) = -A^{-1/2} sin(sqrt(A) t) f0 and derived fields.

    Arrays indexed by time carry it on axis 0. ``force`` is F = -m(h) and
    ``force_rate`` is dF/dt = m(g) on ``x``, a uniform grid of [-R0, R0].
    """

    label: str
    times: FloatArray
    g: FloatArray
    h: FloatArray
    dg: FloatArray
    x: FloatArray
    force: FloatArray
    force_rate: FloatArray
    potential: FloatArray
    force_norm: FloatArray
    force_rate_norm: FloatArray
    potential_sup: FloatArray
    energy: FloatArray
    recurrence_horizon: float
    warnings: tuple[str, ...] = ()

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def energy_drift(self) -> float:
        e0 = float(self.energy[0]) or 1.0
        return float(np.max(np.abs(self.energy - self.energy[0]))) / abs(e0)

    def window(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of times in [lo * H, hi * H]."""
        H = self.horizon
        return (self.times >= lo * H) & (self.times <= hi * H)

    def series_rows(self) -> list[list[float]]:
        return [
            [float(t), float(a), float(b), float(c), float(e)]
            for t, a, b, c, e in zip(
                self.times, self.force_norm, self.force_rate_norm, self.potential_sup, self.energy,
                strict=True,
            )
        ]
