"""
Scattering domain: beta rules, generalized Fourier maps and the stationary wave operators.

A map stores one row per (beta node, covering mode) pair in orthonormalized
coefficients. Rows that were rejected (energy outside the grid, ill-conditioned
boundary solve) stay in place as zero rows so free and perturbed maps share the
same layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from antonov.features.operators.domain import ComplexArray, FloatArray

MAP_KINDS = ("free", "plus", "minus")


@dataclass(frozen=True, slots=True)
class BetaRule:
    """Gauss-Legendre nodes on the band segments with the exceptional neighbourhoods cut out."""

    nodes: FloatArray
    weights: FloatArray
    segment: NDArray[np.intp]
    intervals: tuple[tuple[float, float], ...]
    per_segment: int

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": int(self.nodes.size),
            "per_segment": self.per_segment,
            "intervals": [list(iv) for iv in self.intervals],
        }


@dataclass(frozen=True, slots=True, eq=False)
class SpectralMap:
    kind: str
    rows: NDArray[Any]
    beta: FloatArray
    mode: NDArray[np.intp]
    node: NDArray[np.intp]
    accepted: NDArray[np.bool_]
    condition: FloatArray = field(default_factory=lambda: np.zeros(0))

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.rows.shape[0]), int(self.rows.shape[1]))

    @property
    def n_rejected(self) -> int:
        return int(np.count_nonzero(~self.accepted))

    def gram(self) -> NDArray[Any]:
        """F^H F."""
        return np.asarray(self.rows.conj().T @ self.rows)

    def apply(self, c: NDArray[Any]) -> NDArray[Any]:
        return np.asarray(self.rows @ c)

    def row_norms(self) -> FloatArray:
        return np.asarray(np.linalg.norm(self.rows, axis=1))


@dataclass(frozen=True, slots=True, eq=False)
class WaveOperators:
    """W+- = F+-^H F and S = W+^H W-."""

    plus: ComplexArray
    minus: ComplexArray
    scattering: ComplexArray

    def wave(self, sign: int) -> ComplexArray:
        return self.plus if sign > 0 else self.minus


@dataclass(frozen=True, slots=True)
class ResidualTable:
    """Named residuals of one scattering run plus the grid they were measured on."""

    values: dict[str, float]
    grid: dict[str, Any]
    checks: dict[str, bool] = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def to_dict(self) -> dict[str, Any]:
        return {"residuals": dict(self.values), "checks": dict(self.checks), "grid": dict(self.grid)}


@dataclass(frozen=True, slots=True, eq=False)
class ScatteringResult:
    free: SpectralMap
    plus: SpectralMap
    minus: SpectralMap
    waves: WaveOperators
    rule: BetaRule
    residuals: ResidualTable

    def perturbed(self, sign: int) -> SpectralMap:
        return self.plus if sign > 0 else self.minus
