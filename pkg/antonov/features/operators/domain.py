"""
Operator domain: the sine-mode/energy grid and the matrices built on it.

Coefficient conventions:

- raw coefficients ``g[l-1, j]`` of g(theta, E_j) = sum_l g_l(E_j) e_l(theta) with
  e_l(theta) = sqrt(2) sin(4 pi l theta);
- orthonormalized coefficients ``c[(l-1) * N_E + j] = sqrt(w_j) g[l-1, j]`` in which
  the weighted scalar product is the Euclidean one. Every OperatorMatrix acts on c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from antonov.core.errors import ValidationError
from antonov.features.action_angle.domain import ActionAngleChart
from antonov.features.band_structure.domain import BandStructure

FloatArray = NDArray[np.float64]
ComplexArray = NDArray[np.complex128]

SQRT2 = math.sqrt(2.0)
EIGHT_PI = 8.0 * math.pi


def mode_functions(lmax: int, theta: ArrayLike) -> FloatArray:
    """Rows e_l(theta) = sqrt(2) sin(4 pi l theta), l = 1..lmax."""
    th = np.asarray(theta, dtype=float)
    ls = np.arange(1, lmax + 1, dtype=float).reshape((-1,) + (1,) * th.ndim)
    return SQRT2 * np.sin(4.0 * math.pi * ls * th)


@dataclass(frozen=True, slots=True, eq=False)
class ModeGrid:
    """Discretization of the weighted space restricted to modes 1..lmax.

    Coarse energies carry the unknowns; the fine energy rule is where energy
    integrals of the spline-interpolated coefficient profiles are evaluated.
    """

    chart: ActionAngleChart
    bands: BandStructure
    lmax: int
    energy_range: tuple[float, float]
    energies: FloatArray
    energy_weights: FloatArray
    periods: FloatArray
    period_derivatives: FloatArray
    phi_prime: FloatArray
    mass_weights: FloatArray
    fine_energies: FloatArray
    fine_weights: FloatArray
    fine_periods: FloatArray
    fine_derivatives: FloatArray
    cardinal: CubicSpline
    cardinal_fine: FloatArray
    x_nodes: FloatArray
    x_weights: FloatArray
    theta_nodes: FloatArray
    fine_theta: FloatArray
    reach: NDArray[np.bool_]
    kernel: FloatArray
    moment: FloatArray
    beta: FloatArray = field(init=False)
    beta_fine: FloatArray = field(init=False)
    beta_slope_fine: FloatArray = field(init=False)

    def __post_init__(self) -> None:
        scale = (4.0 * math.pi * np.arange(1, self.lmax + 1, dtype=float)) ** 2
        object.__setattr__(self, "beta", scale[:, None] / self.periods[None, :] ** 2)
        object.__setattr__(self, "beta_fine", scale[:, None] / self.fine_periods[None, :] ** 2)
        object.__setattr__(
            self,
            "beta_slope_fine",
            -2.0 * scale[:, None] * self.fine_derivatives[None, :] / self.fine_periods[None, :] ** 3,
        )

    @property
    def n_energy(self) -> int:
        return int(self.energies.size)

    @property
    def n_theta(self) -> int:
        return int(self.theta_nodes.size)

    @property
    def size(self) -> int:
        return self.lmax * self.n_energy

    @property
    def R0(self) -> float:
        return float(self.chart.state.R0)

    @property
    def beta_flat(self) -> FloatArray:
        return self.beta.reshape(-1)

    @property
    def beta_spacing(self) -> float:
        """Typical spacing of the discrete free spectrum inside one band."""
        diffs = np.abs(np.diff(self.beta, axis=1))
        spacing = float(np.median(diffs)) if diffs.size else 0.0
        return spacing if spacing > 0.0 else 1e-9 * float(self.beta.max())

    @property
    def sqrt_weights(self) -> FloatArray:
        return np.sqrt(self.mass_weights)

    def index(self, l: int, j: int) -> int:
        return (l - 1) * self.n_energy + j

    def orthonormalize(self, g: ArrayLike) -> FloatArray:
        arr = np.asarray(g).reshape(self.lmax, self.n_energy)
        return (arr * self.sqrt_weights[None, :]).reshape(-1)

    def raw(self, c: ArrayLike) -> Any:
        arr = np.asarray(c).reshape(self.lmax, self.n_energy)
        return arr / self.sqrt_weights[None, :]

    def weighted_norm(self, g: ArrayLike) -> float:
        return float(np.linalg.norm(self.orthonormalize(g)))

    def modes(self, theta: ArrayLike) -> FloatArray:
        return mode_functions(self.lmax, theta)

    def describe(self) -> dict[str, Any]:
        return {
            "lmax": self.lmax,
            "n_energy": self.n_energy,
            "n_fine": int(self.fine_energies.size),
            "n_x": int(self.x_nodes.size),
            "n_theta": self.n_theta,
            "energy_range": list(self.energy_range),
        }


@dataclass(frozen=True, slots=True)
class OperatorMatrix:
    name: str
    matrix: NDArray[Any]
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.matrix.shape[0]), int(self.matrix.shape[1]))

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.matrix))

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def symmetry_defect(self) -> float:
        """||M - M^T|| relative to ||M||."""
        scale = self.norm() or 1.0
        return float(np.linalg.norm(self.matrix - self.matrix.T, 2)) / scale

    def apply(self, c: ArrayLike) -> NDArray[Any]:
        return np.asarray(self.matrix @ np.asarray(c))

    def scaled(self, factor: float) -> OperatorMatrix:
        return OperatorMatrix(self.name, factor * self.matrix, {**self.meta, "scale": factor})


SPECTRUM_LABELS = ("discrete", "gap", "unresolved", "essential")


@dataclass(frozen=True, slots=True)
class EigenSystem:
    """Full eigendecomposition of a symmetric operator matrix, ascending."""

    values: FloatArray
    vectors: FloatArray
    labels: tuple[str, ...]

    @property
    def min_value(self) -> float:
        return float(self.values[0])

    def indices(self, label: str) -> NDArray[np.intp]:
        if label not in SPECTRUM_LABELS:
            raise ValidationError(f"unknown spectrum label {label!r}")
        return np.flatnonzero(np.asarray(self.labels) == label)

    def counts(self) -> dict[str, int]:
        return {name: int(self.indices(name).size) for name in SPECTRUM_LABELS}

    def projector(self, mask: NDArray[np.bool_]) -> FloatArray:
        V = self.vectors[:, mask]
        return np.asarray(V @ V.T)

    def function(self, fn: Any) -> FloatArray:
        """phi(A) = V diag(phi(lambda)) V^T."""
        return np.asarray((self.vectors * fn(self.values)[None, :]) @ self.vectors.T)


@dataclass(frozen=True, slots=True)
class ScanPoint:
    gamma: float
    distance_plus: float
    distance_minus: float
    closest_plus: complex
    closest_minus: complex

    def to_row(self) -> list[Any]:
        return [self.gamma, self.distance_plus, self.distance_minus]


@dataclass(frozen=True, slots=True)
class Candidate:
    gamma: float
    distance: float
    sign: int
    refined: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {"gamma": self.gamma, "distance": self.distance, "sign": self.sign, "refined": self.refined}


@dataclass(frozen=True, slots=True, eq=False)
class ScanResult:
    """Birman-Schwinger scan of the boundary operators over a gamma grid."""

    points: tuple[ScanPoint, ...]
    eigenvalues_plus: tuple[ComplexArray, ...]
    eigenvalues_minus: tuple[ComplexArray, ...]
    candidates_plus: tuple[Candidate, ...]
    candidates_minus: tuple[Candidate, ...]
    coupling: float
    threshold: float
    spacing: float
    skipped: tuple[float, ...] = ()

    @property
    def gammas(self) -> FloatArray:
        return np.array([p.gamma for p in self.points])

    @property
    def flags_plus(self) -> set[int]:
        return _flag_indices(self.gammas, self.candidates_plus, self.spacing)

    @property
    def flags_minus(self) -> set[int]:
        return _flag_indices(self.gammas, self.candidates_minus, self.spacing)

    def signs_agree(self) -> bool:
        """Every + candidate has a - candidate within one grid spacing, and vice versa."""

        def covered(a: tuple[Candidate, ...], b: tuple[Candidate, ...]) -> bool:
            return all(
                any(abs(x.gamma - y.gamma) <= self.spacing * (1 + 1e-9) for y in b) for x in a
            )

        return covered(self.candidates_plus, self.candidates_minus) and covered(
            self.candidates_minus, self.candidates_plus
        )

    def candidates(self) -> list[float]:
        return sorted(c.gamma for c in self.candidates_plus)


def _flag_indices(gammas: FloatArray, cands: tuple[Candidate, ...], spacing: float) -> set[int]:
    out: set[int] = set()
    for c in cands:
        i = int(np.argmin(np.abs(gammas - c.gamma)))
        if abs(gammas[i] - c.gamma) <= spacing:
            out.add(i)
    return out


@dataclass(frozen=True, slots=True)
class ExceptionalPoint:
    gamma: float
    radius: float
    kind: str

    def to_dict(self) -> dict[str, Any]:
        return {"gamma": self.gamma, "radius": self.radius, "kind": self.kind}
