"""
Steady-state domain: ansatz profiles, the depth-to-density closure, and the
potential-well evaluators shared by every downstream module.

Energies enter the evaluators through the *well* ``W(x) = U0(x) - Emin``; keeping
the offset Emin out of the arithmetic avoids cancellation in ``E - U0(x)`` near
the bottom of the well.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicHermiteSpline
from scipy.special import erf, gammaln

from antonov.core.errors import DomainError

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]


class ProfileKind(str, Enum):
    POLYTROPE = "polytrope"
    KING = "king"


@dataclass(frozen=True, slots=True)
class AnsatzProfile:
    """phi(E) = (E0 - E)_+^k (polytrope) or exp(E0 - E) - 1 on E < E0 (King)."""

    kind: ProfileKind = ProfileKind.POLYTROPE
    k: float = 1.0
    E0: float = math.nan

    def __post_init__(self) -> None:
        if not isinstance(self.kind, ProfileKind):
            object.__setattr__(self, "kind", ProfileKind(str(self.kind).lower()))
        if self.kind is ProfileKind.POLYTROPE and self.k < 1.0:
            raise DomainError(f"polytrope exponent must satisfy k >= 1, got {self.k}")

    @classmethod
    def polytrope(cls, k: float = 1.0) -> AnsatzProfile:
        return cls(ProfileKind.POLYTROPE, float(k))

    @classmethod
    def king(cls) -> AnsatzProfile:
        return cls(ProfileKind.KING, 1.0)

    def with_cutoff(self, E0: float) -> AnsatzProfile:
        return replace(self, E0=float(E0))

    def phi(self, E: ArrayLike) -> FloatArray:
        depth = np.maximum(self._require_cutoff() - np.asarray(E, dtype=float), 0.0)
        if self.kind is ProfileKind.KING:
            return np.expm1(depth)
        return depth**self.k

    def _require_cutoff(self) -> float:
        if math.isnan(self.E0):
            raise DomainError("profile cutoff E0 is not set; solve the steady state first")
        return self.E0

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "k": self.k, "E0": self.E0}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> AnsatzProfile:
        return cls(ProfileKind(str(d.get("kind", "polytrope"))), float(d.get("k", 1.0)),
                   float(d.get("E0", math.nan)))


def rho_of_depth(profile: AnsatzProfile, h: ArrayLike) -> FloatArray:
    """Spatial density 2 * int_0^sqrt(2h) phi(E0 - h + v^2/2) dv at depth h = E0 - U0.

    Closed forms: sqrt(2 pi) Gamma(k+1)/Gamma(k+3/2) h^(k+1/2) for polytropes and
    sqrt(2 pi) e^h erf(sqrt h) - 2 sqrt(2h) for King.
    """
    arr = np.asarray(h, dtype=float)
    if np.any(arr < 0):
        raise DomainError("depth must be non-negative")
    if profile.kind is ProfileKind.KING:
        closed = math.sqrt(2.0 * math.pi) * np.exp(arr) * erf(np.sqrt(arr)) - 2.0 * np.sqrt(2.0 * arr)
        # series for small depth avoids the cancellation between the two terms
        series = (4.0 * math.sqrt(2.0) / 3.0) * arr**1.5 * (1.0 + 0.4 * arr + (4.0 / 35.0) * arr**2)
        return np.maximum(np.where(arr < 1e-3, series, closed), 0.0)
    k = profile.k
    const = math.sqrt(2.0 * math.pi) * math.exp(gammaln(k + 1.0) - gammaln(k + 1.5))
    return const * arr ** (k + 0.5)


def phi_prime_abs(profile: AnsatzProfile, E: ArrayLike) -> FloatArray:
    """|phi'(E)|: k (E0-E)^(k-1) for polytropes, e^(E0-E) for King.

    At or above E0 a polytrope with k > 1 has zero weight; that degeneracy is
    logged since energy grids are expected to stay below E0.
    """
    depth = profile._require_cutoff() - np.asarray(E, dtype=float)
    if profile.kind is ProfileKind.KING:
        return np.exp(np.maximum(depth, 0.0))
    if profile.k == 1.0:
        return np.ones_like(depth)
    if np.any(depth <= 0):
        logger.warning(
            "phi' weight vanishes at E >= E0 for k=%.3g", profile.k,
            extra={"event": "degenerate_weight"},
        )
    return profile.k * np.maximum(depth, 0.0) ** (profile.k - 1.0)


class PotentialWell(ABC):
    """Even confining potential U0 with a cutoff energy E0 and support radius R0."""

    __slots__ = ()

    profile: AnsatzProfile
    M0: float
    R0: float
    E0: float
    Emin: float

    @property
    def depth(self) -> float:
        return self.E0 - self.Emin

    @abstractmethod
    def well(self, x: ArrayLike) -> FloatArray:
        """U0(x) - Emin."""

    @abstractmethod
    def dU0(self, x: ArrayLike) -> FloatArray: ...

    @abstractmethod
    def rho0(self, x: ArrayLike) -> FloatArray: ...

    @abstractmethod
    def d2U0(self, x: ArrayLike) -> FloatArray: ...

    def U0(self, x: ArrayLike) -> FloatArray:
        return self.Emin + self.well(x)

    def phi_prime_abs(self, E: ArrayLike) -> FloatArray:
        return phi_prime_abs(self.profile, E)

    def period_limit(self) -> float:
        """Small-oscillation period 2 pi / sqrt(U0''(0))."""
        return float(2.0 * math.pi / math.sqrt(float(self.d2U0(0.0))))


@dataclass(frozen=True, slots=True, eq=False)
class SteadyState(PotentialWell):
    """Self-consistent plane-symmetric steady state sampled on [0, R0]."""

    profile: AnsatzProfile
    h: float
    tol: float
    M0: float
    R0: float
    E0: float
    Emin: float
    x_nodes: FloatArray
    w_nodes: FloatArray
    dw_nodes: FloatArray
    _w: CubicHermiteSpline = field(init=False, repr=False)
    _dw: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self) -> None:
        rho_nodes = rho_of_depth(self.profile, np.maximum(self.h - self.w_nodes, 0.0))
        object.__setattr__(self, "_w", CubicHermiteSpline(self.x_nodes, self.w_nodes, self.dw_nodes))
        object.__setattr__(
            self, "_dw", CubicHermiteSpline(self.x_nodes, self.dw_nodes, 4.0 * math.pi * rho_nodes)
        )

    def well(self, x: ArrayLike) -> FloatArray:
        ax = np.abs(np.asarray(x, dtype=float))
        inside = ax <= self.R0
        tail = self.h + 2.0 * math.pi * self.M0 * (ax - self.R0)
        return np.where(inside, self._w(np.minimum(ax, self.R0)), tail)

    def dU0(self, x: ArrayLike) -> FloatArray:
        arr = np.asarray(x, dtype=float)
        ax = np.abs(arr)
        inside = ax <= self.R0
        mag = np.where(inside, self._dw(np.minimum(ax, self.R0)), 2.0 * math.pi * self.M0)
        return np.sign(arr) * mag

    def rho0(self, x: ArrayLike) -> FloatArray:
        ax = np.abs(np.asarray(x, dtype=float))
        depth = np.maximum(self.h - self.well(np.minimum(ax, self.R0)), 0.0)
        return np.where(ax < self.R0, rho_of_depth(self.profile, depth), 0.0)

    def d2U0(self, x: ArrayLike) -> FloatArray:
        return 4.0 * math.pi * self.rho0(x)

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile": self.profile.to_dict(),
            "h": self.h,
            "tol": self.tol,
            "M0": self.M0,
            "R0": self.R0,
            "E0": self.E0,
            "Emin": self.Emin,
            "x_nodes": self.x_nodes.tolist(),
            "w_nodes": self.w_nodes.tolist(),
            "dw_nodes": self.dw_nodes.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SteadyState:
        return cls(
            profile=AnsatzProfile.from_dict(d["profile"]),
            h=float(d["h"]),
            tol=float(d["tol"]),
            M0=float(d["M0"]),
            R0=float(d["R0"]),
            E0=float(d["E0"]),
            Emin=float(d["Emin"]),
            x_nodes=np.asarray(d["x_nodes"], dtype=float),
            w_nodes=np.asarray(d["w_nodes"], dtype=float),
            dw_nodes=np.asarray(d["dw_nodes"], dtype=float),
        )


@dataclass(frozen=True, slots=True, eq=False)
class HarmonicWell(PotentialWell):
    """Test potential U0 = Emin + omega^2 x^2 / 2 (no self-consistency).

    The profile is a k=1 polytrope, so |phi'| = 1 and the Hilbert-space weight is
    the period alone. rho0 = omega^2/(4 pi) on [-R0, R0] keeps U0'' = 4 pi rho0.
    """

    omega: float = 1.0
    R0: float = 1.0
    Emin: float = 0.0
    profile: AnsatzProfile = field(init=False)
    E0: float = field(init=False)
    M0: float = field(init=False)

    def __post_init__(self) -> None:
        if self.omega <= 0 or self.R0 <= 0:
            raise DomainError("harmonic test potential needs omega > 0 and R0 > 0")
        E0 = self.Emin + 0.5 * self.omega**2 * self.R0**2
        object.__setattr__(self, "E0", E0)
        object.__setattr__(self, "M0", self.omega**2 * self.R0 / (2.0 * math.pi))
        object.__setattr__(self, "profile", AnsatzProfile.polytrope(1.0).with_cutoff(E0))

    def well(self, x: ArrayLike) -> FloatArray:
        return 0.5 * self.omega**2 * np.asarray(x, dtype=float) ** 2

    def dU0(self, x: ArrayLike) -> FloatArray:
        return self.omega**2 * np.asarray(x, dtype=float)

    def rho0(self, x: ArrayLike) -> FloatArray:
        ax = np.abs(np.asarray(x, dtype=float))
        return np.where(ax <= self.R0, self.omega**2 / (4.0 * math.pi), 0.0)

    def d2U0(self, x: ArrayLike) -> FloatArray:
        return np.full_like(np.asarray(x, dtype=float), self.omega**2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile": {"kind": "harmonic"},
            "omega": self.omega,
            "R0": self.R0,
            "E0": self.E0,
            "Emin": self.Emin,
            "M0": self.M0,
        }
