"""Shooting construction of plane-symmetric steady states."""

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from antonov.config import DEFAULT_H_MAX, DEFAULT_H_MIN, DEFAULT_MAX_RADIUS, DEFAULT_STATE_NODES
from antonov.core.errors import DomainError, SolverError
from antonov.core.observability.timing import timed
from antonov.core.quadrature import tanh_sinh
from antonov.features.steady_state.domain import (
    AnsatzProfile,
    HarmonicWell,
    SteadyState,
    rho_of_depth,
)

logger = logging.getLogger(__name__)


def rho_of_depth_quadrature(profile: AnsatzProfile, h: float, *, tol: float = 1e-13) -> float:
    """Brute-force velocity integral behind ``rho_of_depth``; used to verify the closed forms."""
    if h < 0:
        raise DomainError("depth must be non-negative")
    if h == 0:
        return 0.0
    zeroed = profile.with_cutoff(0.0)
    vmax = math.sqrt(2.0 * h)
    value, _ = tanh_sinh(lambda v: zeroed.phi(-(h - 0.5 * v * v)), 0.0, vmax, tol=tol)
    return 2.0 * value


def _shoot(profile: AnsatzProfile, h: float, tol: float, max_radius: float) -> Any:
    def rhs(_x: float, y: np.ndarray) -> list[float]:
        return [y[1], 4.0 * math.pi * float(rho_of_depth(profile, max(h - y[0], 0.0)))]

    def reach_depth(_x: float, y: np.ndarray) -> float:
        return float(y[0] - h)

    reach_depth.terminal = True  # type: ignore[attr-defined]
    reach_depth.direction = 1.0  # type: ignore[attr-defined]

    sol = solve_ivp(
        rhs,
        (0.0, float(max_radius)),
        [0.0, 0.0],
        method="DOP853",
        rtol=tol,
        atol=tol * h * 1e-3,
        dense_output=True,
        events=reach_depth,
    )
    if sol.status == -1:
        raise SolverError(f"steady-state integration failed: {sol.message}")
    if not sol.t_events or len(sol.t_events[0]) == 0:
        raise SolverError(
            f"potential did not reach depth h={h:g} before x-bound {max_radius:g}"
        )
    return sol


@timed("solve_steady_state")
def solve_steady_state(
    profile: AnsatzProfile,
    depth: float,
    *,
    tol: float = 1e-10,
    max_radius: float = DEFAULT_MAX_RADIUS,
    nodes: int = DEFAULT_STATE_NODES,
) -> SteadyState:
    """Integrate W'' = 4 pi rho(h - W) from the centre until W = h.

    The support radius is the event location; M0 = W'(R0)/(2 pi), E0 = 2 pi M0 R0
    and Emin = E0 - h fix the gauge of the linear tail.
    """
    if not depth > 0:
        raise DomainError("depth must be positive")
    if not tol > 0:
        raise DomainError("tol must be positive")
    h = float(depth)
    sol = _shoot(profile, h, tol, max_radius)

    R0 = float(sol.t_events[0][0])
    slope = float(sol.y_events[0][0][1])
    x_nodes = np.linspace(0.0, R0, int(nodes))
    samples = sol.sol(x_nodes)
    w_nodes = np.clip(samples[0], 0.0, h)
    w_nodes[0], w_nodes[-1] = 0.0, h
    dw_nodes = samples[1]
    dw_nodes[0], dw_nodes[-1] = 0.0, slope
    if np.any(np.diff(dw_nodes) < -tol * max(slope, 1.0)):
        raise SolverError("internal error: W' is not monotone on [0, R0]")

    M0 = slope / (2.0 * math.pi)
    E0 = 2.0 * math.pi * M0 * R0
    state = SteadyState(
        profile=profile.with_cutoff(E0),
        h=h,
        tol=float(tol),
        M0=M0,
        R0=R0,
        E0=E0,
        Emin=E0 - h,
        x_nodes=x_nodes,
        w_nodes=w_nodes,
        dw_nodes=dw_nodes,
    )
    logger.info(
        "steady state %s k=%g h=%g: R0=%.10g M0=%.10g E0=%.10g",
        profile.kind.value, profile.k, h, R0, M0, E0,
        extra={"event": "steady_state", "profile": profile.kind.value},
    )
    return state


def _mass_at(profile: AnsatzProfile, h: float, tol: float, max_radius: float) -> float:
    sol = _shoot(profile, h, tol, max_radius)
    return float(sol.y_events[0][0][1]) / (2.0 * math.pi)


@timed("solve_for_mass")
def solve_for_mass(
    profile: AnsatzProfile,
    mass: float,
    *,
    tol: float = 1e-10,
    h_range: tuple[float, float] = (DEFAULT_H_MIN, DEFAULT_H_MAX),
    max_radius: float = DEFAULT_MAX_RADIUS,
    nodes: int = DEFAULT_STATE_NODES,
) -> SteadyState:
    """Find the depth whose steady state carries total mass ``mass``.

    Mass is increasing in depth; the bracket ``h_range`` is checked before the
    root search and reported when it does not contain the target.
    """
    if not mass > 0:
        raise DomainError("mass must be positive")
    lo, hi = (float(v) for v in h_range)
    m_lo = _mass_at(profile, lo, tol, max_radius)
    m_hi = _mass_at(profile, hi, tol, max_radius)
    if not m_lo < m_hi:
        raise SolverError(f"mass is not increasing over depth range [{lo:g}, {hi:g}]")
    if not m_lo <= mass <= m_hi:
        raise SolverError(
            f"target mass {mass:g} outside bracket M0(h={lo:g})={m_lo:g}, M0(h={hi:g})={m_hi:g}"
        )

    def residual(h: float) -> float:
        return _mass_at(profile, h, tol, max_radius) - mass

    h_star = float(brentq(residual, lo, hi, xtol=1e-14 * hi, rtol=4 * np.finfo(float).eps))
    state = solve_steady_state(profile, h_star, tol=tol, max_radius=max_radius, nodes=nodes)
    if abs(state.M0 - mass) > max(tol, 1e-12) * mass * 10:
        raise SolverError(f"mass bisection stalled: M0={state.M0:g} vs target {mass:g}")
    return state


def harmonic_state(omega: float = 1.0, R0: float = 1.0, Emin: float = 0.0) -> HarmonicWell:
    return HarmonicWell(omega=float(omega), R0=float(R0), Emin=float(Emin))


def steady_state_report(state: SteadyState, *, points: int = 100, nodes: int = 16) -> dict[str, Any]:
    """Mass-radius identity, central curvature, Poisson residual and density monotonicity."""
    xs = np.linspace(0.0, state.R0, points)
    t, w = np.polynomial.legendre.leggauss(nodes)
    pieces = [0.0]
    for a, b in zip(xs[:-1], xs[1:], strict=True):
        half = 0.5 * (b - a)
        pieces.append(half * float(np.sum(w * state.rho0(a + half * (t + 1.0)))))
    enclosed = 4.0 * math.pi * np.cumsum(pieces)
    poisson = float(np.max(np.abs(state.dU0(xs) - enclosed)))
    delta = 1e-4 * state.R0
    curvature = float(state.dU0(delta) - state.dU0(-delta)) / (2.0 * delta)
    rho = state.rho0(np.linspace(0.0, state.R0 - state.tol, points))
    return {
        "R0": state.R0,
        "M0": state.M0,
        "E0": state.E0,
        "Emin": state.Emin,
        "mass_radius_defect": abs(state.E0 - 2.0 * math.pi * state.R0 * state.M0) / state.E0,
        "curvature_defect": abs(curvature - 4.0 * math.pi * float(state.rho0(0.0))) / curvature,
        "poisson_residual": poisson,
        "density_decreasing": bool(np.all(np.diff(rho) < 0.0)),
    }
