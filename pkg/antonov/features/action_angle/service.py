"""Orbit quadratures, the angle map and the energy chart."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.chebyshev import chebpts2
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from antonov.config import (
    DEFAULT_CHART_SIZE,
    DEFAULT_EMIN_CUTOFF,
    DEFAULT_MAX_CHEB_DEGREE,
    DEFAULT_MAX_WORKERS,
    DEFAULT_MIN_CHEB_DEGREE,
    DEFAULT_QUAD_TOL,
    DEFAULT_THETA_TABLE,
)
from antonov.core.errors import DomainError, QuadratureError
from antonov.core.observability.timing import timed
from antonov.core.parallel import parallel_map
from antonov.core.quadrature import tanh_sinh
from antonov.features.action_angle.domain import HALF_PI, ActionAngleChart, OrbitTable
from antonov.features.steady_state.domain import PotentialWell

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

_TAIL = 8


def _energy_offset(state: PotentialWell, E: float) -> float:
    e = float(E) - state.Emin
    depth = state.depth
    if not e > 0.0 or e > depth * (1.0 + 1e-12):
        raise DomainError(
            f"energy {E:.12g} outside (Emin, E0] = ({state.Emin:.12g}, {state.E0:.12g}]"
        )
    return min(e, depth)


def _turning_point_offset(state: PotentialWell, e: float) -> float:
    if e >= state.depth:
        return float(state.R0)
    return float(
        brentq(
            lambda x: float(state.well(x)) - e,
            0.0,
            state.R0,
            xtol=4e-16 * state.R0,
            rtol=4.0 * np.finfo(float).eps,
        )
    )


def turning_point(state: PotentialWell, E: float) -> float:
    """Positive root x_plus of U0(x) = E; x_minus = -x_plus by evenness."""
    return _turning_point_offset(state, _energy_offset(state, E))


def _chebyshev_fit(
    fn: Callable[[FloatArray], FloatArray],
    *,
    tol: float,
    min_degree: int,
    max_degree: int,
    what: str,
    reference: float = 0.0,
) -> tuple[Chebyshev, float]:
    """Interpolate ``fn`` on [-pi/2, pi/2], doubling the degree until the tail is below tol.

    The tail is measured against the largest coefficient or ``reference``, whichever
    is larger, so integrands that vanish identically still converge.
    """
    floor = 1e3 * np.finfo(float).eps
    deg = int(min_degree) | 1
    while True:
        series = Chebyshev.interpolate(fn, deg, domain=[-HALF_PI, HALF_PI])
        coef = np.abs(series.coef)
        scale = max(float(coef.max()), reference) or 1.0
        tail = float(coef[-_TAIL:].max()) / scale
        if tail <= max(tol, floor):
            return series, tail
        if deg >= max_degree:
            raise QuadratureError(
                f"{what} did not resolve at Chebyshev degree {deg} (tail {tail:.2e})",
                residual=tail,
            )
        deg = 2 * deg + 1


def _shape_factor(state: PotentialWell, y: FloatArray) -> FloatArray:
    """(U0'^2 - 2 W U0'') / U0'^2, continuous through y = 0 where it vanishes."""
    d1 = state.dU0(y)
    num = d1 * d1 - 2.0 * state.well(y) * state.d2U0(y)
    den = d1 * d1
    tiny = den <= 1e-300
    return np.where(tiny, 0.0, num / np.where(tiny, 1.0, den))


def orbit_table(
    state: PotentialWell,
    E: float,
    *,
    tol: float = DEFAULT_QUAD_TOL,
    theta_table: int = DEFAULT_THETA_TABLE,
    min_degree: int = DEFAULT_MIN_CHEB_DEGREE,
    max_degree: int = DEFAULT_MAX_CHEB_DEGREE,
    emin_cutoff: float = DEFAULT_EMIN_CUTOFF,
) -> OrbitTable:
    """Build the orbit at energy E: period, its derivative and the angle tables.

    T' is evaluated from the shape-factor integral; below ``emin_cutoff`` of the
    well depth the value at the cutoff energy is reported instead.
    """
    e = _energy_offset(state, E)
    x_plus = _turning_point_offset(state, e)

    def density_at(level: float, reach: float) -> Callable[[FloatArray], FloatArray]:
        def g(psi: FloatArray) -> FloatArray:
            gap = np.maximum(level - state.well(reach * np.sin(psi)), 1e-300)
            return reach * np.cos(psi) / np.sqrt(2.0 * gap)

        return g

    g = density_at(e, x_plus)
    density, tail = _chebyshev_fit(
        g, tol=tol, min_degree=min_degree, max_degree=max_degree, what=f"orbit at E={E:.6g}"
    )
    cumulative = density.integ(lbnd=-HALF_PI)
    period = 2.0 * float(cumulative(HALF_PI))

    e_cut = emin_cutoff * state.depth
    if e < e_cut:
        logger.warning(
            "T' requested %.3g above Emin; reporting the value at the cutoff %.3g",
            e, e_cut,
            extra={"event": "period_derivative_asymptote"},
        )
        level, reach = e_cut, _turning_point_offset(state, e_cut)
        g_level: Callable[[FloatArray], FloatArray] = density_at(level, reach)
    else:
        level, reach, g_level = e, x_plus, density

    def weighted(psi: FloatArray) -> FloatArray:
        return _shape_factor(state, reach * np.sin(psi)) * g_level(psi)

    shape, _ = _chebyshev_fit(
        weighted,
        tol=tol,
        min_degree=min_degree,
        max_degree=max_degree,
        what=f"period derivative at E={E:.6g}",
        reference=float(np.abs(density.coef).max()),
    )
    integral = shape.integ(lbnd=-HALF_PI)
    period_derivative = float(integral(HALF_PI)) / level

    psi_knots = np.linspace(-HALF_PI, HALF_PI, int(theta_table))
    theta_knots = cumulative(psi_knots) / period
    theta_knots[0], theta_knots[-1] = 0.0, 0.5
    if np.any(np.diff(theta_knots) <= 0.0):
        raise QuadratureError(f"angle table not monotone at E={E:.6g}", residual=tail)

    return OrbitTable(
        state=state,
        E=float(E),
        e=e,
        x_plus=x_plus,
        period=period,
        period_derivative=period_derivative,
        density=density,
        cumulative=cumulative,
        theta_knots=theta_knots,
        psi_knots=psi_knots,
        residual=tail,
    )


def period(state: PotentialWell, E: float, *, tol: float = DEFAULT_QUAD_TOL) -> float:
    """T(E) = 4 * integral over [0, x_plus] of (2(E - U0))^(-1/2).

    Computed by the Chebyshev rule in psi with x = x_plus * sin(psi); see
    ``period_tanh_sinh`` for the double-exponential evaluation in x used as a cross-check.
    """
    return orbit_table(state, E, tol=tol).period


def period_derivative(state: PotentialWell, E: float, *, tol: float = DEFAULT_QUAD_TOL) -> float:
    return orbit_table(state, E, tol=tol).period_derivative


def period_tanh_sinh(state: PotentialWell, E: float, *, tol: float = 1e-8) -> float:
    """Independent evaluation of T(E) in x by double-exponential quadrature split at 0."""
    e = _energy_offset(state, E)
    x_plus = _turning_point_offset(state, e)

    def f(x: FloatArray) -> FloatArray:
        return 1.0 / np.sqrt(2.0 * np.maximum(e - state.well(x), 1e-300))

    value, _ = tanh_sinh(f, 0.0, x_plus, tol=tol)
    return 4.0 * value


def angle(
    state: PotentialWell,
    x: ArrayLike,
    E: float,
    *,
    tol: float = DEFAULT_QUAD_TOL,
) -> FloatArray:
    """theta(x, E) in [0, 1/2]; positions beyond the turning points are clamped."""
    table = orbit_table(state, E, tol=tol)
    theta, clamped = table.theta(x, return_flag=True)
    if np.any(clamped):
        logger.info(
            "clamped %d positions outside [x-, x+] at E=%.6g",
            int(np.count_nonzero(clamped)), E,
            extra={"event": "angle_clamped"},
        )
    return theta


def chart_point(chart: ActionAngleChart, theta: ArrayLike, E: float) -> tuple[FloatArray, FloatArray]:
    """(x, v) at angle theta in [0, 1) and energy E."""
    table = chart.orbit(E)
    return table.position(theta), table.velocity(theta)


def period_limit_extrapolated(state: PotentialWell, *, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Extrapolate T to Emin from three small energies (quadratic in E - Emin)."""
    offsets = state.depth * np.array([1e-3, 2e-3, 4e-3])
    values = [orbit_table(state, state.Emin + de, tol=tol).period for de in offsets]
    coeffs = np.polyfit(offsets, values, 2)
    return float(coeffs[-1])


@timed("build_chart")
def build_chart(
    state: PotentialWell,
    *,
    chart_size: int = DEFAULT_CHART_SIZE,
    quad_tol: float = DEFAULT_QUAD_TOL,
    theta_table: int = DEFAULT_THETA_TABLE,
    min_degree: int = DEFAULT_MIN_CHEB_DEGREE,
    max_degree: int = DEFAULT_MAX_CHEB_DEGREE,
    emin_cutoff: float = DEFAULT_EMIN_CUTOFF,
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> ActionAngleChart:
    """Tabulate x_plus, T and T' on Chebyshev-Lobatto energies of [Emin, E0]."""
    if chart_size < 3:
        raise DomainError("chart_size must be >= 3")
    depth = state.depth
    offsets = 0.5 * depth * (chebpts2(int(chart_size)) + 1.0)
    offsets[0], offsets[-1] = 0.0, depth

    def build(offset: float) -> OrbitTable:
        return orbit_table(
            state,
            state.Emin + offset,
            tol=quad_tol,
            theta_table=theta_table,
            min_degree=min_degree,
            max_degree=max_degree,
            emin_cutoff=emin_cutoff,
        )

    tables = parallel_map(build, list(offsets[1:]), max_workers=max_workers, name="chart")
    bottom_dT = build(emin_cutoff * depth).period_derivative

    x_plus = np.array([0.0] + [t.x_plus for t in tables])
    periods = np.array([state.period_limit()] + [t.period for t in tables])
    derivs = np.array([bottom_dT] + [t.period_derivative for t in tables])

    if np.any(np.diff(periods) < -quad_tol * periods[-1] * 1e3):
        logger.warning("period is not increasing on the chart", extra={"event": "period_monotone"})

    chart = _assemble_chart(
        state,
        offsets,
        x_plus,
        periods,
        derivs,
        quad_tol=quad_tol,
        theta_table=theta_table,
        min_degree=min_degree,
        max_degree=max_degree,
        emin_cutoff=emin_cutoff,
    )
    chart.prime(tables)
    logger.info(
        "chart: T(Emin)=%.10g T(E0)=%.10g over %d energies",
        chart.period_bottom, chart.period_top, chart_size,
        extra={"event": "chart_built"},
    )
    return chart


def _assemble_chart(
    state: PotentialWell,
    offsets: FloatArray,
    x_plus: FloatArray,
    periods: FloatArray,
    derivs: FloatArray,
    *,
    quad_tol: float,
    theta_table: int,
    min_degree: int,
    max_degree: int,
    emin_cutoff: float,
) -> ActionAngleChart:
    degree = offsets.size - 1
    depth = state.depth
    return ActionAngleChart(
        state=state,
        energies=state.Emin + offsets,
        x_plus=x_plus,
        periods=periods,
        period_derivatives=derivs,
        period_series=Chebyshev.fit(offsets, periods, degree, domain=[0.0, depth]),
        derivative_series=Chebyshev.fit(offsets, derivs, degree, domain=[0.0, depth]),
        quad_tol=float(quad_tol),
        theta_table=int(theta_table),
        min_degree=int(min_degree),
        max_degree=int(max_degree),
        emin_cutoff=float(emin_cutoff),
    )


def chart_from_rows(
    state: PotentialWell,
    rows: Sequence[Mapping[str, float]],
    *,
    quad_tol: float = DEFAULT_QUAD_TOL,
    theta_table: int = DEFAULT_THETA_TABLE,
    min_degree: int = DEFAULT_MIN_CHEB_DEGREE,
    max_degree: int = DEFAULT_MAX_CHEB_DEGREE,
    emin_cutoff: float = DEFAULT_EMIN_CUTOFF,
) -> ActionAngleChart:
    """Rebuild a chart from stored (E, x_plus, T, dT) rows without touching any orbit.

    Orbits are still built lazily by ``ActionAngleChart.orbit`` when a caller needs them.
    """
    if len(rows) < 3:
        raise DomainError("a stored chart needs at least 3 rows")
    energies = np.array([float(r["E"]) for r in rows])
    depth = state.depth
    offsets = energies - state.Emin
    if (
        abs(offsets[0]) > 1e-12 * depth
        or abs(offsets[-1] - depth) > 1e-12 * depth
        or np.any(np.diff(offsets) <= 0.0)
    ):
        raise DomainError("stored chart does not span [Emin, E0] of this state")
    offsets[0], offsets[-1] = 0.0, depth
    return _assemble_chart(
        state,
        offsets,
        np.array([float(r["x_plus"]) for r in rows]),
        np.array([float(r["T"]) for r in rows]),
        np.array([float(r["dT"]) for r in rows]),
        quad_tol=quad_tol,
        theta_table=theta_table,
        min_degree=min_degree,
        max_degree=max_degree,
        emin_cutoff=emin_cutoff,
    )


def angle_holder_report(
    chart: ActionAngleChart,
    *,
    samples: int = 24,
    margin: float = 1e-2,
) -> dict[str, float]:
    """Sampled max of |theta(x,E1) - theta(x,E2)| / sqrt|E1 - E2| on [Emin + margin, E0]."""
    lo = chart.Emin + margin * chart.state.depth
    energies = np.linspace(lo, chart.E0, samples)
    xs = np.linspace(-chart.state.R0, chart.state.R0, 41)
    thetas = np.array([chart.orbit(E).theta(xs) for E in energies])
    ratios = []
    for a in range(samples):
        for b in range(a + 1, samples):
            dE = abs(energies[b] - energies[a])
            ratios.append(float(np.max(np.abs(thetas[b] - thetas[a]))) / math.sqrt(dE))
    return {"max_ratio": max(ratios), "energy_low": float(lo), "samples": float(samples)}
