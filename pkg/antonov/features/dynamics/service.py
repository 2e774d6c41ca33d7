"""Spectral evolution, induced force and potential, damping metrics and free-flow asymptotics."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy.fft import rfft, rfftfreq
from scipy.integrate import cumulative_trapezoid, trapezoid

from antonov.config import DEFAULT_X_POINTS
from antonov.core.errors import DomainError, ValidationError
from antonov.core.observability.timing import timed
from antonov.features.dynamics.domain import INITIAL_KINDS, EvolutionResult, InitialData
from antonov.features.operators.domain import EigenSystem, FloatArray, ModeGrid
from antonov.features.operators.service import moment_matrix
from antonov.features.scattering.domain import WaveOperators
from antonov.features.scattering.service import inside_intervals

logger = logging.getLogger(__name__)

LATE_WINDOW = (0.8, 1.0)
EARLY_WINDOW = (0.0, 0.2)
CESARO_CHECKPOINTS = 10


def x_grid(grid: ModeGrid, points: int = DEFAULT_X_POINTS) -> FloatArray:
    return np.linspace(-grid.R0, grid.R0, points)


def evolve(
    system: EigenSystem, f0: ArrayLike, times: ArrayLike
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """(g, h, dg/dt) at every time, rows indexed by time.

    g = cos(sqrt(A) t) f0, h = -A^{-1/2} sin(sqrt(A) t) f0, dg/dt = A h.
    """
    ts = np.asarray(times, dtype=float).reshape(-1)
    root = np.sqrt(system.values)
    a = system.vectors.T @ np.asarray(f0, dtype=float)
    phase = np.outer(ts, root)
    cos, sin = np.cos(phase), np.sin(phase)
    V = system.vectors
    g = (cos * a[None, :]) @ V.T
    h = -((sin / root[None, :]) * a[None, :]) @ V.T
    dg = -((sin * root[None, :]) * a[None, :]) @ V.T
    return g, h, dg


def force(grid: ModeGrid, h: ArrayLike, x: ArrayLike) -> FloatArray:
    """F = -m(h) on ``x``; ``h`` holds orthonormalized coefficients, one row per snapshot."""
    Mx = moment_matrix(grid, x)
    return np.asarray(-(np.atleast_2d(h) @ Mx.T)).reshape(np.shape(h)[:-1] + (Mx.shape[0],))


def force_norm(x: ArrayLike, F: ArrayLike) -> FloatArray:
    """L2 norm over [-R0, R0] by the trapezoid rule along the last axis."""
    return np.sqrt(trapezoid(np.asarray(F) ** 2, np.asarray(x), axis=-1))


def potential(x: ArrayLike, F: ArrayLike) -> FloatArray:
    """U(x) = -integral of F from -R0 to x."""
    return np.asarray(-cumulative_trapezoid(np.asarray(F), np.asarray(x), axis=-1, initial=0.0))


def recurrence_horizon(system: EigenSystem) -> float:
    """2 pi over the median nearest-neighbour gap of sqrt(lambda) inside the bands."""
    roots = np.sort(np.sqrt(system.values[system.indices("essential")]))
    if roots.size < 2:
        return math.inf
    gaps = np.diff(roots)
    nearest = np.minimum(np.r_[gaps, math.inf], np.r_[math.inf, gaps])
    gap = float(np.median(nearest))
    return 2.0 * math.pi / gap if gap > 0 else math.inf


@timed("run_evolution")
def run_evolution(
    grid: ModeGrid,
    system: EigenSystem,
    initial: InitialData,
    times: ArrayLike,
    *,
    x_points: int = DEFAULT_X_POINTS,
) -> EvolutionResult:
    ts = np.asarray(times, dtype=float)
    g, h, dg = evolve(system, initial.coefficients, ts)
    x = x_grid(grid, x_points)
    Mx = moment_matrix(grid, x)
    F = -(h @ Mx.T)
    dF = g @ Mx.T
    U = potential(x, F)
    a = g @ system.vectors
    energy = np.sum(dg**2, axis=1) + np.sum(a**2 * system.values[None, :], axis=1)

    guard = recurrence_horizon(system)
    warnings: list[str] = []
    if ts.size and float(ts[-1]) > 0.5 * guard:
        msg = f"horizon {float(ts[-1]):.4g} exceeds half the recurrence time {guard:.4g}"
        warnings.append(msg)
        logger.warning(msg, extra={"event": "recurrence_guard"})

    result = EvolutionResult(
        label=initial.kind,
        times=ts,
        g=g,
        h=h,
        dg=dg,
        x=x,
        force=F,
        force_rate=dF,
        potential=U,
        force_norm=force_norm(x, F),
        force_rate_norm=force_norm(x, dF),
        potential_sup=np.max(np.abs(U), axis=1),
        energy=energy,
        recurrence_horizon=guard,
        warnings=tuple(warnings),
    )
    logger.info(
        "evolved %s over %d steps to t=%.4g (energy drift %.2e)",
        initial.kind, ts.size, result.horizon, result.energy_drift,
        extra={"event": "evolution"},
    )
    return result


def _late_ratio(result: EvolutionResult, series: FloatArray) -> float:
    early = float(np.max(series[result.window(*EARLY_WINDOW)], initial=0.0))
    late = float(np.max(series[result.window(*LATE_WINDOW)], initial=0.0))
    return late / early if early > 0 else 0.0


def cesaro_means(result: EvolutionResult, series: FloatArray) -> list[tuple[float, float]]:
    """(T, (1/T) * integral of the series over [0, T]) at evenly spaced checkpoints."""
    running = cumulative_trapezoid(series, result.times, initial=0.0)
    out = []
    for T in np.linspace(result.horizon / CESARO_CHECKPOINTS, result.horizon, CESARO_CHECKPOINTS):
        i = int(np.searchsorted(result.times, T, side="right")) - 1
        t = float(result.times[i])
        out.append((t, float(running[i]) / t if t > 0 else float(series[0])))
    return out


def fft_peak(result: EvolutionResult) -> dict[str, float]:
    """Dominant frequency of s(t) = <F(t), F_hat> with F_hat the profile at the largest force."""
    k = int(np.argmax(result.force_norm))
    ref = result.force[k]
    scale = float(np.linalg.norm(ref))
    if scale == 0.0 or result.times.size < 4:
        return {"frequency": 0.0, "bin_width": 0.0, "amplitude": 0.0}
    signal = result.force @ (ref / scale)
    dt = float(result.times[1] - result.times[0])
    spectrum = np.abs(rfft(signal - signal.mean()))
    freqs = rfftfreq(signal.size, dt)
    i = 1 + int(np.argmax(spectrum[1:]))
    return {
        "frequency": float(freqs[i]),
        "bin_width": float(freqs[1] - freqs[0]),
        "amplitude": float(spectrum[i]),
    }


def damping_report(
    result: EvolutionResult,
    *,
    reference: EvolutionResult | None = None,
) -> dict[str, Any]:
    """Late-window force ratio, Cesaro averages of |dF/dt| and sup|U|, and the potential bound."""
    R0 = float(-result.x[0])
    bound = math.sqrt(2.0 * R0) * result.force_norm
    slack = 1e-8 * float(np.max(bound, initial=0.0))
    rate = cesaro_means(result, result.force_rate_norm)
    pot = cesaro_means(result, result.potential_sup)
    rate_values = [v for _, v in rate]
    report: dict[str, Any] = {
        "label": result.label,
        "horizon": result.horizon,
        "late_ratio": _late_ratio(result, result.force_norm),
        "potential_late_ratio": _late_ratio(result, result.potential_sup),
        "cesaro_force_rate": rate,
        "cesaro_potential": pot,
        "cesaro_monotone": all(
            b <= a * (1.0 + 1e-9) for a, b in zip(rate_values, rate_values[1:], strict=False)
        ),
        "potential_bound_holds": bool(np.all(result.potential_sup <= bound + slack)),
        "energy_drift": result.energy_drift,
        "recurrence_horizon": result.recurrence_horizon,
        "horizon_ok": result.horizon <= 0.5 * result.recurrence_horizon,
        "warnings": list(result.warnings),
        "fft": fft_peak(result),
    }
    if reference is not None:
        report["reference_late_ratio"] = _late_ratio(reference, reference.force_norm)
    return report


def free_flow_comparison(
    result: EvolutionResult,
    initial: InitialData,
    beta0: FloatArray,
    waves: WaveOperators,
) -> dict[str, Any]:
    """||cos(sqrt(A) t) f0 - g(t)|| with g(t) = (e^{-it sqrt(A0)} W+^H f0 + e^{it sqrt(A0)} W-^H f0) / 2."""
    f0 = initial.coefficients
    u_plus = waves.plus.conj().T @ f0
    u_minus = waves.minus.conj().T @ f0
    root = np.sqrt(beta0)
    phase = np.exp(-1j * np.outer(result.times, root))
    asymptote = 0.5 * (phase * u_plus[None, :] + phase.conj() * u_minus[None, :])
    distance = np.linalg.norm(result.g - asymptote, axis=1)
    late = result.window(*LATE_WINDOW)
    initial_distance = float(distance[0])
    late_mean = float(np.mean(distance[late])) if np.any(late) else initial_distance
    return {
        "initial_distance": initial_distance,
        "late_cesaro_distance": late_mean,
        "ratio": late_mean / initial_distance if initial_distance > 0 else 0.0,
        "distance": distance.tolist(),
    }


def propagator_identity_residual(system: EigenSystem, t: float, *, samples: int = 4, seed: int = 0) -> float:
    """cos^2 + (A^{-1/2} sin) A (A^{-1/2} sin) - I on random vectors."""
    rng = np.random.default_rng(seed)
    root = np.sqrt(system.values)
    c = system.function(lambda lam: np.cos(np.sqrt(lam) * t))
    s = system.function(lambda lam: np.sin(np.sqrt(lam) * t) / np.sqrt(lam))
    a = system.function(lambda lam: lam)
    worst = 0.0
    for _ in range(samples):
        f = rng.standard_normal(root.size)
        r = c @ (c @ f) + s @ (a @ (s @ f)) - f
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(f)))
    return worst


def force_singular_values(grid: ModeGrid, x: ArrayLike, *, tail_index: int = 30) -> dict[str, Any]:
    """Singular values of h -> F in the trapezoid-weighted L2 norm."""
    xs = np.asarray(x, dtype=float)
    w = np.full(xs.size, xs[1] - xs[0])
    w[[0, -1]] *= 0.5
    sv = np.linalg.svd(np.sqrt(w)[:, None] * moment_matrix(grid, xs), compute_uv=False)
    top = float(sv[0]) if sv.size else 0.0
    return {
        "singular_values": sv.tolist(),
        "tail_ratio": float(sv[tail_index]) / top if sv.size > tail_index and top > 0 else 0.0,
        "monotone": bool(np.all(np.diff(sv) <= 1e-12 * max(top, 1.0))),
    }


def project_ac(
    system: EigenSystem, intervals: Sequence[tuple[float, float]], f: ArrayLike
) -> FloatArray:
    mask = inside_intervals(system.values, intervals)
    V = system.vectors[:, mask]
    return np.asarray(V @ (V.T @ np.asarray(f, dtype=float)))


def _unit(c: FloatArray) -> FloatArray:
    n = float(np.linalg.norm(c))
    if n == 0.0:
        raise DomainError("initial data vanishes after projection")
    return c / n


def bump_data(grid: ModeGrid, mode: int, center: float, width: float) -> InitialData:
    """Gaussian profile in the scaled energy s in [0, 1] carried by one sine mode."""
    if not 1 <= mode <= grid.lmax:
        raise ValidationError(f"bump mode {mode} outside 1..{grid.lmax}")
    e_lo, e_hi = grid.energy_range
    s = (grid.energies - e_lo) / (e_hi - e_lo)
    g = np.zeros((grid.lmax, grid.n_energy))
    g[mode - 1] = np.exp(-0.5 * ((s - center) / width) ** 2)
    return InitialData("bump", _unit(grid.orthonormalize(g)), {"mode": mode, "center": center, "width": width})


def random_ac_data(
    grid: ModeGrid, system: EigenSystem, intervals: Sequence[tuple[float, float]], *, seed: int = 0
) -> InitialData:
    rng = np.random.default_rng(seed)
    c = project_ac(system, intervals, rng.standard_normal(grid.size))
    return InitialData("random_ac", _unit(c), {"seed": seed})


def eigenvector_data(grid: ModeGrid, system: EigenSystem, x: ArrayLike) -> InitialData:
    """Lowest discrete eigenvector; without one, the eigenvector with the largest force moment."""
    discrete = system.indices("discrete")
    if discrete.size:
        k = int(discrete[0])
    else:
        Mx = moment_matrix(grid, x)
        k = int(np.argmax(np.linalg.norm(Mx @ system.vectors, axis=0)))
    return InitialData(
        "eigenvector",
        system.vectors[:, k].copy(),
        {"index": k, "eigenvalue": float(system.values[k]), "label": system.labels[k]},
    )


def quasi_mode_data(system: EigenSystem, candidates: Sequence[float]) -> InitialData:
    if not candidates:
        raise DomainError("no embedded candidate to build a quasi-mode from")
    gamma = float(candidates[0])
    k = int(np.argmin(np.abs(system.values - gamma)))
    return InitialData(
        "quasi_mode",
        system.vectors[:, k].copy(),
        {"index": k, "eigenvalue": float(system.values[k]), "candidate": gamma},
    )


def make_initial_data(
    kind: str,
    grid: ModeGrid,
    system: EigenSystem,
    intervals: Sequence[tuple[float, float]],
    *,
    candidates: Sequence[float] = (),
    bump_mode: int = 1,
    bump_center: float = 0.5,
    bump_width: float = 0.08,
    seed: int = 0,
    x_points: int = DEFAULT_X_POINTS,
) -> InitialData:
    if kind not in INITIAL_KINDS:
        raise ValidationError(f"initial data must be one of {', '.join(INITIAL_KINDS)}")
    if kind == "bump":
        return bump_data(grid, bump_mode, bump_center, bump_width)
    if kind == "random_ac":
        return random_ac_data(grid, system, intervals, seed=seed)
    if kind == "eigenvector":
        return eigenvector_data(grid, system, x_grid(grid, x_points))
    return quasi_mode_data(system, candidates)


def ac_projected(
    initial: InitialData, system: EigenSystem, intervals: Sequence[tuple[float, float]]
) -> InitialData:
    c = project_ac(system, intervals, initial.coefficients)
    return InitialData(f"{initial.kind}_ac", _unit(c), {**initial.meta, "projected": True})
