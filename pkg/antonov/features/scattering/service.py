"""Generalized Fourier maps, stationary wave operators and their residual checks."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
from numpy.polynomial import Legendre
from numpy.typing import ArrayLike, NDArray

from antonov.config import (
    DEFAULT_COND_MAX,
    DEFAULT_EDGE_MARGIN,
    DEFAULT_MAX_WORKERS,
    DEFAULT_N_BETA,
)
from antonov.core.errors import DomainError
from antonov.core.observability.timing import timed
from antonov.core.parallel import CancelToken, parallel_map
from antonov.core.quadrature import gauss_legendre
from antonov.features.operators.boundary import boundary_kernel, moment_adjoint
from antonov.features.operators.domain import (
    ComplexArray,
    EigenSystem,
    ExceptionalPoint,
    FloatArray,
    ModeGrid,
    OperatorMatrix,
)
from antonov.features.scattering.domain import (
    BetaRule,
    ResidualTable,
    ScatteringResult,
    SpectralMap,
    WaveOperators,
)

logger = logging.getLogger(__name__)

SMOOTH_DEGREE = 4
REFINEMENT_NOISE = 0.2


def _cut(lo: float, hi: float, holes: list[tuple[float, float]]) -> list[tuple[float, float]]:
    pieces = [(lo, hi)]
    for a, b in holes:
        nxt = []
        for p, q in pieces:
            if b <= p or a >= q:
                nxt.append((p, q))
                continue
            if a > p:
                nxt.append((p, a))
            if b < q:
                nxt.append((b, q))
        pieces = nxt
    return [(p, q) for p, q in pieces if q > p]


def ac_intervals(
    grid: ModeGrid,
    exceptional: Sequence[ExceptionalPoint],
    *,
    edge_margin: float = DEFAULT_EDGE_MARGIN,
) -> list[tuple[int, float, float]]:
    """(segment index, lo, hi) pieces of the band segments outside every exceptional
    neighbourhood; edges are cut at least ``edge_margin * beta_1,min`` wide."""
    floor = edge_margin * grid.bands.bands[0].beta_min
    holes = sorted(
        (p.gamma - max(p.radius, floor), p.gamma + max(p.radius, floor)) for p in exceptional
    )
    pieces: list[tuple[int, float, float]] = []
    for s_idx, seg in enumerate(grid.bands.segments):
        if seg.is_gap:
            continue
        pieces.extend((s_idx, float(p), float(q)) for p, q in _cut(seg.lo, seg.hi, holes))
    if not pieces:
        raise DomainError("no band segment survives the exceptional cut; the bands are degenerate")
    return pieces


def beta_rule(
    grid: ModeGrid,
    exceptional: Sequence[ExceptionalPoint],
    *,
    n_beta: int = DEFAULT_N_BETA,
    edge_margin: float = DEFAULT_EDGE_MARGIN,
) -> BetaRule:
    """``n_beta`` Gauss-Legendre nodes per band segment, split over the pieces left
    after removing every exceptional neighbourhood, in proportion to their length."""
    pieces = ac_intervals(grid, exceptional, edge_margin=edge_margin)
    totals: dict[int, float] = {}
    for s_idx, p, q in pieces:
        totals[s_idx] = totals.get(s_idx, 0.0) + (q - p)
    nodes: list[FloatArray] = []
    weights: list[FloatArray] = []
    owner: list[NDArray[np.intp]] = []
    for s_idx, p, q in pieces:
        count = max(2, int(round(n_beta * (q - p) / totals[s_idx])))
        t, w = gauss_legendre(count, p, q)
        nodes.append(t)
        weights.append(w)
        owner.append(np.full(count, s_idx, dtype=np.intp))
    return BetaRule(
        nodes=np.concatenate(nodes),
        weights=np.concatenate(weights),
        segment=np.concatenate(owner),
        intervals=tuple((p, q) for _, p, q in pieces),
        per_segment=int(n_beta),
    )


def free_row(grid: ModeGrid, l: int, beta: float, weight: float) -> FloatArray | None:
    """sqrt(omega) sqrt(T |p_l| / |phi'|) C(E_l(beta)) / sqrt(w) in block l; None off the grid."""
    E = grid.bands.energy(l, beta)
    e_lo, e_hi = grid.energy_range
    if not e_lo <= E <= e_hi:
        return None
    T = float(grid.chart.period(E))
    p = grid.bands.density(l, beta)
    dphi = float(grid.chart.state.phi_prime_abs(E))
    scale = math.sqrt(weight * T * p / dphi)
    row = np.zeros(grid.size)
    block = np.asarray(grid.cardinal(E)).reshape(-1) / grid.sqrt_weights
    start = (l - 1) * grid.n_energy
    row[start : start + grid.n_energy] = scale * block
    return row


@timed("build_free_map")
def build_free_map(grid: ModeGrid, rule: BetaRule) -> SpectralMap:
    """Rows of the free map, ordered by beta node then by covering mode."""
    rows: list[FloatArray] = []
    beta: list[float] = []
    mode: list[int] = []
    node: list[int] = []
    ok: list[bool] = []
    for b, (value, weight, s_idx) in enumerate(zip(rule.nodes, rule.weights, rule.segment, strict=True)):
        for l in grid.bands.segments[int(s_idx)].modes:
            if l > grid.lmax:
                continue
            row = free_row(grid, l, float(value), float(weight))
            rows.append(np.zeros(grid.size) if row is None else row)
            beta.append(float(value))
            mode.append(l)
            node.append(b)
            ok.append(row is not None)
    accepted = np.array(ok, dtype=bool)
    if not accepted.all():
        logger.info(
            "free map: %d rows off the energy grid", int(np.count_nonzero(~accepted)),
            extra={"event": "beta_row_rejected"},
        )
    return SpectralMap(
        kind="free",
        rows=np.array(rows).reshape(-1, grid.size),
        beta=np.array(beta),
        mode=np.array(mode, dtype=np.intp),
        node=np.array(node, dtype=np.intp),
        accepted=accepted,
        condition=np.ones(len(rows)),
    )


@timed("build_perturbed_maps")
def build_perturbed_maps(
    grid: ModeGrid,
    free: SpectralMap,
    *,
    coupling: float = 1.0,
    cond_max: float = DEFAULT_COND_MAX,
    max_workers: int = DEFAULT_MAX_WORKERS,
    token: CancelToken | None = None,
) -> tuple[SpectralMap, SpectralMap]:
    """Rows r (I - (B R0)+-(beta))^-1 with r the free rows at beta.

    The inverse is applied through the n_x by n_x system I - K M^T D. Nodes whose
    system has condition number above ``cond_max`` lose all their rows.
    """
    MtD = moment_adjoint(grid)
    node_ids = np.unique(free.node)

    def solve(b: int) -> tuple[dict[int, tuple[ComplexArray, float]], NDArray[np.intp]]:
        idx = np.flatnonzero(free.node == b)
        r = free.rows[idx]
        out: dict[int, tuple[ComplexArray, float]] = {}
        for sign in (1, -1):
            if coupling == 0.0:
                out[sign] = (r.astype(complex), 1.0)
                continue
            K = coupling * boundary_kernel(grid, complex(free.beta[idx[0]]), sign)
            system = np.eye(K.shape[0]) - K @ MtD
            cond = float(np.linalg.cond(system))
            if not math.isfinite(cond) or cond > cond_max:
                out[sign] = (np.zeros(r.shape, dtype=complex), cond)
                continue
            X = np.linalg.solve(system, K)
            out[sign] = (r + (r @ MtD) @ X, cond)
        return out, idx

    results = parallel_map(solve, list(node_ids), max_workers=max_workers, token=token, name="beta-rows")

    maps = []
    for sign, kind in ((1, "plus"), (-1, "minus")):
        rows = np.zeros(free.rows.shape, dtype=complex)
        cond = np.ones(free.rows.shape[0])
        for out, idx in results:
            rows[idx], cond[idx] = out[sign][0], out[sign][1]
        accepted = free.accepted & (cond <= cond_max)
        dropped = np.unique(free.beta[free.accepted & ~accepted])
        for beta in dropped:
            logger.warning(
                "beta=%.10g excluded from the %s map: I - (B R0) is ill-conditioned",
                beta, kind,
                extra={"event": "beta_excluded", "gamma": float(beta)},
            )
        maps.append(
            SpectralMap(
                kind=kind,
                rows=rows * accepted[:, None],
                beta=free.beta,
                mode=free.mode,
                node=free.node,
                accepted=accepted,
                condition=cond,
            )
        )
    return maps[0], maps[1]


def stationary_wave_operators(
    free: SpectralMap, plus: SpectralMap, minus: SpectralMap
) -> WaveOperators:
    """W+- = F+-^H F and S = W+^H W-."""
    w_plus = plus.rows.conj().T @ free.rows
    w_minus = minus.rows.conj().T @ free.rows
    return WaveOperators(plus=w_plus, minus=w_minus, scattering=w_plus.conj().T @ w_minus)


def smooth_subspace(grid: ModeGrid, degree: int = SMOOTH_DEGREE) -> FloatArray:
    """Orthonormal basis of Legendre profiles (1 - s^2)^2 P_k(s) in every mode, c-coordinates.

    The taper makes every profile vanish at both energy margins, where the
    free rows are cut.
    """
    e_lo, e_hi = grid.energy_range
    s = 2.0 * (grid.energies - e_lo) / (e_hi - e_lo) - 1.0
    taper = (1.0 - s**2) ** 2
    cols = []
    for l in range(1, grid.lmax + 1):
        for k in range(degree):
            g = np.zeros((grid.lmax, grid.n_energy))
            g[l - 1] = Legendre.basis(k)(s) * taper
            cols.append(grid.orthonormalize(g))
    Q, _ = np.linalg.qr(np.array(cols).T)
    return np.asarray(Q)


def inside_intervals(values: FloatArray, intervals: Sequence[tuple[float, float]]) -> NDArray[np.bool_]:
    mask = np.zeros(values.shape, dtype=bool)
    for lo, hi in intervals:
        mask |= (values > lo) & (values < hi)
    return mask


def ac_projector(system: EigenSystem, rule: BetaRule) -> FloatArray:
    """Spectral projector of A onto eigenvalues inside the cut band segments."""
    return system.projector(inside_intervals(system.values, rule.intervals))


def free_projector(grid: ModeGrid, rule: BetaRule) -> FloatArray:
    return np.diag(inside_intervals(grid.beta_flat, rule.intervals).astype(float))


def _on(Q: FloatArray, M: NDArray[Any]) -> float:
    return float(np.linalg.norm(Q.T @ M @ Q, 2))


def scattering_residuals(
    grid: ModeGrid,
    A: OperatorMatrix,
    system: EigenSystem,
    free: SpectralMap,
    plus: SpectralMap,
    minus: SpectralMap,
    waves: WaveOperators,
    rule: BetaRule,
    *,
    Q: FloatArray | None = None,
    seed: int = 0,
) -> ResidualTable:
    """Partial isometry, Parseval, diagonalization, intertwining, sqrt-invariance,
    S unitarity, adjoint consistency and free-case collapse, all on the smooth subspace."""
    Qs = smooth_subspace(grid) if Q is None else Q
    p_ac = ac_projector(system, rule)
    p_0 = free_projector(grid, rule)
    beta0 = grid.beta_flat
    a_norm = A.norm()
    sqrt_a = system.function(np.sqrt)
    sqrt_a_norm = float(np.sqrt(system.values[-1]))
    sqrt_a0 = np.sqrt(beta0)

    values: dict[str, float] = {
        "parseval": _on(Qs, free.gram() - p_0),
        "s_unitarity": _on(Qs, waves.scattering.conj().T @ waves.scattering - p_0),
    }
    for sign, name in ((1, "plus"), (-1, "minus")):
        F = plus if sign > 0 else minus
        W = waves.wave(sign)
        values[f"partial_isometry_{name}"] = _on(Qs, F.gram() - p_ac)
        diag = F.rows @ A.matrix - F.beta[:, None] * F.rows
        values[f"diagonalization_{name}"] = float(np.linalg.norm(diag @ Qs, 2)) / a_norm
        inter = A.matrix @ W - W * beta0[None, :]
        values[f"intertwining_{name}"] = float(np.linalg.norm(inter @ Qs, 2)) / a_norm
        inv = sqrt_a @ W - W * sqrt_a0[None, :]
        values[f"invariance_{name}"] = float(np.linalg.norm(inv @ Qs, 2)) / sqrt_a_norm
        values[f"free_collapse_{name}"] = float(np.max(np.abs(F.rows - free.rows), initial=0.0))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(4):
        f = rng.standard_normal(grid.size)
        g = rng.standard_normal(grid.size)
        for sign in (1, -1):
            F = plus if sign > 0 else minus
            lhs = np.vdot(g, waves.wave(sign) @ f)
            rhs = np.vdot(F.apply(g), free.apply(f))
            worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(f) * np.linalg.norm(g)))
    values["adjoint"] = float(worst)

    isometry = max(values["partial_isometry_plus"], values["partial_isometry_minus"])
    checks = {"s_unitarity_bound": values["s_unitarity"] <= 2.0 * isometry + 1e-12}
    table = ResidualTable(
        values=values,
        grid={**grid.describe(), **rule.to_dict(), "test_dimension": int(Qs.shape[1])},
        checks=checks,
    )
    logger.info(
        "scattering residuals: %s",
        ", ".join(f"{k}={v:.3e}" for k, v in values.items()),
        extra={"event": "scattering_residuals"},
    )
    return table


@timed("run_scattering")
def run_scattering(
    grid: ModeGrid,
    A: OperatorMatrix,
    system: EigenSystem,
    exceptional: Sequence[ExceptionalPoint],
    *,
    coupling: float = 1.0,
    n_beta: int = DEFAULT_N_BETA,
    cond_max: float = DEFAULT_COND_MAX,
    edge_margin: float = DEFAULT_EDGE_MARGIN,
    max_workers: int = DEFAULT_MAX_WORKERS,
    token: CancelToken | None = None,
) -> ScatteringResult:
    rule = beta_rule(grid, exceptional, n_beta=n_beta, edge_margin=edge_margin)
    free = build_free_map(grid, rule)
    plus, minus = build_perturbed_maps(
        grid, free, coupling=coupling, cond_max=cond_max, max_workers=max_workers, token=token
    )
    waves = stationary_wave_operators(free, plus, minus)
    residuals = scattering_residuals(grid, A, system, free, plus, minus, waves, rule)
    return ScatteringResult(free=free, plus=plus, minus=minus, waves=waves, rule=rule, residuals=residuals)


def change_of_variables_check(
    grid: ModeGrid,
    l: int,
    profile: Callable[[FloatArray], FloatArray],
    *,
    nodes: int = 64,
) -> float:
    """Relative gap between the energy and the beta forms of the weighted L2 norm of one mode."""
    bands = grid.bands
    e_lo, e_hi = grid.energy_range
    state = grid.chart.state
    E, wE = gauss_legendre(nodes, e_lo, e_hi)
    lhs = float(np.sum(wE * profile(E) ** 2 * grid.chart.period(E) / state.phi_prime_abs(E)))
    b_lo, b_hi = float(bands.beta(l, e_hi)), float(bands.beta(l, e_lo))
    beta, wb = gauss_legendre(nodes, b_lo, b_hi)
    Es = np.array([bands.energy(l, float(b)) for b in beta])
    dens = np.array([bands.density(l, float(b)) for b in beta])
    rhs = float(np.sum(wb * profile(Es) ** 2 * grid.chart.period(Es) * dens / state.phi_prime_abs(Es)))
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


def time_dependent_check(
    system: EigenSystem,
    beta0: FloatArray,
    W: ArrayLike,
    vectors: ArrayLike,
    times: ArrayLike,
    *,
    sign: int = 1,
) -> dict[str, Any]:
    """||e^{itA} e^{-itA0} f - W f|| / ||f|| along t -> sign * infinity, with Cesaro means.

    ``times`` must be a uniform grid starting at 0 for the Cesaro means to be
    time averages.
    """
    ts = np.asarray(times, dtype=float)
    F = np.asarray(vectors).reshape(beta0.size, -1).astype(complex)
    target = np.asarray(W) @ F
    norms = np.linalg.norm(F, axis=0)
    V = system.vectors
    deviation = np.empty(ts.size)
    for i, t in enumerate(sign * ts):
        free = np.exp(-1j * t * beta0)[:, None] * F
        coupled = V @ (np.exp(1j * t * system.values)[:, None] * (V.T @ free))
        deviation[i] = float(np.max(np.linalg.norm(coupled - target, axis=0) / norms))
    cesaro = np.cumsum(deviation) / np.arange(1, ts.size + 1)
    return {
        "times": ts.tolist(),
        "deviation": deviation.tolist(),
        "cesaro": cesaro.tolist(),
        "late_cesaro": float(cesaro[-1]) if ts.size else 0.0,
        "sign": sign,
    }


def refinement_table(
    coarse: ResidualTable, fine: ResidualTable, *, noise: float = REFINEMENT_NOISE
) -> dict[str, dict[str, Any]]:
    """Per residual: both values and whether the refined one is no larger (within ``noise``)."""
    table: dict[str, dict[str, Any]] = {}
    for name, before in coarse.values.items():
        after = fine.values.get(name)
        if after is None:
            continue
        table[name] = {
            "coarse": before,
            "fine": after,
            "decreased": bool(after <= before * (1.0 + noise) + 1e-14),
        }
    return table
