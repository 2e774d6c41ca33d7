"""
Boundary values (B R0)(gamma +- i0), the Birman-Schwinger scan and the exceptional set.

B R0(z) = M^T D K(z) where K(z) (n_x by n) is the velocity moment of R0(z) applied
to each coefficient basis vector. The energy integral in K is taken on the fine
rule after subtracting the pole at lambda* = E_l(Re z):

    sum_k w_k phi_k / (beta_k - z)
      + phi(lambda*) * (L / s* - sum_k w_k s_k / (s* (beta_k - z)))

with s = d beta_l / dE and L = log(beta(E_hi) - z) - log(beta(E_lo) - z). On the real
axis the branch of L carries the -+ i pi residue.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray

from antonov.config import (
    DEFAULT_CANDIDATE_THRESHOLD,
    DEFAULT_EDGE_MARGIN,
    DEFAULT_MAX_WORKERS,
    DEFAULT_R_EXCL,
    DEFAULT_REFINE_FACTOR,
)
from antonov.core.errors import DomainError
from antonov.core.observability.timing import timed
from antonov.core.parallel import CancelToken, parallel_map
from antonov.features.band_structure.service import exceptional_edges
from antonov.features.operators.domain import (
    EIGHT_PI,
    Candidate,
    ComplexArray,
    ExceptionalPoint,
    FloatArray,
    ModeGrid,
    OperatorMatrix,
    ScanPoint,
    ScanResult,
    mode_functions,
)

logger = logging.getLogger(__name__)


def check_edge_margin(grid: ModeGrid, gamma: float, edge_margin: float = DEFAULT_EDGE_MARGIN) -> None:
    """Reject gamma within ``edge_margin * beta_1,min`` of an exceptional edge."""
    width = edge_margin * grid.bands.bands[0].beta_min
    edges = np.asarray(exceptional_edges(grid.bands))
    nearest = float(np.min(np.abs(edges - gamma)))
    if nearest < width:
        raise DomainError(
            f"gamma={gamma:.10g} is within {nearest:.3g} of a band edge (margin {width:.3g})"
        )


def _log_term(b_hi: float, b_lo: float, z: complex, sign: int) -> complex:
    if z.imag != 0.0:
        return complex(np.log(b_hi - z) - np.log(b_lo - z))
    g = z.real
    value = math.log(abs(b_hi - g)) - math.log(abs(b_lo - g))
    return complex(value, -sign * math.pi) if b_hi < g < b_lo else complex(value, 0.0)


def boundary_kernel(grid: ModeGrid, z: complex, sign: int = 1) -> ComplexArray:
    """K(z) of shape (n_x, n); for real z the side is chosen by ``sign``."""
    zc = complex(z)
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    bands = grid.bands
    e_lo, e_hi = grid.energy_range
    C = grid.cardinal_fine
    blocks: list[ComplexArray] = []
    for li in range(grid.lmax):
        l = li + 1
        denom = grid.beta_fine[li] - zc
        if zc.imag == 0.0 and np.any(denom == 0.0):
            denom = np.where(denom == 0.0, 1e-300, denom)
        inv = 1.0 / denom
        weighted = grid.kernel[li]
        block = (weighted * inv.real[None, :]) @ C + 1j * ((weighted * inv.imag[None, :]) @ C)
        b_lo = float(bands.beta(l, e_lo))
        b_hi = float(bands.beta(l, e_hi))
        if not bands.degenerate and b_hi < zc.real < b_lo:
            lam = min(max(bands.energy(l, zc.real), e_lo), e_hi)
            s_star = float(bands.beta_slope(l, lam))
            S = complex(np.sum(grid.fine_weights * grid.beta_slope_fine[li] * inv) / s_star)
            L = _log_term(b_hi, b_lo, zc, sign)
            orb = grid.chart.orbit(lam)
            theta_star = orb.theta(grid.x_nodes)
            reach_star = grid.x_nodes < orb.x_plus
            phi_star = EIGHT_PI * reach_star * mode_functions(l, theta_star)[li]
            c_star = np.asarray(grid.cardinal(lam)).reshape(-1)
            block = block + np.outer(phi_star, c_star) * (L / s_star - S)
        blocks.append(block / grid.sqrt_weights[None, :])
    return np.concatenate(blocks, axis=1)


def moment_adjoint(grid: ModeGrid) -> FloatArray:
    """M^T D with D = diag(x_weights / 4 pi), shape (n, n_x)."""
    return np.asarray(grid.moment.T * (grid.x_weights / (4.0 * math.pi))[None, :])


def boundary_BR0(
    grid: ModeGrid,
    gamma: complex,
    sign: int = 1,
    *,
    edge_margin: float = DEFAULT_EDGE_MARGIN,
    coupling: float = 1.0,
) -> OperatorMatrix:
    """(B R0)(gamma + sign * i0) for real gamma, (B R0)(z) for complex z."""
    z = complex(gamma)
    if z.imag == 0.0:
        check_edge_margin(grid, z.real, edge_margin)
    K = boundary_kernel(grid, z, sign)
    matrix = coupling * (moment_adjoint(grid) @ K)
    return OperatorMatrix(
        "BR0", matrix, {**grid.describe(), "gamma": [z.real, z.imag], "sign": sign}
    )


def birman_schwinger_eigenvalues(
    grid: ModeGrid, gamma: float, sign: int = 1, *, adjoint: FloatArray | None = None
) -> ComplexArray:
    """Nonzero spectrum of (B R0)(gamma + sign i0) through the n_x by n_x product K M^T D."""
    MtD = moment_adjoint(grid) if adjoint is None else adjoint
    K = boundary_kernel(grid, complex(gamma), sign)
    return np.asarray(np.linalg.eigvals(K @ MtD))


def _distance(eigs: ComplexArray, coupling: float) -> tuple[float, complex]:
    if eigs.size == 0:
        return 1.0, 0j
    d = np.abs(coupling * eigs - 1.0)
    i = int(np.argmin(d))
    return float(d[i]), complex(eigs[i])


def default_gamma_range(grid: ModeGrid) -> tuple[float, float]:
    bands = grid.bands.bands
    return bands[0].beta_min, bands[-1].beta_max


def _local_minima(dist: FloatArray, threshold: float) -> list[int]:
    out = []
    n = dist.size
    for i in range(n):
        left = dist[i - 1] if i > 0 else math.inf
        right = dist[i + 1] if i < n - 1 else math.inf
        if dist[i] < threshold and dist[i] <= left and dist[i] <= right:
            out.append(i)
    return out


def _admissible(grid: ModeGrid, gammas: FloatArray, edge_margin: float) -> NDArray[np.bool_]:
    width = edge_margin * grid.bands.bands[0].beta_min
    edges = np.asarray(exceptional_edges(grid.bands))
    return np.asarray(np.min(np.abs(gammas[:, None] - edges[None, :]), axis=1) >= width)


@timed("scan_embedded")
def scan_embedded(
    grid: ModeGrid,
    gammas: Sequence[float] | FloatArray,
    *,
    coupling: float = 1.0,
    threshold: float = DEFAULT_CANDIDATE_THRESHOLD,
    refine_factor: int = DEFAULT_REFINE_FACTOR,
    edge_margin: float = DEFAULT_EDGE_MARGIN,
    max_workers: int = DEFAULT_MAX_WORKERS,
    token: CancelToken | None = None,
) -> ScanResult:
    """Distance of the spectrum of (B R0)+-(gamma) to 1 over a gamma grid, with flagged minima.

    Points within the edge margin are skipped. Each flagged minimum is refined on
    a local grid ``refine_factor`` times finer.
    """
    raw = np.sort(np.asarray(gammas, dtype=float))
    keep = _admissible(grid, raw, edge_margin)
    grid_gammas = raw[keep]
    skipped = tuple(float(g) for g in raw[~keep])
    if skipped:
        logger.info(
            "skipping %d gamma points inside the edge margin", len(skipped),
            extra={"event": "gamma_skipped"},
        )
    MtD = moment_adjoint(grid)

    def evaluate(g: float) -> tuple[ComplexArray, ComplexArray]:
        return (
            birman_schwinger_eigenvalues(grid, g, 1, adjoint=MtD),
            birman_schwinger_eigenvalues(grid, g, -1, adjoint=MtD),
        )

    pairs = parallel_map(
        evaluate, list(grid_gammas), max_workers=max_workers, token=token, name="gamma-scan"
    )
    points = []
    for g, (ep, em) in zip(grid_gammas, pairs, strict=True):
        dp, cp = _distance(ep, coupling)
        dm, cm = _distance(em, coupling)
        points.append(ScanPoint(float(g), dp, dm, cp, cm))
    spacing = float(np.median(np.diff(grid_gammas))) if grid_gammas.size > 1 else 0.0

    def candidates(sign: int) -> tuple[Candidate, ...]:
        dist = np.array([p.distance_plus if sign > 0 else p.distance_minus for p in points])
        found = []
        for i in _local_minima(dist, threshold):
            lo = grid_gammas[max(i - 1, 0)]
            hi = grid_gammas[min(i + 1, grid_gammas.size - 1)]
            best_g, best_d, refined = float(grid_gammas[i]), float(dist[i]), False
            if refine_factor > 1 and hi > lo:
                local = np.linspace(lo, hi, 2 * refine_factor + 1)
                local = local[_admissible(grid, local, edge_margin)]
                for g in local:
                    d, _ = _distance(birman_schwinger_eigenvalues(grid, float(g), sign, adjoint=MtD), coupling)
                    if d < best_d:
                        best_g, best_d, refined = float(g), d, True
            found.append(Candidate(best_g, best_d, sign, refined))
        return tuple(found)

    result = ScanResult(
        points=tuple(points),
        eigenvalues_plus=tuple(p[0] for p in pairs),
        eigenvalues_minus=tuple(p[1] for p in pairs),
        candidates_plus=candidates(1),
        candidates_minus=candidates(-1),
        coupling=float(coupling),
        threshold=float(threshold),
        spacing=spacing,
        skipped=skipped,
    )
    logger.info(
        "gamma scan over %d points: %d/%d candidates (+/-), signs agree: %s",
        len(points), len(result.candidates_plus), len(result.candidates_minus), result.signs_agree(),
        extra={"event": "scan_embedded"},
    )
    return result


def coupling_sweep(
    scan: ScanResult,
    couplings: Sequence[float],
    *,
    threshold: float | None = None,
) -> dict[str, Any]:
    """Candidates of A0 - c B for each c, from the stored unscaled spectra.

    Reports the first coupling at which each candidate appears and whether the
    number of candidates is non-decreasing in c.
    """
    thr = scan.threshold if threshold is None else threshold
    base = scan.coupling or 1.0
    gammas = scan.gammas
    by_coupling: dict[float, list[float]] = {}
    for c in sorted(float(v) for v in couplings):
        dist = np.array([_distance(e, c * base)[0] for e in scan.eigenvalues_plus])
        by_coupling[c] = [float(gammas[i]) for i in _local_minima(dist, thr)]
    first: list[dict[str, float]] = []
    for c, found in by_coupling.items():
        for g in found:
            if not any(abs(g - f["gamma"]) <= scan.spacing * 1.5 for f in first):
                first.append({"gamma": g, "first_coupling": c})
    counts = [len(v) for v in by_coupling.values()]
    return {
        "couplings": list(by_coupling),
        "candidates": {repr(c): v for c, v in by_coupling.items()},
        "first_appearance": sorted(first, key=lambda f: f["gamma"]),
        "monotone": all(a <= b for a, b in zip(counts, counts[1:], strict=False)),
    }


def exceptional_set(
    grid: ModeGrid,
    scan: ScanResult | None = None,
    *,
    r_excl: float = DEFAULT_R_EXCL,
) -> list[ExceptionalPoint]:
    """Band edges plus embedded candidates, each with its exclusion radius."""
    radius = r_excl * grid.beta_spacing
    points = [ExceptionalPoint(g, radius, "edge") for g in exceptional_edges(grid.bands)]
    if scan is not None:
        for c in scan.candidates_plus:
            points.append(ExceptionalPoint(c.gamma, max(radius, scan.spacing), "embedded"))
    return sorted(points, key=lambda p: p.gamma)


def epsilon_sweep(
    grid: ModeGrid,
    gamma: float,
    epsilons: Sequence[float] = (1e-2, 1e-3, 1e-4),
    *,
    sign: int = 1,
    edge_margin: float = DEFAULT_EDGE_MARGIN,
) -> list[float]:
    """||(B R0)(gamma + sign i eps) - (B R0)(gamma + sign i0)|| for each eps."""
    check_edge_margin(grid, gamma, edge_margin)
    MtD = moment_adjoint(grid)
    limit = MtD @ boundary_kernel(grid, complex(gamma), sign)
    out = []
    for eps in epsilons:
        K = boundary_kernel(grid, complex(gamma, sign * eps), sign)
        out.append(float(np.linalg.norm(MtD @ K - limit, 2)))
    return out


def boundary_holder_report(
    grid: ModeGrid,
    interval: tuple[float, float],
    *,
    samples: int = 9,
    sign: int = 1,
) -> dict[str, float]:
    """Fit ||(B R0)(g1) - (B R0)(g2)|| ~ C |g1 - g2|^alpha on a compact sub-band."""
    MtD = moment_adjoint(grid)
    gs = np.linspace(interval[0], interval[1], samples)
    mats = [MtD @ boundary_kernel(grid, complex(g), sign) for g in gs]
    dg, dn = [], []
    for a in range(samples):
        for b in range(a + 1, samples):
            dg.append(abs(gs[b] - gs[a]))
            dn.append(float(np.linalg.norm(mats[b] - mats[a], 2)))
    x, y = np.log(np.asarray(dg)), np.log(np.maximum(np.asarray(dn), 1e-300))
    alpha, logc = np.polyfit(x, y, 1)
    return {"alpha": float(alpha), "constant": float(np.exp(logc)), "samples": float(samples)}


def singular_value_report(grid: ModeGrid, z: complex, *, tail_index: int = 50) -> dict[str, Any]:
    """Singular values of (B R0)(z); rank is at most n_x since B factors through the moment."""
    MtD = moment_adjoint(grid)
    K = boundary_kernel(grid, complex(z), 1)
    # MtD = Q R with orthonormal Q, so MtD K and R K share singular values
    _, R = np.linalg.qr(MtD)
    sv = np.linalg.svd(R @ K, compute_uv=False)
    top = float(sv[0]) if sv.size else 0.0
    tail = float(sv[tail_index]) / top if sv.size > tail_index and top > 0 else 0.0
    return {
        "z": [complex(z).real, complex(z).imag],
        "singular_values": sv.tolist(),
        "tail_ratio": tail,
        "monotone": bool(np.all(np.diff(sv) <= 1e-12 * max(top, 1.0))),
    }
