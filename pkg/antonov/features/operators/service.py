"""Mode grid construction, the velocity moment, and the operators A0, B, A = A0 - B."""

from __future__ import annotations

import logging
import math
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline

from antonov.config import (
    DEFAULT_DELTA_HI,
    DEFAULT_DELTA_LO,
    DEFAULT_FINE_FACTOR,
    DEFAULT_LMAX,
    DEFAULT_MAX_WORKERS,
    DEFAULT_N_ENERGY,
    DEFAULT_N_THETA,
    DEFAULT_N_X,
    DEFAULT_UNRESOLVED_SPACINGS,
)
from antonov.core.errors import DomainError, SolverError, ValidationError
from antonov.core.observability.timing import time_block, timed
from antonov.core.parallel import parallel_map
from antonov.core.quadrature import gauss_legendre
from antonov.features.action_angle.domain import ActionAngleChart, OrbitTable
from antonov.features.band_structure.domain import BandStructure
from antonov.features.operators.domain import (
    EIGHT_PI,
    EigenSystem,
    FloatArray,
    ModeGrid,
    OperatorMatrix,
    mode_functions,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-8


def _orbits(chart: ActionAngleChart, energies: FloatArray, max_workers: int) -> list[OrbitTable]:
    return parallel_map(chart.orbit, [float(E) for E in energies], max_workers=max_workers, name="orbits")


def _angle_kernel(
    orbits: list[OrbitTable], x: FloatArray
) -> tuple[FloatArray, NDArray[np.bool_]]:
    """theta(|x_i|, lambda_k) and the indicator x_i inside the orbit at lambda_k."""
    ax = np.abs(np.asarray(x, dtype=float))
    theta = np.empty((ax.size, len(orbits)))
    reach = np.empty((ax.size, len(orbits)), dtype=bool)
    for k, orb in enumerate(orbits):
        theta[:, k] = orb.theta(ax)
        reach[:, k] = ax < orb.x_plus
    return theta, reach


@timed("build_mode_grid")
def build_mode_grid(
    chart: ActionAngleChart,
    bands: BandStructure,
    *,
    lmax: int = DEFAULT_LMAX,
    n_energy: int = DEFAULT_N_ENERGY,
    fine_factor: int = DEFAULT_FINE_FACTOR,
    n_x: int = DEFAULT_N_X,
    n_theta: int = DEFAULT_N_THETA,
    delta_lo: float = DEFAULT_DELTA_LO,
    delta_hi: float = DEFAULT_DELTA_HI,
    max_workers: int = DEFAULT_MAX_WORKERS,
) -> ModeGrid:
    """Gauss-Legendre energies on (Emin + delta_lo, E0 - delta_hi) with margins relative to the depth."""
    if lmax < 1 or lmax > bands.lmax:
        raise ValidationError(f"lmax must lie in 1..{bands.lmax}")
    if n_theta % 2 or n_theta <= 4 * lmax:
        raise ValidationError("n_theta must be even and larger than 4*lmax")
    state = chart.state
    depth = state.depth
    e_lo = state.Emin + delta_lo * depth
    e_hi = state.E0 - delta_hi * depth
    if not e_lo < e_hi:
        raise ValidationError("energy margins leave an empty range")

    energies, q = gauss_legendre(n_energy, e_lo, e_hi)
    fine, omega = gauss_legendre(fine_factor * n_energy, e_lo, e_hi)
    coarse_orbits = _orbits(chart, energies, max_workers)
    fine_orbits = _orbits(chart, fine, max_workers)

    periods = np.array([o.period for o in coarse_orbits])
    derivs = np.array([o.period_derivative for o in coarse_orbits])
    phi_prime = np.asarray(state.phi_prime_abs(energies), dtype=float)
    if np.any(phi_prime <= 0.0):
        raise DomainError("|phi'| vanishes on the energy grid; increase delta_hi")
    mass_weights = q * periods / phi_prime

    cardinal = CubicSpline(energies, np.eye(n_energy), axis=0)
    cardinal_fine = np.asarray(cardinal(fine))

    x_gl, wx = gauss_legendre(n_x, 0.0, state.R0)
    theta_fine, reach = _angle_kernel(fine_orbits, x_gl)
    modes = mode_functions(lmax, theta_fine)  # (lmax, n_x, n_fine)
    kernel = EIGHT_PI * omega[None, None, :] * reach[None, :, :] * modes

    inv_sqrt_w = 1.0 / np.sqrt(mass_weights)
    moment = np.concatenate(
        [(kernel[l] @ cardinal_fine) * inv_sqrt_w[None, :] for l in range(lmax)], axis=1
    )
    theta_nodes = (np.arange(n_theta) + 0.5) / n_theta

    grid = ModeGrid(
        chart=chart,
        bands=bands,
        lmax=int(lmax),
        energy_range=(float(e_lo), float(e_hi)),
        energies=energies,
        energy_weights=q,
        periods=periods,
        period_derivatives=derivs,
        phi_prime=phi_prime,
        mass_weights=mass_weights,
        fine_energies=fine,
        fine_weights=omega,
        fine_periods=np.array([o.period for o in fine_orbits]),
        fine_derivatives=np.array([o.period_derivative for o in fine_orbits]),
        cardinal=cardinal,
        cardinal_fine=cardinal_fine,
        x_nodes=x_gl,
        x_weights=2.0 * wx,
        theta_nodes=theta_nodes,
        fine_theta=theta_fine,
        reach=reach,
        kernel=kernel,
        moment=moment,
    )
    logger.info(
        "mode grid lmax=%d N_E=%d fine=%d N_x=%d on [%.8g, %.8g]",
        lmax, n_energy, fine.size, n_x, e_lo, e_hi,
        extra={"event": "mode_grid", "grid": grid.describe()},
    )
    return grid


def _check_odd(grid: ModeGrid, samples: FloatArray) -> None:
    n = grid.n_theta
    scale = float(np.max(np.abs(samples))) if samples.size else 0.0
    if scale == 0.0:
        return
    # theta -> 1 - theta and theta -> 1/2 - theta on the midpoint nodes
    reflect = samples[::-1]
    shift = samples[(n // 2 - 1 - np.arange(n)) % n]
    defect = max(
        float(np.max(np.abs(samples + reflect))), float(np.max(np.abs(samples + shift)))
    )
    if defect > SYMMETRY_TOL * scale:
        raise ValidationError(
            f"samples are not odd under theta -> 1 - theta, 1/2 - theta (defect {defect / scale:.2e})"
        )


def project_modes(grid: ModeGrid, samples: ArrayLike, *, check: bool = True) -> FloatArray:
    """Raw coefficients g[l-1, j] = integral of e_l(theta) g(theta, E_j) over [0, 1]."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] != grid.n_theta:
        raise ValidationError(f"expected {grid.n_theta} theta samples, got {arr.shape[0]}")
    if check:
        _check_odd(grid, arr)
    return np.asarray(grid.modes(grid.theta_nodes) @ arr) / grid.n_theta


def synthesize(grid: ModeGrid, g: ArrayLike, theta: ArrayLike | None = None) -> FloatArray:
    """g(theta, E_j) from raw coefficients, on the theta rule unless ``theta`` is given."""
    coeffs = np.asarray(g, dtype=float).reshape(grid.lmax, -1)
    th = grid.theta_nodes if theta is None else np.asarray(theta, dtype=float)
    return np.asarray(grid.modes(th).T @ coeffs)


def moment_matrix(grid: ModeGrid, x: ArrayLike) -> FloatArray:
    """Rows m(x_i) as a linear map of orthonormalized coefficients.

    m is odd in x (theta(-x) = 1/2 - theta(x) flips every mode) and vanishes for
    |x| >= R0.
    """
    xs = np.asarray(x, dtype=float).reshape(-1)
    orbits = [grid.chart.orbit(float(E)) for E in grid.fine_energies]
    theta, reach = _angle_kernel(orbits, xs)
    modes = mode_functions(grid.lmax, theta)
    kernel = EIGHT_PI * grid.fine_weights[None, None, :] * reach[None, :, :] * modes
    inv_sqrt_w = 1.0 / grid.sqrt_weights
    rows = np.concatenate(
        [(kernel[l] @ grid.cardinal_fine) * inv_sqrt_w[None, :] for l in range(grid.lmax)], axis=1
    )
    return np.sign(xs)[:, None] * rows


def velocity_moment(grid: ModeGrid, g: ArrayLike, x: ArrayLike | None = None) -> FloatArray:
    """m(x) = 8 pi * integral over lambda in [U0(x), E0] of g(theta(x, lambda), lambda).

    ``g`` holds raw coefficients; without ``x`` the grid's x-nodes on [0, R0] are used.
    """
    c = grid.orthonormalize(g)
    if x is None:
        return np.asarray(grid.moment @ c)
    xs = np.asarray(x, dtype=float)
    out = moment_matrix(grid, xs) @ c
    return np.where(np.abs(xs.reshape(-1)) < grid.R0, out, 0.0).reshape(xs.shape)


def fine_profile_moment(grid: ModeGrid, profile: ArrayLike, x: ArrayLike) -> FloatArray:
    """Moment of a profile given directly on the fine energy rule, shape (lmax, n_fine)."""
    xs = np.asarray(x, dtype=float).reshape(-1)
    prof = np.asarray(profile, dtype=float).reshape(grid.lmax, -1)
    orbits = [grid.chart.orbit(float(E)) for E in grid.fine_energies]
    theta, reach = _angle_kernel(orbits, xs)
    modes = mode_functions(grid.lmax, theta)
    vals = EIGHT_PI * np.einsum("k,ik,lik,lk->i", grid.fine_weights, reach, modes, prof)
    return np.asarray(np.sign(xs) * vals)


def build_A0(grid: ModeGrid) -> OperatorMatrix:
    """Multiplication by beta_l(E_j)."""
    return OperatorMatrix("A0", np.diag(grid.beta_flat), grid.describe())


@timed("build_B")
def build_B(grid: ModeGrid) -> OperatorMatrix:
    """B = M^T diag(x_weights / 4 pi) M with M the moment map; symmetric PSD by construction."""
    weighted = grid.moment * (grid.x_weights / (4.0 * math.pi))[:, None]
    B = grid.moment.T @ weighted
    B = 0.5 * (B + B.T)
    op = OperatorMatrix("B", B, grid.describe())
    logger.info("B: norm %.6g", op.norm(), extra={"event": "build_B"})
    return op


def apply_B_composed(grid: ModeGrid, g: ArrayLike) -> FloatArray:
    """Raw coefficients of B g by synthesize -> moment -> v |phi'| m -> project."""
    orbits = [grid.chart.orbit(float(E)) for E in grid.energies]
    xs = np.stack([o.position(grid.theta_nodes) for o in orbits], axis=1)
    vs = np.stack([o.velocity(grid.theta_nodes) for o in orbits], axis=1)
    m = (moment_matrix(grid, xs.reshape(-1)) @ grid.orthonormalize(g)).reshape(xs.shape)
    return project_modes(grid, vs * grid.phi_prime[None, :] * m, check=False)


def classify_spectrum(
    grid: ModeGrid,
    values: FloatArray,
    *,
    unresolved_spacings: float = DEFAULT_UNRESOLVED_SPACINGS,
) -> tuple[str, ...]:
    """discrete (below every band), gap, unresolved (near an edge) or essential."""
    bands = grid.bands
    edges = np.array(bands.edges())
    bottom = bands.bands[0].beta_min
    near = unresolved_spacings * grid.beta_spacing
    labels: list[str] = []
    for lam in values:
        if np.min(np.abs(edges - lam)) <= near:
            labels.append("unresolved")
        elif lam < bottom:
            labels.append("discrete")
        elif bands.in_union(float(lam)):
            labels.append("essential")
        else:
            labels.append("gap")
    return tuple(labels)


@timed("build_A")
def build_A(
    grid: ModeGrid,
    *,
    B: OperatorMatrix | None = None,
    coupling: float = 1.0,
    unresolved_spacings: float = DEFAULT_UNRESOLVED_SPACINGS,
) -> tuple[OperatorMatrix, EigenSystem]:
    """A = A0 - coupling * B with its full eigendecomposition.

    A non-positive smallest eigenvalue is reported as a solver failure.
    """
    Bm = build_B(grid) if B is None else B
    A = np.diag(grid.beta_flat) - coupling * Bm.matrix
    A = 0.5 * (A + A.T)
    with time_block("eigh_A"):
        values, vectors = np.linalg.eigh(A)
    if not values[0] > 0.0:
        raise SolverError(
            f"operator A is not positive: smallest eigenvalue {values[0]:.6g}"
        )
    labels = classify_spectrum(grid, values, unresolved_spacings=unresolved_spacings)
    system = EigenSystem(values=values, vectors=vectors, labels=labels)
    logger.info(
        "A: min eigenvalue %.8g, classes %s",
        values[0], system.counts(),
        extra={"event": "build_A"},
    )
    return OperatorMatrix("A", A, {**grid.describe(), "coupling": coupling}), system


def positivity_report(grid: ModeGrid, B: OperatorMatrix, system: EigenSystem) -> dict[str, Any]:
    """Antonov bound and the crude sandwich min eig(A) <= beta_1,min + ||B||."""
    bvals = np.linalg.eigvalsh(B.matrix)
    norm_b = float(np.max(np.abs(bvals))) if bvals.size else 0.0
    upper = grid.bands.bands[0].beta_min + norm_b
    return {
        "min_eig_A": system.min_value,
        "positive": system.min_value > 0.0,
        "sandwich_upper": upper,
        "sandwich_holds": system.min_value <= upper,
        "B_norm": norm_b,
        "B_min_eig": float(bvals[0]) if bvals.size else 0.0,
        "B_symmetry_defect": B.symmetry_defect(),
    }


def _check_resolvent_point(grid: ModeGrid, z: complex) -> None:
    if z.imag == 0.0 and grid.bands.in_union(z.real):
        raise DomainError(
            f"z={z.real:.8g} lies in the band union; use the boundary operator instead"
        )


def resolvent_apply(
    grid: ModeGrid,
    z: complex,
    f: ArrayLike,
    *,
    A: OperatorMatrix | None = None,
) -> NDArray[Any]:
    """(A0 - z)^-1 f componentwise, or (A - z)^-1 f by a linear solve when ``A`` is given."""
    zc = complex(z)
    _check_resolvent_point(grid, zc)
    vec = np.asarray(f)
    real = zc.imag == 0.0
    shift: complex | float = zc.real if real else zc
    if A is None:
        out = vec / (grid.beta_flat - shift)
    else:
        out = np.linalg.solve(A.matrix - shift * np.eye(A.shape[0]), vec)
    return np.asarray(out.real if real and not np.iscomplexobj(vec) else out)


def resolvent_kernel_apply(grid: ModeGrid, z: complex, samples: ArrayLike) -> NDArray[Any]:
    """(R0(z) g)(theta, E_j) through the kernel 2 sum_l sin(4 pi l theta) sin(4 pi l theta') / (beta_l - z)."""
    zc = complex(z)
    _check_resolvent_point(grid, zc)
    arr = np.asarray(samples, dtype=float).reshape(grid.n_theta, grid.n_energy)
    ls = np.arange(1, grid.lmax + 1)
    sines = np.sin(4.0 * math.pi * ls[:, None] * grid.theta_nodes[None, :])  # (lmax, n_theta)
    out = np.empty(arr.shape, dtype=complex)
    for j in range(grid.n_energy):
        kernel = 2.0 * (sines.T / (grid.beta[:, j] - zc)) @ sines  # (n_theta, n_theta)
        out[:, j] = kernel @ arr[:, j] / grid.n_theta
    return out.real if zc.imag == 0.0 else out


def second_resolvent_residual(
    grid: ModeGrid,
    A: OperatorMatrix,
    B: OperatorMatrix,
    z: complex,
    *,
    samples: int = 4,
    seed: int = 0,
) -> float:
    """max ||R_A f - R_0 f - R_A B R_0 f|| / ||R_A f|| over random f."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f = rng.standard_normal(grid.size)
        r0 = resolvent_apply(grid, z, f)
        ra = resolvent_apply(grid, z, f, A=A)
        rab = resolvent_apply(grid, z, B.matrix @ r0, A=A)
        worst = max(worst, float(np.linalg.norm(ra - r0 - rab) / np.linalg.norm(ra)))
    return worst


def kernel_form_defect(grid: ModeGrid, z: complex, *, seed: int = 0) -> float:
    """Relative gap between the kernel form of R0(z) and the diagonal resolvent_apply."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((grid.lmax, grid.n_energy))
    via_kernel = project_modes(grid, np.real(resolvent_kernel_apply(grid, z, synthesize(grid, raw))), check=False)
    direct = grid.raw(resolvent_apply(grid, z, grid.orthonormalize(raw)))
    return float(np.linalg.norm(np.real(direct) - via_kernel) / np.linalg.norm(direct))
