"""Mode grid, the operators A0, B and A, resolvents and the limiting-absorption boundary values."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from antonov.core.errors import DomainError, SolverError, ValidationError
from antonov.features.band_structure import exceptional_edges
from antonov.features.operators import (
    EigenSystem,
    ModeGrid,
    OperatorMatrix,
    apply_B_composed,
    birman_schwinger_eigenvalues,
    boundary_BR0,
    build_A,
    build_A0,
    build_B,
    build_mode_grid,
    coupling_sweep,
    epsilon_sweep,
    exceptional_set,
    fine_profile_moment,
    kernel_form_defect,
    mode_functions,
    positivity_report,
    project_modes,
    resolvent_apply,
    scan_embedded,
    second_resolvent_residual,
    synthesize,
    velocity_moment,
)
from antonov.features.operators.repository import dump_matrix, load_matrix

HALF_COUPLING = 0.5


@pytest.fixture(scope="module")
def B(grid: ModeGrid) -> OperatorMatrix:
    return build_B(grid)


@pytest.fixture(scope="module")
def coupled(grid: ModeGrid, B: OperatorMatrix) -> tuple[OperatorMatrix, EigenSystem]:
    return build_A(grid, B=B, coupling=HALF_COUPLING)


def _mid_band(grid: ModeGrid) -> float:
    widest = max((s for s in grid.bands.segments if not s.is_gap), key=lambda s: s.hi - s.lo)
    return 0.5 * (widest.lo + widest.hi)


def _composed_gap(grid: ModeGrid, B: OperatorMatrix) -> float:
    """Relative gap between the Gram-form B and the synthesize -> moment -> project chain."""
    g = np.random.default_rng(11).standard_normal(grid.size)
    gram = B.matrix @ grid.orthonormalize(g)
    composed = grid.orthonormalize(apply_B_composed(grid, g))
    return float(np.linalg.norm(composed - gram) / np.linalg.norm(gram))


class TestModeProjection:
    """Sine modes sqrt(2) sin(4 pi l theta) on the midpoint theta rule."""

    def test_single_mode_indicator(self, grid: ModeGrid) -> None:
        samples = np.repeat(mode_functions(grid.lmax, grid.theta_nodes)[1][:, None], grid.n_energy, axis=1)
        coeffs = project_modes(grid, samples)
        np.testing.assert_allclose(coeffs[0], 0.0, atol=1e-12)
        np.testing.assert_allclose(coeffs[1], 1.0, atol=1e-12)

    def test_mode_combination(self, grid: ModeGrid) -> None:
        modes = mode_functions(grid.lmax, grid.theta_nodes)
        samples = (modes[0] + 0.5 * modes[1])[:, None]
        np.testing.assert_allclose(project_modes(grid, samples)[:, 0], [1.0, 0.5], atol=1e-12)

    def test_synthesize_inverts_projection(self, grid: ModeGrid) -> None:
        rng = np.random.default_rng(3)
        g = rng.standard_normal((grid.lmax, grid.n_energy))
        np.testing.assert_allclose(project_modes(grid, synthesize(grid, g)), g, atol=1e-12)

    def test_even_samples_rejected(self, grid: ModeGrid) -> None:
        samples = np.ones((grid.n_theta, grid.n_energy))
        with pytest.raises(ValidationError):
            project_modes(grid, samples)

    def test_wrong_sample_count_rejected(self, grid: ModeGrid) -> None:
        with pytest.raises(ValidationError):
            project_modes(grid, np.zeros((grid.n_theta + 2, grid.n_energy)))


class TestVelocityMoment:
    def test_zero_profile(self, grid: ModeGrid) -> None:
        zero = np.zeros((grid.lmax, grid.n_energy))
        np.testing.assert_array_equal(velocity_moment(grid, zero, np.linspace(-1.0, 1.0, 9)), 0.0)

    def test_vanishes_outside_support(self, grid: ModeGrid) -> None:
        g = np.ones((grid.lmax, grid.n_energy))
        xs = np.array([-2.0 * grid.R0, -grid.R0, grid.R0, 1.5 * grid.R0])
        np.testing.assert_array_equal(velocity_moment(grid, g, xs), 0.0)

    def test_single_energy_support(self, grid: ModeGrid) -> None:
        k = grid.fine_energies.size // 3
        profile = np.zeros((grid.lmax, grid.fine_energies.size))
        profile[0, k] = 1.0
        x_plus = grid.chart.orbit(float(grid.fine_energies[k])).x_plus
        outside = np.linspace(x_plus, 0.99 * grid.R0, 7)
        np.testing.assert_array_equal(fine_profile_moment(grid, profile, outside), 0.0)
        assert float(fine_profile_moment(grid, profile, [0.3 * x_plus])[0]) != 0.0

    def test_moment_is_odd_in_x(self, grid: ModeGrid) -> None:
        rng = np.random.default_rng(1)
        g = rng.standard_normal((grid.lmax, grid.n_energy))
        xs = np.linspace(0.05, 0.95, 7) * grid.R0
        np.testing.assert_allclose(velocity_moment(grid, g, -xs), -velocity_moment(grid, g, xs), atol=1e-12)


class TestOperators:
    def test_B_symmetric_positive_semidefinite(self, B: OperatorMatrix) -> None:
        assert B.symmetry_defect() <= 1e-12
        eigs = np.linalg.eigvalsh(B.matrix)
        assert eigs[0] >= -1e-10 * eigs[-1]

    def test_B_quadratic_form_is_force_energy(self, grid: ModeGrid, B: OperatorMatrix) -> None:
        rng = np.random.default_rng(7)
        c = rng.standard_normal(grid.size)
        m = grid.moment @ c
        expected = float(np.sum(grid.x_weights / (4.0 * np.pi) * m * m))
        assert float(c @ B.matrix @ c) == pytest.approx(expected, rel=1e-10)

    def test_zero_coupling_gives_free_spectrum(self, grid: ModeGrid) -> None:
        _, system = build_A(grid, coupling=0.0)
        np.testing.assert_allclose(system.values, np.sort(grid.beta_flat), rtol=1e-12)
        np.testing.assert_allclose(build_A0(grid).matrix, np.diag(grid.beta_flat))

    def test_coupled_operator_is_positive(
        self, grid: ModeGrid, B: OperatorMatrix, coupled: tuple[OperatorMatrix, EigenSystem]
    ) -> None:
        _, system = coupled
        report = positivity_report(grid, B.scaled(HALF_COUPLING), system)
        assert report["positive"] is True
        assert report["sandwich_holds"] is True
        assert report["B_min_eig"] >= -1e-10 * report["B_norm"]
        assert sum(system.counts().values()) == grid.size

    def test_non_positive_operator_is_a_solver_failure(self, grid: ModeGrid, B: OperatorMatrix) -> None:
        huge = 10.0 * float(grid.beta_flat.max()) / B.norm()
        with pytest.raises(SolverError):
            build_A(grid, B=B, coupling=huge)

    def test_composed_B_converges_to_gram_form(self, grid: ModeGrid, B: OperatorMatrix) -> None:
        fine = build_mode_grid(
            grid.chart, grid.bands, lmax=2, n_energy=16, fine_factor=2, n_x=96, n_theta=64, max_workers=1
        )
        gaps = [_composed_gap(grid, B), _composed_gap(fine, build_B(fine))]
        assert gaps[1] <= 0.25 * gaps[0]
        assert gaps[1] <= 0.02


class TestResolvent:
    def test_free_resolvent_below_bands(self, grid: ModeGrid) -> None:
        f = np.zeros(grid.size)
        f[3] = 1.0
        out = resolvent_apply(grid, -1.0, f)
        assert np.isrealobj(out)
        assert out[3] == pytest.approx(1.0 / (grid.beta_flat[3] + 1.0))

    def test_real_point_in_bands_rejected(self, grid: ModeGrid) -> None:
        with pytest.raises(DomainError):
            resolvent_apply(grid, _mid_band(grid), np.ones(grid.size))

    def test_complex_point_in_bands_allowed(self, grid: ModeGrid) -> None:
        z = complex(_mid_band(grid), 1.0)
        out = resolvent_apply(grid, z, np.ones(grid.size))
        np.testing.assert_allclose(out, 1.0 / (grid.beta_flat - z))

    def test_second_resolvent_identity(
        self, grid: ModeGrid, B: OperatorMatrix, coupled: tuple[OperatorMatrix, EigenSystem]
    ) -> None:
        A, _ = coupled
        for z in (-1.0, complex(_mid_band(grid), 0.5)):
            assert second_resolvent_residual(grid, A, B.scaled(HALF_COUPLING), z) <= 1e-8

    def test_kernel_form_matches_diagonal_resolvent(self, grid: ModeGrid) -> None:
        assert kernel_form_defect(grid, -1.0) <= 1e-10
        assert kernel_form_defect(grid, complex(_mid_band(grid), 2.0)) <= 1e-10


class TestBoundaryValues:
    def test_far_from_axis_matches_minus_B_over_z(self, grid: ModeGrid, B: OperatorMatrix) -> None:
        z = 1e7j
        BR0 = boundary_BR0(grid, z)
        defect = np.linalg.norm(z * BR0.matrix + B.matrix, 2) / B.norm()
        assert defect <= 1e-3

    def test_below_bands_is_real(self, grid: ModeGrid) -> None:
        gamma = 0.5 * grid.bands.band(1).beta_min
        BR0 = boundary_BR0(grid, gamma)
        assert np.max(np.abs(BR0.matrix.imag)) <= 1e-10 * max(np.max(np.abs(BR0.matrix.real)), 1.0)

    def test_edge_margin_enforced(self, grid: ModeGrid) -> None:
        with pytest.raises(DomainError):
            boundary_BR0(grid, grid.bands.band(1).beta_min)

    def test_sign_checked(self, grid: ModeGrid) -> None:
        with pytest.raises(DomainError):
            boundary_BR0(grid, _mid_band(grid), sign=0)

    def test_sides_are_conjugate(self, grid: ModeGrid) -> None:
        gamma = _mid_band(grid)
        plus = boundary_BR0(grid, gamma, 1).matrix
        minus = boundary_BR0(grid, gamma, -1).matrix
        np.testing.assert_allclose(plus, minus.conj(), atol=1e-10 * np.abs(plus).max())

    def test_epsilon_sweep_converges(self, grid: ModeGrid) -> None:
        gaps = epsilon_sweep(grid, _mid_band(grid))
        assert all(b < a for a, b in zip(gaps, gaps[1:], strict=False))


class TestEmbeddedScan:
    def test_zero_coupling_has_no_candidates(self, grid: ModeGrid) -> None:
        gamma = _mid_band(grid)
        spread = 0.05 * gamma
        scan = scan_embedded(grid, np.linspace(gamma - spread, gamma + spread, 5), coupling=0.0, max_workers=1)
        assert not scan.candidates_plus and not scan.candidates_minus
        assert all(p.distance_plus == 1.0 for p in scan.points)
        assert scan.signs_agree()

    def test_both_sides_flag_the_same_points(self, grid: ModeGrid) -> None:
        gamma = _mid_band(grid)
        strongest = float(np.max(np.abs(birman_schwinger_eigenvalues(grid, gamma))))
        scan = scan_embedded(
            grid,
            np.linspace(0.95 * gamma, 1.05 * gamma, 9),
            coupling=1.0 / strongest,
            threshold=2.5,
            refine_factor=1,
            max_workers=1,
        )
        assert scan.candidates_plus and scan.candidates_minus
        assert scan.flags_plus == scan.flags_minus
        assert scan.signs_agree()
        np.testing.assert_allclose(
            [p.distance_plus for p in scan.points], [p.distance_minus for p in scan.points], atol=1e-10
        )

    def test_candidates_appear_as_coupling_grows(self, grid: ModeGrid) -> None:
        bottom = grid.bands.band(1).beta_min
        scan = scan_embedded(grid, bottom * np.linspace(0.2, 0.8, 7), coupling=1.0, refine_factor=1, max_workers=1)
        critical = 1.0 / float(np.max(scan.eigenvalues_plus[3].real))
        sweep = coupling_sweep(scan, [0.0, 0.5 * critical, critical])
        assert sweep["candidates"][repr(0.0)] == []
        assert float(scan.gammas[3]) in sweep["candidates"][repr(critical)]
        assert sweep["monotone"] is True
        assert {"gamma": float(scan.gammas[3]), "first_coupling": critical} in sweep["first_appearance"]

    def test_coupling_sweep_is_monotone_at_zero(self, grid: ModeGrid) -> None:
        gamma = _mid_band(grid)
        scan = scan_embedded(grid, np.linspace(0.9 * gamma, 1.1 * gamma, 5), max_workers=1)
        sweep = coupling_sweep(scan, [0.0, 0.5, 1.0])
        assert sweep["candidates"][repr(0.0)] == []
        assert sweep["couplings"] == [0.0, 0.5, 1.0]

    def test_edge_points_are_skipped(self, grid: ModeGrid) -> None:
        edge = grid.bands.band(1).beta_min
        gamma = _mid_band(grid)
        scan = scan_embedded(grid, [edge, gamma], coupling=0.0, refine_factor=1, max_workers=1)
        assert scan.skipped == (edge,)
        assert scan.gammas.tolist() == [gamma]

    def test_exceptional_set_without_scan_is_the_edges(self, grid: ModeGrid) -> None:
        points = exceptional_set(grid)
        assert [p.gamma for p in points] == exceptional_edges(grid.bands)
        assert {p.kind for p in points} == {"edge"}
        assert all(p.radius > 0.0 for p in points)


class TestMatrixDump:
    def test_real_and_complex_round_trip(self, tmp_path: Path, B: OperatorMatrix) -> None:
        np.testing.assert_array_equal(load_matrix(dump_matrix(B, tmp_path / "B.bin")), B.matrix)
        Z = np.array([[1.0 + 2.0j, -3.0j], [0.5, 4.0 - 1.0j]])
        np.testing.assert_array_equal(load_matrix(dump_matrix(Z, tmp_path / "Z.bin")), Z)

    def test_truncated_dump_rejected(self, tmp_path: Path, B: OperatorMatrix) -> None:
        from antonov.core.errors import InfrastructureError

        path = dump_matrix(B, tmp_path / "B.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(InfrastructureError):
            load_matrix(path)
