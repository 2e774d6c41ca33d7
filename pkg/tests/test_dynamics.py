"""Spectral evolution of the Antonov wave equation, force and potential, damping metrics."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from antonov.config import ACCEPT_DAMPED_RATIO, ACCEPT_OSCILLATING_RATIO
from antonov.core.errors import DomainError, ValidationError
from antonov.features.dynamics import (
    InitialData,
    ac_projected,
    bump_data,
    cesaro_means,
    damping_report,
    eigenvector_data,
    evolve,
    fft_peak,
    force_norm,
    force_singular_values,
    free_flow_comparison,
    make_initial_data,
    potential,
    propagator_identity_residual,
    run_evolution,
    x_grid,
)
from antonov.features.dynamics.repository import SERIES_COLUMNS, save_profiles_csv, save_series_csv
from antonov.features.operators import EigenSystem, ModeGrid, build_A, exceptional_set
from antonov.features.scattering import WaveOperators, ac_intervals, run_scattering

COUPLING = 0.5


@pytest.fixture(scope="module")
def system(grid: ModeGrid) -> EigenSystem:
    return build_A(grid, coupling=COUPLING)[1]


@pytest.fixture(scope="module")
def free_system(grid: ModeGrid) -> EigenSystem:
    return build_A(grid, coupling=0.0)[1]


@pytest.fixture(scope="module")
def intervals(grid: ModeGrid) -> list[tuple[float, float]]:
    return [(lo, hi) for _, lo, hi in ac_intervals(grid, exceptional_set(grid))]


def _bump(grid: ModeGrid) -> InitialData:
    return make_initial_data("bump", grid, None, [], bump_mode=1)  # type: ignore[arg-type]


def _damping_horizon(grid: ModeGrid) -> float:
    """Four tenths of the recurrence time of the first mode's frequency grid."""
    roots = np.sort(np.sqrt(grid.beta[0]))
    return 0.4 * 2.0 * math.pi / float(np.median(np.diff(roots)))


class TestEvolve:
    def test_initial_state(self, grid: ModeGrid, system: EigenSystem) -> None:
        f0 = _bump(grid).coefficients
        g, h, dg = evolve(system, f0, [0.0])
        np.testing.assert_allclose(g[0], f0, atol=1e-12)
        np.testing.assert_array_equal(h[0], 0.0)
        np.testing.assert_array_equal(dg[0], 0.0)

    def test_eigenvector_oscillates_in_place(self, system: EigenSystem) -> None:
        k = system.values.size // 2
        v = system.vectors[:, k]
        times = np.linspace(0.0, 5.0, 7)
        g, _, _ = evolve(system, v, times)
        expected = np.cos(math.sqrt(system.values[k]) * times)[:, None] * v[None, :]
        np.testing.assert_allclose(g, expected, atol=1e-10)

    def test_velocity_is_A_applied_to_h(self, grid: ModeGrid, system: EigenSystem) -> None:
        A = system.function(lambda lam: lam)
        g, h, dg = evolve(system, _bump(grid).coefficients, [0.7, 2.3])
        np.testing.assert_allclose(dg, h @ A.T, atol=1e-10)
        assert g.shape == (2, grid.size)

    def test_propagator_identity(self, system: EigenSystem) -> None:
        for t in (0.3, 3.7, 41.0):
            assert propagator_identity_residual(system, t) <= 1e-10


class TestForceAndPotential:
    def test_constant_force_gives_linear_potential(self, grid: ModeGrid) -> None:
        x = x_grid(grid, 101)
        U = potential(x, np.full(x.size, 2.0))
        np.testing.assert_allclose(U, -2.0 * (x + grid.R0), atol=1e-12)

    def test_zero_force_gives_zero_potential(self, grid: ModeGrid) -> None:
        x = x_grid(grid, 31)
        np.testing.assert_array_equal(potential(x, np.zeros(x.size)), 0.0)

    def test_potential_bound(self, grid: ModeGrid) -> None:
        x = x_grid(grid, 401)
        F = np.sin(3.0 * x / grid.R0) + 0.3
        sup = float(np.max(np.abs(potential(x, F))))
        assert sup <= math.sqrt(2.0 * grid.R0) * float(force_norm(x, F))

    def test_force_singular_values_decay(self, grid: ModeGrid) -> None:
        report = force_singular_values(grid, x_grid(grid, 64))
        assert report["monotone"] is True
        assert len(report["singular_values"]) == min(64, grid.size)


class TestRunEvolution:
    def test_energy_is_conserved(self, grid: ModeGrid, system: EigenSystem) -> None:
        result = run_evolution(grid, system, _bump(grid), np.linspace(0.0, 17.3, 174), x_points=65)
        assert result.energy_drift <= 1e-10
        assert result.horizon == pytest.approx(17.3)
        assert result.force.shape == (174, 65)
        np.testing.assert_array_equal(result.force_norm[0], 0.0)

    def test_recurrence_guard_warns(self, grid: ModeGrid, system: EigenSystem) -> None:
        short = run_evolution(grid, system, _bump(grid), [0.0, 1.0], x_points=17)
        guard = short.recurrence_horizon
        assert math.isfinite(guard)
        late = run_evolution(grid, system, _bump(grid), np.linspace(0.0, guard, 50), x_points=17)
        assert len(late.warnings) == 1
        assert damping_report(late)["horizon_ok"] is False

    def test_damping_report(self, grid: ModeGrid, system: EigenSystem) -> None:
        result = run_evolution(grid, system, _bump(grid), np.linspace(0.0, 10.0, 201), x_points=65)
        report = damping_report(result, reference=result)
        assert report["potential_bound_holds"] is True
        assert report["reference_late_ratio"] == report["late_ratio"]
        assert len(report["cesaro_force_rate"]) == 10
        assert report["energy_drift"] <= 1e-10

    def test_cesaro_of_constant(self, grid: ModeGrid, system: EigenSystem) -> None:
        result = run_evolution(grid, system, _bump(grid), np.linspace(0.0, 4.0, 41), x_points=17)
        means = cesaro_means(result, np.ones(result.times.size))
        np.testing.assert_allclose([v for _, v in means], 1.0, rtol=1e-12)

    def test_fft_peak_of_a_single_mode(self, grid: ModeGrid, system: EigenSystem) -> None:
        initial = make_initial_data("eigenvector", grid, system, [])
        times = np.linspace(0.0, 200.0, 4001)
        result = run_evolution(grid, system, initial, times, x_points=65)
        peak = fft_peak(result)
        expected = math.sqrt(initial.meta["eigenvalue"]) / (2.0 * math.pi)
        assert abs(peak["frequency"] - expected) <= peak["bin_width"]

    def test_free_flow_without_coupling(self, grid: ModeGrid, free_system: EigenSystem) -> None:
        initial = _bump(grid)
        result = run_evolution(grid, free_system, initial, np.linspace(0.0, 30.0, 61), x_points=17)
        eye = np.eye(grid.size, dtype=complex)
        report = free_flow_comparison(result, initial, grid.beta_flat, WaveOperators(eye, eye, eye))
        assert max(report["distance"]) <= 1e-10
        assert report["ratio"] == 0.0

    def test_wave_operators_track_the_coupled_flow(
        self, grid: ModeGrid, system: EigenSystem, intervals: list[tuple[float, float]]
    ) -> None:
        A, _ = build_A(grid, coupling=COUPLING)
        scattering = run_scattering(
            grid, A, system, exceptional_set(grid), coupling=COUPLING, n_beta=12, max_workers=1
        )
        initial = ac_projected(bump_data(grid, 1, 0.5, 0.2), system, intervals)
        times = np.linspace(0.0, _damping_horizon(grid), 401)
        result = run_evolution(grid, system, initial, times, x_points=17)
        eye = np.eye(grid.size, dtype=complex)
        computed = free_flow_comparison(result, initial, grid.beta_flat, scattering.waves)
        identity = WaveOperators(eye, eye, eye)
        unscattered = free_flow_comparison(result, initial, grid.beta_flat, identity)
        assert computed["late_cesaro_distance"] <= unscattered["late_cesaro_distance"]
        assert computed["initial_distance"] > 0.0
        assert len(computed["distance"]) == 401


class TestDampingDichotomy:
    """Continuous-spectrum data lose their force, a single eigenvector keeps it."""

    def test_absolutely_continuous_data_damp(
        self, grid: ModeGrid, system: EigenSystem, intervals: list[tuple[float, float]]
    ) -> None:
        initial = ac_projected(bump_data(grid, 1, 0.5, 0.2), system, intervals)
        times = np.linspace(0.0, _damping_horizon(grid), 2001)
        report = damping_report(run_evolution(grid, system, initial, times, x_points=65))
        assert report["late_ratio"] <= ACCEPT_DAMPED_RATIO
        assert report["potential_bound_holds"] is True

    def test_eigenvector_data_keep_oscillating(self, grid: ModeGrid, system: EigenSystem) -> None:
        x = x_grid(grid, 65)
        initial = eigenvector_data(grid, system, x)
        period = 2.0 * math.pi / math.sqrt(initial.meta["eigenvalue"])
        times = np.linspace(0.0, max(_damping_horizon(grid), 10.0 * period), 2001)
        report = damping_report(run_evolution(grid, system, initial, times, x_points=65))
        assert report["late_ratio"] >= ACCEPT_OSCILLATING_RATIO


class TestEvolutionFiles:
    def test_series_files(self, tmp_path: Path, grid: ModeGrid, system: EigenSystem) -> None:
        result = run_evolution(grid, system, _bump(grid), np.linspace(0.0, 1.0, 5), x_points=9)
        lines = save_series_csv(result, tmp_path / "series.csv", distance=[0.0] * 5).read_text().splitlines()
        assert lines[0] == ",".join(SERIES_COLUMNS + ("distance",))
        assert len(lines) == 6
        profiles = save_profiles_csv(result, tmp_path / "profiles.csv", stride=2).read_text().splitlines()
        assert len(profiles) == 1 + 3
        assert len(profiles[0].split(",")) == 1 + 9


class TestInitialData:
    def test_unknown_kind(self, grid: ModeGrid, system: EigenSystem) -> None:
        with pytest.raises(ValidationError):
            make_initial_data("plane_wave", grid, system, [])

    def test_bump_mode_range(self, grid: ModeGrid, system: EigenSystem) -> None:
        with pytest.raises(ValidationError):
            make_initial_data("bump", grid, system, [], bump_mode=grid.lmax + 1)

    def test_quasi_mode_needs_a_candidate(self, grid: ModeGrid, system: EigenSystem) -> None:
        with pytest.raises(DomainError):
            make_initial_data("quasi_mode", grid, system, [], candidates=[])

    def test_quasi_mode_picks_nearest_eigenvalue(self, grid: ModeGrid, system: EigenSystem) -> None:
        target = float(system.values[5]) + 1e-9
        initial = make_initial_data("quasi_mode", grid, system, [], candidates=[target])
        assert initial.meta["index"] == 5

    def test_bump_is_normalized_and_single_mode(self, grid: ModeGrid) -> None:
        c = _bump(grid).coefficients
        assert float(np.linalg.norm(c)) == pytest.approx(1.0)
        np.testing.assert_array_equal(c[grid.n_energy :], 0.0)

    def test_random_data_is_absolutely_continuous(
        self, grid: ModeGrid, system: EigenSystem, intervals: list[tuple[float, float]]
    ) -> None:
        initial = make_initial_data("random_ac", grid, system, intervals, seed=4)
        assert float(np.linalg.norm(initial.coefficients)) == pytest.approx(1.0)
        again = ac_projected(initial, system, intervals)
        np.testing.assert_allclose(again.coefficients, initial.coefficients, atol=1e-10)
        assert again.kind == "random_ac_ac"
        assert again.meta["projected"] is True
