"""Action-angle chart: turning points, periods, angles and the inverse chart."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

from antonov.core.errors import DomainError
from antonov.features.action_angle import (
    ActionAngleChart,
    angle,
    angle_holder_report,
    build_chart,
    chart_from_rows,
    chart_point,
    orbit_table,
    period,
    period_derivative,
    period_limit_extrapolated,
    period_tanh_sinh,
    turning_point,
)
from antonov.features.action_angle.repository import load_chart_rows, save_chart_csv
from antonov.features.steady_state import HarmonicWell, SteadyState


class TestHarmonicOracle:
    """U0 = x^2/2: T = 2 pi, T' = 0 and theta in closed form."""

    def test_turning_point(self, harmonic: HarmonicWell) -> None:
        assert turning_point(harmonic, harmonic.Emin + 0.5) == pytest.approx(1.0, rel=1e-12)
        assert turning_point(harmonic, harmonic.E0) == pytest.approx(harmonic.R0, rel=1e-12)

    @pytest.mark.parametrize("offset", [0.01, 0.2, 0.45])
    def test_period_is_two_pi(self, harmonic: HarmonicWell, offset: float) -> None:
        assert period(harmonic, harmonic.Emin + offset) == pytest.approx(2.0 * math.pi, rel=1e-10)
        assert period_tanh_sinh(harmonic, harmonic.Emin + offset) == pytest.approx(2.0 * math.pi, rel=1e-7)

    def test_period_derivative_vanishes(self, harmonic: HarmonicWell) -> None:
        assert abs(period_derivative(harmonic, harmonic.Emin + 0.3)) <= 1e-10

    def test_angle_closed_form(self, harmonic: HarmonicWell) -> None:
        E = harmonic.Emin + 0.5
        xs = np.array([-1.0, -0.5, 0.0, 1.0 / math.sqrt(2.0), 1.0])
        expected = (np.arcsin(xs) + 0.5 * math.pi) / (2.0 * math.pi)
        np.testing.assert_allclose(angle(harmonic, xs, E), expected, atol=1e-10)
        assert float(angle(harmonic, 1.0 / math.sqrt(2.0), E)) == pytest.approx(0.375, abs=1e-10)

    def test_chart_point_eighth_turn(self, harmonic_chart: ActionAngleChart) -> None:
        x, v = chart_point(harmonic_chart, 0.125, harmonic_chart.Emin + 0.5)
        assert float(x) == pytest.approx(-math.sqrt(0.5), abs=1e-9)
        assert float(v) == pytest.approx(math.sqrt(0.5), abs=1e-9)

    def test_chart_is_flat(self, harmonic_chart: ActionAngleChart) -> None:
        np.testing.assert_allclose(harmonic_chart.periods, 2.0 * math.pi, rtol=1e-10)
        assert harmonic_chart.period_bottom == pytest.approx(2.0 * math.pi)


class TestPolytropeChart:
    def test_turning_point_matches_bisection(self, polytrope: SteadyState) -> None:
        E = polytrope.Emin + 0.5 * polytrope.depth
        expected = brentq(lambda x: float(polytrope.U0(x)) - E, 0.0, polytrope.R0, xtol=1e-14)
        assert turning_point(polytrope, E) == pytest.approx(expected, abs=1e-10)

    def test_turning_point_at_cutoff_is_support_radius(self, polytrope: SteadyState) -> None:
        assert turning_point(polytrope, polytrope.E0) == pytest.approx(polytrope.R0, rel=1e-10)

    def test_energy_outside_range_rejected(self, polytrope: SteadyState) -> None:
        with pytest.raises(DomainError):
            turning_point(polytrope, polytrope.Emin - 0.1)

    def test_period_increasing(self, chart: ActionAngleChart) -> None:
        energies = np.linspace(chart.Emin, chart.E0, 50)
        assert np.all(np.diff(chart.period(energies)) > 0.0)
        assert np.all(np.diff(chart.periods) > 0.0)

    def test_period_limit(self, polytrope: SteadyState, chart: ActionAngleChart) -> None:
        limit = math.sqrt(math.pi / float(polytrope.rho0(0.0)))
        assert polytrope.period_limit() == pytest.approx(limit, rel=1e-10)
        assert period_limit_extrapolated(polytrope) == pytest.approx(limit, rel=1e-3)
        assert chart.period_bottom == pytest.approx(limit, rel=1e-10)

    def test_two_period_evaluations_agree(self, polytrope: SteadyState) -> None:
        E = polytrope.Emin + 0.4 * polytrope.depth
        assert period_tanh_sinh(polytrope, E) == pytest.approx(period(polytrope, E), rel=1e-7)

    def test_derivative_matches_finite_difference(self, polytrope: SteadyState) -> None:
        E = polytrope.Emin + 0.5 * polytrope.depth
        delta = 1e-5 * polytrope.depth
        fd = (period(polytrope, E + delta) - period(polytrope, E - delta)) / (2.0 * delta)
        dT = period_derivative(polytrope, E)
        assert dT > 0.0
        assert dT == pytest.approx(fd, rel=1e-4)

    def test_derivative_finite_at_cutoff(self, polytrope: SteadyState) -> None:
        dT = period_derivative(polytrope, polytrope.E0)
        assert math.isfinite(dT) and dT > 0.0

    def test_angle_landmarks(self, polytrope: SteadyState) -> None:
        E = polytrope.Emin + 0.7 * polytrope.depth
        xp = turning_point(polytrope, E)
        assert float(angle(polytrope, 0.0, E)) == pytest.approx(0.25, abs=1e-12)
        assert float(angle(polytrope, xp, E)) == pytest.approx(0.5, abs=1e-12)
        assert float(angle(polytrope, -xp, E)) == pytest.approx(0.0, abs=1e-12)

    def test_angle_clamps_outside_orbit(self, chart: ActionAngleChart) -> None:
        table = chart.orbit(chart.Emin + 0.3 * chart.state.depth)
        theta, clamped = table.theta([-2.0 * table.x_plus, 0.0, 2.0 * table.x_plus], return_flag=True)
        np.testing.assert_allclose(theta, [0.0, 0.25, 0.5], atol=1e-12)
        assert clamped.tolist() == [True, False, True]

    def test_chart_point_landmarks(self, chart: ActionAngleChart) -> None:
        E = chart.Emin + 0.6 * chart.state.depth
        table = chart.orbit(E)
        x, v = chart_point(chart, 0.0, E)
        assert float(x) == pytest.approx(-table.x_plus, abs=1e-10)
        assert float(v) == pytest.approx(0.0, abs=1e-4)
        x, v = chart_point(chart, 0.25, E)
        assert float(x) == pytest.approx(0.0, abs=1e-10)
        assert float(v) == pytest.approx(math.sqrt(2.0 * (E - chart.Emin)), rel=1e-10)

    def test_angle_is_half_holder_in_energy(self, chart: ActionAngleChart) -> None:
        report = angle_holder_report(chart, samples=8)
        assert 0.0 < report["max_ratio"] < 10.0

    def test_chart_inverts_angle(self, chart: ActionAngleChart) -> None:
        E = chart.Emin + 0.45 * chart.state.depth
        table = chart.orbit(E)
        thetas = np.linspace(0.01, 0.49, 25)
        np.testing.assert_allclose(table.theta(table.position(thetas)), thetas, atol=1e-10)

    def test_second_half_retraces_with_negative_velocity(self, chart: ActionAngleChart) -> None:
        table = chart.orbit(chart.Emin + 0.5 * chart.state.depth)
        np.testing.assert_allclose(table.position(0.8), table.position(0.2), atol=1e-12)
        assert float(table.velocity(0.8)) == pytest.approx(-float(table.velocity(0.2)))

    def test_orbit_table_record(self, polytrope: SteadyState) -> None:
        table = orbit_table(polytrope, polytrope.Emin + 0.5 * polytrope.depth)
        record = table.to_record()
        assert set(record) == {"E", "x_plus", "T", "dT"}
        assert record["T"] == pytest.approx(table.period)


class TestBuildChart:
    def test_chart_size_floor(self, harmonic: HarmonicWell) -> None:
        with pytest.raises(DomainError):
            build_chart(harmonic, chart_size=2)

    def test_interpolant_matches_direct_period(self, chart: ActionAngleChart, polytrope: SteadyState) -> None:
        E = polytrope.Emin + 0.37 * polytrope.depth
        assert float(chart.period(E)) == pytest.approx(period(polytrope, E), rel=1e-5)

    def test_csv_round_trip(self, tmp_path: Path, chart: ActionAngleChart) -> None:
        path = save_chart_csv(chart, tmp_path / "chart.csv")
        rows = load_chart_rows(path)
        assert rows is not None
        assert len(rows) == chart.energies.size
        assert rows[-1]["x_plus"] == pytest.approx(chart.state.R0)
        assert rows[0]["T"] == pytest.approx(chart.period_bottom)

    def test_stored_rows_rebuild_the_same_chart(
        self, tmp_path: Path, chart: ActionAngleChart, polytrope: SteadyState
    ) -> None:
        rows = load_chart_rows(save_chart_csv(chart, tmp_path / "chart.csv"))
        assert rows is not None
        rebuilt = chart_from_rows(polytrope, rows, theta_table=chart.theta_table)
        energies = polytrope.Emin + polytrope.depth * np.array([0.013, 0.37, 0.71, 0.999])
        assert np.allclose(rebuilt.period(energies), chart.period(energies), rtol=1e-12, atol=0.0)
        assert np.allclose(
            rebuilt.period_derivative(energies), chart.period_derivative(energies), rtol=1e-12, atol=0.0
        )
        assert rebuilt.period_bottom == pytest.approx(chart.period_bottom, rel=1e-12)

    def test_missing_chart_file_is_a_miss(self, tmp_path: Path) -> None:
        assert load_chart_rows(tmp_path / "absent.csv") is None

    @pytest.mark.parametrize(
        "content",
        ["E,x_plus,T,dT\n0.0,not-a-number,1.0,0.0\n", "a,b,c\n1,2,3\n", "E,x_plus,T,dT\n1.0,2.0\n"],
    )
    def test_corrupt_chart_file_is_a_miss(self, tmp_path: Path, content: str) -> None:
        path = tmp_path / "chart.csv"
        path.write_text(content, encoding="utf-8")
        assert load_chart_rows(path) is None

    def test_rows_of_another_state_rejected(
        self, tmp_path: Path, chart: ActionAngleChart, harmonic: HarmonicWell
    ) -> None:
        rows = load_chart_rows(save_chart_csv(chart, tmp_path / "chart.csv"))
        assert rows is not None
        with pytest.raises(DomainError):
            chart_from_rows(harmonic, rows)
        with pytest.raises(DomainError):
            chart_from_rows(chart.state, rows[:2])
