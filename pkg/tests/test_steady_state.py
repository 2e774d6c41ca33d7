"""Steady states: depth-density closure, shooting solver, mass targets and the JSON cache."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy.special import erf

from antonov.core.errors import DomainError
from antonov.features.steady_state import (
    AnsatzProfile,
    SteadyState,
    phi_prime_abs,
    rho_of_depth,
    rho_of_depth_quadrature,
    solve_for_mass,
    solve_steady_state,
    steady_state_report,
)
from antonov.features.steady_state.repository import cache_path, load_state, save_state


class TestRhoOfDepth:
    """Closed forms of the density as a function of the local depth E0 - U0."""

    def test_polytrope_k1_at_unit_depth(self) -> None:
        value = float(rho_of_depth(AnsatzProfile.polytrope(1.0), 1.0))
        assert value == pytest.approx(4.0 * math.sqrt(2.0) / 3.0, rel=1e-14)
        assert value == pytest.approx(1.885618, abs=1e-6)

    def test_zero_depth_is_zero(self) -> None:
        assert float(rho_of_depth(AnsatzProfile.polytrope(1.0), 0.0)) == 0.0
        assert float(rho_of_depth(AnsatzProfile.king(), 0.0)) == 0.0

    def test_king_at_unit_depth(self) -> None:
        expected = math.sqrt(2.0 * math.pi) * math.e * float(erf(1.0)) - 2.0 * math.sqrt(2.0)
        assert float(rho_of_depth(AnsatzProfile.king(), 1.0)) == pytest.approx(expected, rel=1e-13)

    @pytest.mark.parametrize("profile", [AnsatzProfile.polytrope(1.0), AnsatzProfile.polytrope(2.5), AnsatzProfile.king()])
    def test_closed_form_matches_quadrature(self, profile: AnsatzProfile) -> None:
        for h in (0.3, 1.0, 2.0):
            closed = float(rho_of_depth(profile, h))
            assert rho_of_depth_quadrature(profile, h) == pytest.approx(closed, rel=1e-10)

    def test_king_small_depth_series_is_continuous(self) -> None:
        below, above = rho_of_depth(AnsatzProfile.king(), [0.999e-3, 1.001e-3])
        assert above > below
        assert above == pytest.approx(below, rel=1e-2)

    def test_negative_depth_rejected(self) -> None:
        with pytest.raises(DomainError):
            rho_of_depth(AnsatzProfile.polytrope(1.0), -0.1)


class TestPhiPrime:
    def test_linear_ramp_has_unit_weight(self) -> None:
        profile = AnsatzProfile.polytrope(1.0).with_cutoff(2.0)
        np.testing.assert_array_equal(phi_prime_abs(profile, [0.0, 1.0, 1.9]), 1.0)

    def test_king_at_cutoff(self) -> None:
        profile = AnsatzProfile.king().with_cutoff(1.0)
        assert float(phi_prime_abs(profile, 1.0)) == pytest.approx(1.0)

    def test_quadratic_polytrope(self) -> None:
        profile = AnsatzProfile.polytrope(2.0).with_cutoff(1.0)
        assert float(phi_prime_abs(profile, 0.5)) == pytest.approx(1.0)

    def test_cutoff_required(self) -> None:
        with pytest.raises(DomainError):
            phi_prime_abs(AnsatzProfile.polytrope(2.0), 0.5)

    def test_exponent_below_one_rejected(self) -> None:
        with pytest.raises(DomainError):
            AnsatzProfile.polytrope(0.5)


class TestSolveSteadyState:
    """Shooting from the centre to the depth h."""

    def test_mass_radius_identity(self, polytrope: SteadyState) -> None:
        assert abs(polytrope.E0 - 2.0 * math.pi * polytrope.R0 * polytrope.M0) <= 1e-10 * polytrope.E0
        assert polytrope.E0 - polytrope.Emin == pytest.approx(1.0)
        assert float(polytrope.U0(0.0)) == pytest.approx(polytrope.Emin, abs=1e-14)
        assert float(polytrope.U0(polytrope.R0)) == pytest.approx(polytrope.E0, rel=1e-12)

    def test_mass_matches_first_integral(self, polytrope: SteadyState) -> None:
        # (W')^2 / 2 = 4 pi * integral of rho over [0, h], with rho = c s^(3/2)
        c = 4.0 * math.sqrt(2.0) / 3.0
        slope = math.sqrt(8.0 * math.pi * c / 2.5)
        assert polytrope.M0 == pytest.approx(slope / (2.0 * math.pi), rel=1e-7)

    def test_king_central_curvature(self, king: SteadyState) -> None:
        report = steady_state_report(king)
        assert report["curvature_defect"] <= 1e-6
        assert report["mass_radius_defect"] <= 1e-10

    def test_report_identities(self, polytrope: SteadyState) -> None:
        report = steady_state_report(polytrope)
        assert report["poisson_residual"] <= 1e-6
        assert report["density_decreasing"] is True

    def test_density_vanishes_outside_support(self, polytrope: SteadyState) -> None:
        xs = np.array([-2.0 * polytrope.R0, -polytrope.R0, polytrope.R0, 3.0 * polytrope.R0])
        np.testing.assert_array_equal(polytrope.rho0(xs), 0.0)

    def test_potential_is_even_and_force_odd(self, polytrope: SteadyState) -> None:
        xs = np.linspace(0.0, 1.5 * polytrope.R0, 17)
        np.testing.assert_allclose(polytrope.U0(-xs), polytrope.U0(xs))
        np.testing.assert_allclose(polytrope.dU0(-xs), -polytrope.dU0(xs))

    def test_vanishing_depth_scaling(self, polytrope: SteadyState) -> None:
        # k = 1: rho ~ h^(3/2), so x scales like h^(-1/4) and the support widens as h -> 0
        small = solve_steady_state(AnsatzProfile.polytrope(1.0), 1e-4, tol=1e-10)
        assert small.R0 == pytest.approx(polytrope.R0 * 1e-4 ** -0.25, rel=1e-5)
        assert small.M0 == pytest.approx(polytrope.M0 * 1e-4 ** 1.25, rel=1e-5)
        assert small.R0 > polytrope.R0

    @pytest.mark.parametrize("depth", [0.0, -1.0])
    def test_depth_must_be_positive(self, depth: float) -> None:
        with pytest.raises(DomainError, match="depth must be positive"):
            solve_steady_state(AnsatzProfile.polytrope(1.0), depth)


class TestSolveForMass:
    def test_round_trip_recovers_depth(self, polytrope: SteadyState) -> None:
        state = solve_for_mass(AnsatzProfile.polytrope(1.0), polytrope.M0, tol=1e-10, h_range=(0.5, 2.0))
        assert state.h == pytest.approx(1.0, rel=1e-6)

    def test_king_mass_is_increasing_in_depth(self, king: SteadyState) -> None:
        state = solve_for_mass(AnsatzProfile.king(), 2.0 * king.M0, tol=1e-10, h_range=(0.5, 3.0))
        assert state.h > 1.0
        assert state.M0 == pytest.approx(2.0 * king.M0, rel=1e-8)

    @pytest.mark.parametrize("mass", [0.0, -0.5])
    def test_mass_must_be_positive(self, mass: float) -> None:
        with pytest.raises(DomainError):
            solve_for_mass(AnsatzProfile.polytrope(1.0), mass)


class TestStateCache:
    def test_save_and_load(self, tmp_path: Path, polytrope: SteadyState) -> None:
        path = cache_path(tmp_path, polytrope.profile, polytrope.h, polytrope.tol)
        save_state(polytrope, path)
        loaded = load_state(path)
        assert loaded is not None
        assert loaded.R0 == polytrope.R0
        assert loaded.M0 == polytrope.M0
        xs = np.linspace(-polytrope.R0, polytrope.R0, 11)
        np.testing.assert_allclose(loaded.U0(xs), polytrope.U0(xs), rtol=0, atol=1e-14)

    def test_missing_file_is_a_miss(self, tmp_path: Path) -> None:
        assert load_state(tmp_path / "nope.json") is None

    def test_corrupt_file_is_a_miss(self, tmp_path: Path) -> None:
        path = tmp_path / "steady.json"
        path.write_text("{not json", encoding="utf-8")
        assert load_state(path) is None

    def test_key_depends_on_depth_and_tolerance(self, tmp_path: Path) -> None:
        profile = AnsatzProfile.polytrope(1.0)
        a = cache_path(tmp_path, profile, 1.0, 1e-10)
        assert a != cache_path(tmp_path, profile, 2.0, 1e-10)
        assert a != cache_path(tmp_path, profile, 1.0, 1e-8)
        assert a != cache_path(tmp_path, AnsatzProfile.king(), 1.0, 1e-10)
