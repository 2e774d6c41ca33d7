from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from antonov.features.action_angle import ActionAngleChart, build_chart  # noqa: E402
from antonov.features.band_structure import BandStructure, build_bands  # noqa: E402
from antonov.features.operators import ModeGrid, build_mode_grid  # noqa: E402
from antonov.features.steady_state import (  # noqa: E402
    AnsatzProfile,
    HarmonicWell,
    SteadyState,
    harmonic_state,
    solve_steady_state,
)

# Small grids keep the numerical fixtures fast; they are shared by the whole session.
CHART_SIZE = 33
THETA_TABLE = 129


@pytest.fixture(scope="session")
def harmonic() -> HarmonicWell:
    return harmonic_state(omega=1.0, R0=1.0)


@pytest.fixture(scope="session")
def harmonic_chart(harmonic: HarmonicWell) -> ActionAngleChart:
    return build_chart(harmonic, chart_size=CHART_SIZE, theta_table=THETA_TABLE, max_workers=1)


@pytest.fixture(scope="session")
def polytrope() -> SteadyState:
    return solve_steady_state(AnsatzProfile.polytrope(1.0), 1.0, tol=1e-10)


@pytest.fixture(scope="session")
def king() -> SteadyState:
    return solve_steady_state(AnsatzProfile.king(), 1.0, tol=1e-10)


@pytest.fixture(scope="session")
def chart(polytrope: SteadyState) -> ActionAngleChart:
    return build_chart(polytrope, chart_size=CHART_SIZE, theta_table=THETA_TABLE, max_workers=1)


@pytest.fixture(scope="session")
def bands(chart: ActionAngleChart) -> BandStructure:
    return build_bands(chart, 2)


@pytest.fixture(scope="session")
def grid(chart: ActionAngleChart, bands: BandStructure) -> ModeGrid:
    return build_mode_grid(
        chart,
        bands,
        lmax=2,
        n_energy=16,
        fine_factor=2,
        n_x=48,
        n_theta=16,
        max_workers=1,
    )
