from __future__ import annotations

import json
from pathlib import Path

import pytest

from antonov import config as defaults
from antonov.core.errors import ValidationError
from antonov.domain.run_config import RunConfig, export_run_config, load_run_config


def test_defaults_are_valid() -> None:
    cfg = RunConfig()
    assert cfg.validate() == []
    assert cfg.depth == defaults.DEFAULT_DEPTH
    assert cfg.n_theta == defaults.DEFAULT_N_THETA
    assert cfg.ensure_valid() is cfg


def test_from_dict_coerces_and_ignores_unknown_keys() -> None:
    cfg = RunConfig.from_dict(
        {"lmax": "4", "depth": "2.5", "refine": "yes", "coupling": "0.25", "colour": "blue"}
    )
    assert cfg.lmax == 4
    assert cfg.depth == 2.5
    assert cfg.refine is True
    assert cfg.coupling == 0.25


def test_bad_numbers_fall_back_to_defaults() -> None:
    cfg = RunConfig.from_dict({"n_energy": "many", "tol": True})
    assert cfg.n_energy == defaults.DEFAULT_N_ENERGY
    assert cfg.tol == defaults.DEFAULT_TOL


def test_nested_profile() -> None:
    cfg = RunConfig.from_dict({"profile": {"kind": "King"}})
    assert cfg.profile == "king"
    cfg = RunConfig.from_dict({"profile": {"kind": "polytrope", "k": 2.0}})
    assert cfg.k == 2.0


def test_mass_without_depth_clears_depth() -> None:
    cfg = RunConfig.from_dict({"mass": 3.0})
    assert cfg.depth is None
    assert cfg.validate() == []
    both = RunConfig.from_dict({"mass": 3.0, "depth": 1.5})
    assert both.depth == 1.5


@pytest.mark.parametrize(
    ("overrides", "message"),
    [
        ({"depth": -1.0}, "depth must be positive"),
        ({"mass": -2.0}, "mass must be positive"),
        ({"n_theta": 12, "lmax": 6}, "n_theta must be even and larger than 4*lmax"),
        ({"n_theta": 63}, "n_theta must be even and larger than 4*lmax"),
        ({"bump_mode": 9}, "bump_mode must lie in 1..lmax"),
        ({"gamma_points": 2}, "gamma_points must be >= 3"),
        ({"profile": "plummer"}, "profile must be one of"),
        ({"initial_data": "noise"}, "initial_data must be one of"),
    ],
)
def test_validation_messages(overrides: dict, message: str) -> None:
    cfg = RunConfig.from_dict(overrides)
    assert any(message in p for p in cfg.validate())
    with pytest.raises(ValidationError, match="must"):
        cfg.ensure_valid()


def test_all_problems_reported_together() -> None:
    cfg = RunConfig.from_dict({"depth": 0.0, "gamma_points": 1})
    with pytest.raises(ValidationError) as exc:
        cfg.ensure_valid()
    assert "depth must be positive; " in str(exc.value)
    assert "gamma_points" in str(exc.value)


def test_with_overrides_keeps_other_fields() -> None:
    cfg = RunConfig.from_dict({"lmax": 3}).with_overrides({"coupling": "0.5"})
    assert cfg.lmax == 3
    assert cfg.coupling == 0.5
    assert cfg.config_hash() != RunConfig.from_dict({"lmax": 3}).config_hash()


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ValidationError, match="config file not found"):
        load_run_config(tmp_path / "absent.json")


def test_unparsable_file(tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text("{lmax: ", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_run_config(path)


def test_non_mapping_rejected(tmp_path: Path) -> None:
    path = tmp_path / "run.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_run_config(path)


@pytest.mark.parametrize("suffix", [".json", ".yaml"])
def test_export_and_reload(tmp_path: Path, suffix: str) -> None:
    cfg = RunConfig.from_dict({"profile": "king", "lmax": 4, "n_theta": 32, "gamma_min": 5.0})
    path = export_run_config(cfg, tmp_path / "sub" / f"run{suffix}")
    assert load_run_config(path) == cfg


def test_json_export_is_plain(tmp_path: Path) -> None:
    path = export_run_config(RunConfig(), tmp_path / "run.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["profile"] == defaults.DEFAULT_PROFILE
    assert data["mass"] is None
