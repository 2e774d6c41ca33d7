"""Typed run configuration.

Config documents are JSON (or YAML) and are normalized through this dataclass:

- missing keys are filled with defaults
- basic type coercion is applied (e.g. "128" -> 128)
- unknown keys are ignored (forward compatibility)

``validate()`` returns human-readable problems instead of raising, so the CLI
can report all of them at once.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import yaml

from antonov import config as defaults
from antonov.core.errors import InfrastructureError, ValidationError
from antonov.core.observability.run_manifest import config_digest

PROFILES = ("polytrope", "king", "harmonic")
INITIAL_DATA = ("bump", "random_ac", "eigenvector", "quasi_mode")


def _as_bool(value: Any, default: bool) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        v = value.strip().lower()
        if v in {"true", "1", "yes", "y", "on"}:
            return True
        if v in {"false", "0", "no", "n", "off"}:
            return False
    if isinstance(value, (int, float)):
        return bool(value)
    return default


def _as_int(value: Any, default: int) -> int:
    try:
        if isinstance(value, bool):
            return default
        return int(value)
    except (TypeError, ValueError):
        return default


def _as_float(value: Any, default: float) -> float:
    try:
        if isinstance(value, bool):
            return default
        return float(value)
    except (TypeError, ValueError):
        return default


def _as_optional_float(value: Any) -> float | None:
    if value is None or (isinstance(value, str) and value.strip().lower() in {"", "none", "null"}):
        return None
    out = _as_float(value, float("nan"))
    return None if out != out else out


def _as_str(value: Any, default: str) -> str:
    if value is None:
        return default
    if isinstance(value, (str, int, float)) and not isinstance(value, bool):
        return str(value)
    return default


@dataclass(frozen=True, slots=True)
class RunConfig:
    # steady state
    profile: str = defaults.DEFAULT_PROFILE
    k: float = defaults.DEFAULT_POLYTROPE_K
    depth: float | None = defaults.DEFAULT_DEPTH
    mass: float | None = None
    omega: float = 1.0
    radius: float = 1.0
    tol: float = defaults.DEFAULT_TOL
    h_min: float = defaults.DEFAULT_H_MIN
    h_max: float = defaults.DEFAULT_H_MAX
    max_radius: float = defaults.DEFAULT_MAX_RADIUS
    state_nodes: int = defaults.DEFAULT_STATE_NODES
    # chart
    quad_tol: float = defaults.DEFAULT_QUAD_TOL
    chart_size: int = defaults.DEFAULT_CHART_SIZE
    theta_table: int = defaults.DEFAULT_THETA_TABLE
    # mode grid / operators
    lmax: int = defaults.DEFAULT_LMAX
    n_energy: int = defaults.DEFAULT_N_ENERGY
    n_beta: int = defaults.DEFAULT_N_BETA
    fine_factor: int = defaults.DEFAULT_FINE_FACTOR
    n_x: int = defaults.DEFAULT_N_X
    n_theta: int = defaults.DEFAULT_N_THETA
    delta_lo: float = defaults.DEFAULT_DELTA_LO
    delta_hi: float = defaults.DEFAULT_DELTA_HI
    edge_margin: float = defaults.DEFAULT_EDGE_MARGIN
    r_excl: float = defaults.DEFAULT_R_EXCL
    gamma_points: int = defaults.DEFAULT_GAMMA_POINTS
    gamma_min: float | None = None
    gamma_max: float | None = None
    candidate_threshold: float = defaults.DEFAULT_CANDIDATE_THRESHOLD
    refine_factor: int = defaults.DEFAULT_REFINE_FACTOR
    coupling: float = defaults.DEFAULT_COUPLING
    cond_max: float = defaults.DEFAULT_COND_MAX
    # scattering
    refine: bool = False
    # dynamics
    horizon: float = defaults.DEFAULT_HORIZON
    time_steps: int = defaults.DEFAULT_TIME_STEPS
    x_points: int = defaults.DEFAULT_X_POINTS
    initial_data: str = defaults.DEFAULT_INITIAL_DATA
    bump_mode: int = 1
    bump_center: float = 0.5
    bump_width: float = 0.08
    seed: int = 0
    # plumbing
    max_workers: int = defaults.DEFAULT_MAX_WORKERS
    output_dir: str = str(defaults.DEFAULT_OUTPUT_DIR)
    cache_dir: str = str(defaults.DEFAULT_CACHE_DIR)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any] | None) -> RunConfig:
        base = cls()
        if not d:
            return base
        # nested {"profile": {"kind": ..., "k": ...}} is accepted as well
        flat = dict(d)
        prof = flat.get("profile")
        if isinstance(prof, Mapping):
            flat["profile"] = prof.get("kind", base.profile)
            flat.setdefault("k", prof.get("k", base.k))
        values: dict[str, Any] = {}
        for f in fields(cls):
            if f.name not in flat:
                continue
            raw = flat[f.name]
            current = getattr(base, f.name)
            if f.name in {"depth", "mass", "gamma_min", "gamma_max"}:
                values[f.name] = _as_optional_float(raw)
            elif isinstance(current, bool):
                values[f.name] = _as_bool(raw, current)
            elif isinstance(current, int):
                values[f.name] = _as_int(raw, current)
            elif isinstance(current, float):
                values[f.name] = _as_float(raw, current)
            else:
                values[f.name] = _as_str(raw, current)
        cfg = replace(base, **values)
        if cfg.mass is not None and "depth" not in flat:
            cfg = replace(cfg, depth=None)
        return replace(cfg, profile=cfg.profile.strip().lower())

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True)

    def with_overrides(self, overrides: Mapping[str, Any]) -> RunConfig:
        merged = self.to_dict()
        merged.update(overrides)
        return RunConfig.from_dict(merged)

    def config_hash(self) -> str:
        return config_digest(self.to_dict())

    def validate(self) -> list[str]:
        errors: list[str] = []
        if self.profile not in PROFILES:
            errors.append(f"profile must be one of {', '.join(PROFILES)}")
        if self.profile == "polytrope" and self.k < 1.0:
            errors.append("polytrope exponent k must be >= 1")
        if self.profile == "harmonic":
            if self.omega <= 0 or self.radius <= 0:
                errors.append("harmonic test potential needs omega > 0 and radius > 0")
        elif self.mass is None:
            if self.depth is None or self.depth <= 0:
                errors.append("depth must be positive")
        elif self.mass <= 0:
            errors.append("mass must be positive")
        for name in ("tol", "quad_tol", "candidate_threshold", "cond_max", "horizon"):
            if getattr(self, name) <= 0:
                errors.append(f"{name} must be > 0")
        if not 0 < self.h_min < self.h_max:
            errors.append("need 0 < h_min < h_max")
        if self.lmax < 1:
            errors.append("lmax must be >= 1")
        for name in ("n_energy", "n_beta", "n_x", "chart_size", "time_steps", "fine_factor"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be >= 1")
        if self.n_theta % 2 or self.n_theta <= 4 * self.lmax:
            errors.append("n_theta must be even and larger than 4*lmax")
        if self.theta_table < 9:
            errors.append("theta_table must be >= 9")
        for name in ("delta_lo", "delta_hi"):
            if not 0 < getattr(self, name) < 0.5:
                errors.append(f"{name} must lie in (0, 1/2) of E0 - Emin")
        if self.edge_margin <= 0 or self.r_excl <= 0:
            errors.append("edge_margin and r_excl must be > 0")
        if self.coupling < 0:
            errors.append("coupling must be >= 0")
        if self.initial_data not in INITIAL_DATA:
            errors.append(f"initial_data must be one of {', '.join(INITIAL_DATA)}")
        if not 1 <= self.bump_mode <= self.lmax:
            errors.append("bump_mode must lie in 1..lmax")
        if self.gamma_points < 3:
            errors.append("gamma_points must be >= 3")
        return errors

    def ensure_valid(self) -> RunConfig:
        problems = self.validate()
        if problems:
            raise ValidationError("; ".join(problems))
        return self


def load_run_config(path: Path | str) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"config file not found: {p}")
    try:
        text = p.read_text(encoding="utf-8")
        raw = yaml.safe_load(text) if p.suffix.lower() in {".yaml", ".yml"} else json.loads(text)
    except (OSError, ValueError, yaml.YAMLError) as e:
        raise ValidationError(f"cannot parse config {p}", cause=e) from e
    if raw is not None and not isinstance(raw, Mapping):
        raise ValidationError(f"config {p} must hold a mapping")
    return RunConfig.from_dict(raw)


def export_run_config(cfg: RunConfig, path: Path | str) -> Path:
    out = Path(path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        if out.suffix.lower() in {".yaml", ".yml"}:
            out.write_text(cfg.to_yaml(), encoding="utf-8")
        else:
            out.write_text(json.dumps(cfg.to_dict(), indent=2), encoding="utf-8")
    except OSError as e:
        raise InfrastructureError(f"cannot write config {out}", cause=e) from e
    return out
