"""JSON cache of solved steady states keyed by (kind, k, h, tol)."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path

from antonov.core.errors import InfrastructureError
from antonov.features.steady_state.domain import AnsatzProfile, SteadyState

logger = logging.getLogger(__name__)


def cache_key(profile: AnsatzProfile, h: float, tol: float) -> str:
    token = f"{profile.kind.value}|{profile.k!r}|{float(h)!r}|{float(tol)!r}"
    return hashlib.sha256(token.encode("utf-8")).hexdigest()[:16]


def cache_path(cache_dir: Path, profile: AnsatzProfile, h: float, tol: float) -> Path:
    return Path(cache_dir) / f"steady_{profile.kind.value}_{cache_key(profile, h, tol)}.json"


def save_state(state: SteadyState, path: Path) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(state.to_dict()), encoding="utf-8")
        tmp.replace(path)
    except OSError as e:
        raise InfrastructureError(f"cannot write steady state {path}", cause=e) from e
    return path


def load_state(path: Path) -> SteadyState | None:
    """Return the cached state, or None when the file is missing or unreadable."""
    if not path.exists():
        return None
    try:
        return SteadyState.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError, TypeError):
        logger.warning("ignoring corrupt steady-state cache %s", path, exc_info=True)
        return None
