"""Per-run manifests: enough metadata to reproduce a command's outputs."""

from __future__ import annotations

import hashlib
import json
import subprocess
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from antonov.core.paths import get_app_state_dir
from antonov.core.version import get_build_info, library_versions

MANIFEST_NAME = "run_manifest.json"


@dataclass(frozen=True, slots=True)
class RunManifest:
    run_type: str
    timestamp: str
    run_id: str
    config_hash: str
    spec: dict[str, Any]
    env: dict[str, Any]
    build: dict[str, str]
    git_commit: str | None
    artifacts: dict[str, Any]


def config_digest(spec: dict[str, Any]) -> str:
    canonical = json.dumps(spec, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _safe_git_commit() -> str | None:
    try:
        out = subprocess.check_output(
            ["git", "rev-parse", "HEAD"], text=True, stderr=subprocess.DEVNULL
        ).strip()
        return out or None
    except Exception:
        return None


def _runs_root() -> Path:
    root = get_app_state_dir() / "runs"
    root.mkdir(parents=True, exist_ok=True)
    return root


def register_run(
    run_id: str,
    run_type: str,
    spec: dict[str, Any],
    artifacts: dict[str, Any],
    *,
    run_dir: Path | None = None,
) -> Path:
    """Write ``run_manifest.json`` into ``run_dir`` and index the run by id."""
    root = _runs_root()
    target = run_dir if run_dir is not None else root / run_id
    target.mkdir(parents=True, exist_ok=True)

    manifest = RunManifest(
        run_type=run_type,
        timestamp=datetime.now(timezone.utc).isoformat(),  # noqa: UP017
        run_id=run_id,
        config_hash=config_digest(spec),
        spec=spec,
        env=library_versions(),
        build=get_build_info(),
        git_commit=_safe_git_commit(),
        artifacts=artifacts,
    )
    (target / MANIFEST_NAME).write_text(
        json.dumps(asdict(manifest), ensure_ascii=False, indent=2, default=str), encoding="utf-8"
    )

    index_path = root / "index.json"
    index: dict[str, str] = {}
    if index_path.exists():
        try:
            raw = json.loads(index_path.read_text(encoding="utf-8"))
            if isinstance(raw, dict):
                index = {str(k): str(v) for k, v in raw.items()}
        except Exception:
            index = {}
    index[run_id] = str(target)
    index_path.write_text(json.dumps(index, ensure_ascii=False, indent=2), encoding="utf-8")
    return target


def get_run_folder(run_id: str | None) -> Path | None:
    if not run_id:
        return None
    index_path = _runs_root() / "index.json"
    if not index_path.exists():
        return None
    try:
        raw = json.loads(index_path.read_text(encoding="utf-8"))
    except Exception:
        return None
    if not isinstance(raw, dict):
        return None
    p = raw.get(run_id)
    if not isinstance(p, str):
        return None
    folder = Path(p)
    return folder if folder.exists() else None
