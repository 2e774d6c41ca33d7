"""Version metadata recorded in run manifests and printed by ``--version``.

Packaged builds inject ANTONOV_VERSION / ANTONOV_GIT_SHA / ANTONOV_BUILD_DATE;
source checkouts report a dev placeholder.
"""

from __future__ import annotations

import os
import platform

_DEV_VERSION = "0.0.0-dev"


def get_build_info() -> dict[str, str]:
    return {
        "version": os.getenv("ANTONOV_VERSION", _DEV_VERSION).strip() or _DEV_VERSION,
        "git_sha": os.getenv("ANTONOV_GIT_SHA", "dev").strip() or "dev",
        "build_date": os.getenv("ANTONOV_BUILD_DATE", "").strip(),
    }


def library_versions() -> dict[str, str | None]:
    """Versions of the numerical stack; outputs are reproducible only on a matching stack."""
    versions: dict[str, str | None] = {"python": platform.python_version()}
    for name in ("numpy", "scipy", "yaml"):
        try:
            module = __import__(name)
            versions[name] = getattr(module, "__version__", None)
        except Exception:
            versions[name] = None
    return versions


def get_version_string() -> str:
    info = get_build_info()
    tail = f"{info['git_sha']}, {info['build_date']}" if info["build_date"] else info["git_sha"]
    return f"antonov v{info['version']} ({tail})"
