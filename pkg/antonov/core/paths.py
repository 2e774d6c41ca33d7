from __future__ import annotations

import os
import sys
from pathlib import Path

from antonov.config import PROJECT_ROOT

APP_FOLDER_NAME = "antonov"


def get_app_state_dir(app_folder_name: str = ".app_state") -> Path:
    """Return a writable directory for logs and the runs index.

    Preference order:
    1) <PROJECT_ROOT>/.app_state if writable (dev / tests)
    2) OS user data dir (~/.local/share/antonov, %APPDATA%\\antonov, ...)
    """
    proj_dir = PROJECT_ROOT / app_folder_name
    try:
        proj_dir.mkdir(parents=True, exist_ok=True)
        marker = proj_dir / ".write_test"
        marker.write_text("ok", encoding="utf-8")
        marker.unlink(missing_ok=True)
        return proj_dir
    except Exception:
        import logging

        logging.getLogger(__name__).debug(
            "Project dir write test failed; falling back to user data dir", exc_info=True
        )
    if sys.platform.startswith("win"):
        base = Path(os.environ.get("APPDATA") or Path.home() / "AppData" / "Roaming")
        return (base / APP_FOLDER_NAME).resolve()
    if sys.platform == "darwin":
        return (Path.home() / "Library" / "Application Support" / APP_FOLDER_NAME).resolve()
    xdg = os.environ.get("XDG_DATA_HOME")
    base = Path(xdg) if xdg else (Path.home() / ".local" / "share")
    return (base / APP_FOLDER_NAME).resolve()
