from .logging_config import setup_logging
from .run_manifest import RunManifest, config_digest, get_run_folder, register_run
from .timing import time_block, timed

__all__ = [
    "RunManifest",
    "config_digest",
    "get_run_folder",
    "register_run",
    "setup_logging",
    "time_block",
    "timed",
]
