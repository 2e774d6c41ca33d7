"""
Entry point for the antonov command line.

Run: python main.py <command> [--config FILE] [--set key=value ...]
Requires: pip install -r requirements.txt
"""

from __future__ import annotations

import sys

from antonov.cli import main

if __name__ == "__main__":
    sys.exit(main())
