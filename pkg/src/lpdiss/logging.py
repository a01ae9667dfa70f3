"""
Logging helpers.

Every module does `logger = get_logger(__name__)`; the CLI calls
`configure_logging` once. Reports never carry log output.
"""

from __future__ import annotations

import logging
import sys

_ROOT = "lpdiss"
_FORMAT = "%(levelname)s %(name)s: %(message)s"


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name if name.startswith(_ROOT) else f"{_ROOT}.{name}")


def configure_logging(level: str | int = "WARNING") -> logging.Logger:
    """Attach one stderr handler to the package logger (safe to call twice)."""
    root = logging.getLogger(_ROOT)
    if isinstance(level, str):
        resolved = logging.getLevelName(level.strip().upper())
        if not isinstance(resolved, int):
            raise ValueError(f"Unknown log level: {level}")
        level = resolved
    root.setLevel(level)
    if not any(getattr(h, "_lpdiss", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler._lpdiss = True  # type: ignore[attr-defined]
        root.addHandler(handler)
    return root
