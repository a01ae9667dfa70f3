"""
Run configuration.

Values resolve in the order: explicit flag, then environment variable, then
built-in default.

  LPDISS_SEED       seed of the deterministic sample generator (0)
  LPDISS_POINTS     spatial samples per criterion (64)
  LPDISS_DIRS       direction samples per spatial point (2000)
  LPDISS_REFINE     local-refinement rounds (40)
  LPDISS_LOG_LEVEL  logging level name (WARNING)
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .types import ReportFormat, SamplingPlan

COMMANDS = ("check", "angle", "elasticity", "shift", "oracle", "sim", "region")
OPERATORS = ("scalar", "diag", "general2d", "elasticity")


def _env_int(name: str, default: int) -> int:
    raw = (os.environ.get(name) or "").strip()
    if not raw:
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def env_log_level() -> str:
    return (os.environ.get("LPDISS_LOG_LEVEL") or "WARNING").strip().upper()


def default_plan() -> SamplingPlan:
    """Sampling plan built from the LPDISS_* environment variables."""
    return SamplingPlan(
        seed=_env_int("LPDISS_SEED", 0),
        n_points=_env_int("LPDISS_POINTS", 64),
        n_directions=_env_int("LPDISS_DIRS", 2000),
        refine_iters=_env_int("LPDISS_REFINE", 40),
    )


@dataclass(frozen=True)
class RunConfig:
    command: str
    op: str | None = None
    file: Path | None = None
    p: float | None = None
    nu: float | None = None
    plan: SamplingPlan = field(default_factory=SamplingPlan)
    out: Path | None = None
    format: ReportFormat = "json"
    mode: str = "positive"         # shift: positive | real | nonnegative
    direction: str = "lower"       # shift: lower (A - kI) | upper (kI - A)
    budget: int = 64               # oracle: functional evaluations
    t_final: float | None = None   # sim
    dt: float | None = None        # sim
    nu_min: float = -1.0           # region
    nu_max: float = 2.0
    r_max: float = 100.0
    steps: int = 31
    log_level: str = "WARNING"

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command: {self.command}")
        if self.op is not None and self.op not in OPERATORS:
            raise ValueError(f"Unknown operator kind: {self.op}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"Unknown format: {self.format}")
        if self.p is not None and not (1.0 < self.p < float("inf")):
            raise ValueError(f"--p must lie in (1, inf), got {self.p}")
        if self.file is not None and not Path(self.file).is_file():
            raise ValueError(f"Operator file not found: {self.file}")
        if self.budget < 1:
            raise ValueError(f"--budget must be >= 1, got {self.budget}")
        if self.steps < 2:
            raise ValueError(f"--steps must be >= 2, got {self.steps}")

    def with_overrides(self, **changes: Any) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON object mirroring RunConfig; flags given explicitly win later."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must hold a JSON object")
    unknown = set(data) - set(RunConfig.__dataclass_fields__) - {"seed", "points", "dirs", "refine"}
    if unknown:
        raise ValueError(f"Unknown config keys: {', '.join(sorted(unknown))}")
    return data
