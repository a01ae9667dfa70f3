"""
lpdiss command line.

    lpdiss check --op elasticity --nu 0.3 --p 2
    lpdiss check --op diag --file A.json --p 10
    lpdiss angle --op scalar --file real.json --p 4
    lpdiss region --op elasticity --nu-min -1 --nu-max 2 --format csv

Exit codes: 0 holds, 1 fails, 2 usage or configuration error, 3 undetermined.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .. import __version__
from ..config import COMMANDS, OPERATORS, RunConfig, default_plan, env_log_level, load_config_file
from ..elasticity import (
    elasticity_check,
    elasticity_nu_set,
    elasticity_p_interval,
    elasticity_region,
    region_grid,
    elasticity_shift_lower,
    elasticity_shift_upper,
)
from ..errors import ConsistencyError, DissipativityError, PreconditionError
from ..linalg import is_symmetric, sym_eigs
from ..logging import configure_logging, get_logger
from ..operators import OperatorSpec, load_operator
from ..oracle import contraction_sim, random_testfield, violation_search
from ..oracle.testfield import Grid
from ..scalar import real_scalar_angle, scalar_angle, scalar_check, scalar_p_interval
from ..sampling import SplitMix64
from ..systems import (
    general2d_necessary,
    shift_lower_bound,
    shift_upper_bound,
    sym_p_interval,
    system_angle,
    system_check,
)
from ..types import (
    DomainBox,
    ElasticityParams,
    OperatorKind,
    PExponent,
    PInterval,
    SamplingPlan,
    Status,
    Verdict,
)

logger = get_logger(__name__)

EXIT_HOLDS, EXIT_FAILS, EXIT_USAGE, EXIT_UNDETERMINED = 0, 1, 2, 3
REPORT_KEYS = (
    "command", "verdict", "margin", "witness", "interval", "p_interval", "oracle", "notes", "version", "seed",
)


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpdiss", description="L^p-dissipativity of elliptic operators")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--op", choices=OPERATORS)
    parser.add_argument("--file", type=Path)
    parser.add_argument("--p", type=float)
    parser.add_argument("--nu", type=float)
    parser.add_argument("--seed", type=lambda s: int(s, 0))
    parser.add_argument("--points", type=int)
    parser.add_argument("--dirs", type=int)
    parser.add_argument("--refine", type=int)
    parser.add_argument("--out", type=Path)
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--config", type=Path)
    parser.add_argument("--log-level", dest="log_level")
    parser.add_argument("--mode", choices=("positive", "real", "nonnegative"))
    parser.add_argument("--direction", choices=("lower", "upper"))
    parser.add_argument("--budget", type=int)
    parser.add_argument("--T", dest="t_final", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--nu-min", dest="nu_min", type=float)
    parser.add_argument("--nu-max", dest="nu_max", type=float)
    parser.add_argument("--r-max", dest="r_max", type=float)
    parser.add_argument("--steps", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags win over the config file, which wins over the environment."""
    data: dict[str, Any] = load_config_file(args.config) if args.config else {}
    env = default_plan()
    plan = SamplingPlan(
        seed=_pick(args.seed, data.get("seed"), env.seed),
        n_points=_pick(args.points, data.get("points"), env.n_points),
        n_directions=_pick(args.dirs, data.get("dirs"), env.n_directions),
        refine_iters=_pick(args.refine, data.get("refine"), env.refine_iters),
    )
    base = {k: v for k, v in data.items() if k in RunConfig.__dataclass_fields__ and k != "plan"}
    for key in ("file", "out"):
        if base.get(key) is not None:
            base[key] = Path(base[key])
    base["command"] = args.command
    base["plan"] = plan
    base.setdefault("log_level", env_log_level())
    cfg = RunConfig(**base)
    flags = {
        k: getattr(args, k)
        for k in ("op", "file", "p", "nu", "out", "format", "mode", "direction", "budget", "t_final",
                  "dt", "nu_min", "nu_max", "r_max", "steps", "log_level")
    }
    return cfg.with_overrides(**flags)


def _pick(*values: Any) -> Any:
    return next(v for v in values if v is not None)


# -- report plumbing -----------------------------------------------------------


def _clean(obj: Any) -> Any:
    """JSON-safe copy: infinities as strings, NaN as null, numpy scalars as floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
    return obj


def _new_report(cfg: RunConfig) -> dict[str, Any]:
    report: dict[str, Any] = {key: None for key in REPORT_KEYS}
    report.update(command=cfg.command, notes=[], version=__version__, seed=cfg.plan.seed)
    return report


def _put_verdict(report: dict[str, Any], verdict: Verdict) -> None:
    report["verdict"] = verdict.to_dict()
    report["margin"] = verdict.margin
    if verdict.witness is not None:
        report["witness"] = verdict.witness.to_dict()
    report["notes"].extend(verdict.notes)
    if verdict.sampled:
        report["notes"].append("holds on sampled set" if verdict.holds else "sampled verdict")


def _exit_for(verdict: Verdict) -> int:
    if verdict.status is Status.FAILS:
        return EXIT_FAILS
    if verdict.status is Status.UNDETERMINED or verdict.necessary_only:
        return EXIT_UNDETERMINED
    return EXIT_HOLDS


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def render(report: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    rows = report.get("rows")
    if rows:
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in header])
    else:
        writer.writerow(["key", "value"])
        for key in sorted(report):
            value = report[key]
            if isinstance(value, (dict, list)):
                value = json.dumps(_clean(value), sort_keys=True)
            writer.writerow([key, _fmt(value)])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- commands ------------------------------------------------------------------


def _need_p(cfg: RunConfig) -> PExponent:
    if cfg.p is None:
        raise UsageError(f"{cfg.command} needs --p")
    return PExponent(cfg.p)


def _operator(cfg: RunConfig) -> OperatorSpec:
    if cfg.op is None:
        raise UsageError(f"{cfg.command} needs --op")
    return load_operator(cfg.op, cfg.file, cfg.nu)


def _diag_interval(op: OperatorSpec) -> PInterval | None:
    """p-interval of a constant real symmetric diagonal system, intersected over h."""
    if not op.is_constant:
        return None
    lo, hi = 1.0, math.inf
    closed_lo = closed_hi = False
    for h in range(op.n):
        A = op.blocks_at(np.zeros((1, op.n)))[h, h, 0]
        if np.any(A.imag != 0) or not is_symmetric(A.real):
            return None
        eig = sym_eigs(A.real)
        if eig.smallest < 0:
            return PInterval(2.0, 2.0, empty=True)
        iv = sym_p_interval(eig.smallest, eig.largest)
        if iv.p_lo > lo:
            lo, closed_lo = iv.p_lo, iv.closed_lo
        if iv.p_hi < hi:
            hi, closed_hi = iv.p_hi, iv.closed_hi
    return PInterval(lo, hi, closed_lo, closed_hi)


def cmd_check(cfg: RunConfig, report: dict[str, Any]) -> int:
    p = _need_p(cfg)
    op = _operator(cfg)
    if op.kind is OperatorKind.SCALAR:
        verdict = scalar_check(op.fields[0], p, cfg.plan)
        report["p_interval"] = scalar_p_interval(op.fields[0], cfg.plan).to_dict()
    elif op.kind is OperatorKind.DIAGONAL:
        verdict = system_check(op, p, cfg.plan)
        interval = _diag_interval(op)
        report["p_interval"] = None if interval is None else interval.to_dict()
    elif op.kind is OperatorKind.ELASTICITY:
        assert op.elasticity is not None
        verdict = elasticity_check(op.elasticity, p, cfg.plan)
        report["p_interval"] = elasticity_p_interval(op.elasticity).to_dict()
    else:
        verdict = general2d_necessary(op, p, cfg.plan)
    _put_verdict(report, verdict)
    return _exit_for(verdict)


def cmd_angle(cfg: RunConfig, report: dict[str, Any]) -> int:
    p = _need_p(cfg)
    if cfg.op is None:
        report["interval"] = real_scalar_angle(p).to_dict()
        report["notes"].append("real operators: the angle does not depend on the coefficients")
        return EXIT_HOLDS
    op = _operator(cfg)
    if op.kind is OperatorKind.SCALAR:
        angle = scalar_angle(op.fields[0], p, cfg.plan)
        report["interval"] = angle.interval.to_dict()
        report["oracle"] = {"lambda1": angle.lambda1, "lambda2": angle.lambda2, "xi_empty": angle.xi_empty}
    elif op.kind is OperatorKind.DIAGONAL:
        report["interval"] = system_angle(op, p, cfg.plan).to_dict()
    else:
        raise UsageError(f"angle is not available for --op {op.kind.value}")
    return EXIT_HOLDS


def cmd_elasticity(cfg: RunConfig, report: dict[str, Any]) -> int:
    if cfg.nu is None:
        raise UsageError("elasticity needs --nu")
    params = ElasticityParams(cfg.nu)
    report["p_interval"] = elasticity_p_interval(params).to_dict()
    if cfg.p is None:
        return EXIT_HOLDS
    p = PExponent(cfg.p)
    verdict = elasticity_check(params, p, cfg.plan)
    _put_verdict(report, verdict)
    shifts: dict[str, Any] = {
        "nu_set": elasticity_nu_set(p).to_dict(),
        "shift_lower": elasticity_shift_lower(params, p).to_dict(),
    }
    if cfg.nu != 0.25:
        shifts["shift_upper"] = elasticity_shift_upper(params, p).to_dict()
    else:
        report["notes"].append("nu = 1/4: the k Lap - E test has a degenerate denominator")
    report["oracle"] = shifts
    return _exit_for(verdict)


def cmd_shift(cfg: RunConfig, report: dict[str, Any]) -> int:
    p = _need_p(cfg)
    op = _operator(cfg)
    if op.kind is OperatorKind.ELASTICITY:
        assert op.elasticity is not None
        if cfg.direction == "upper":
            shift = elasticity_shift_upper(op.elasticity, p)
        else:
            shift = elasticity_shift_lower(op.elasticity, p)
    else:
        diag = op if op.kind is OperatorKind.DIAGONAL else OperatorSpec.diagonal(op.fields)
        if op.kind not in (OperatorKind.DIAGONAL, OperatorKind.SCALAR) or diag.n != 1:
            raise UsageError("shift needs a one-dimensional operator or --op elasticity")
        if cfg.direction == "upper":
            shift = shift_upper_bound(diag, p, cfg.plan)
        else:
            shift = shift_lower_bound(diag, p, cfg.plan, mode=cfg.mode)  # type: ignore[arg-type]
    report["oracle"] = shift.to_dict()
    report["margin"] = shift.criterion_value
    report["notes"].extend(shift.notes)
    return EXIT_HOLDS if shift.exists else EXIT_FAILS


def _criterion_holds(op: OperatorSpec, p: PExponent, plan: SamplingPlan) -> bool:
    if op.kind is OperatorKind.ELASTICITY:
        assert op.elasticity is not None
        return elasticity_check(op.elasticity, p).holds
    if op.kind is OperatorKind.SCALAR:
        return scalar_check(op.fields[0], p, plan).holds
    if op.kind is OperatorKind.DIAGONAL:
        return system_check(op, p, plan).holds
    return False


def cmd_oracle(cfg: RunConfig, report: dict[str, Any]) -> int:
    p = _need_p(cfg)
    op = _operator(cfg)
    found = violation_search(op, p, budget=cfg.budget, plan=cfg.plan)
    if found is not None:
        report["oracle"] = found.to_dict()
        report["margin"] = found.value
        return EXIT_FAILS
    report["oracle"] = {"value": None, "evaluations": cfg.budget}
    if _criterion_holds(op, p, cfg.plan):
        report["notes"].append("no violation found; the criterion holds")
        return EXIT_HOLDS
    report["notes"].append("inconclusive: the criterion fails but no violating field was found")
    return EXIT_UNDETERMINED


def cmd_sim(cfg: RunConfig, report: dict[str, Any]) -> int:
    p = _need_p(cfg)
    op = _operator(cfg)
    box = op.box if op.box is not None else DomainBox((0.0,), (1.0,))
    grid = Grid.uniform(box, 512)
    u0 = random_testfield(grid, op.m, SplitMix64(cfg.plan.seed), real=True)
    (h,) = grid.spacing
    x = grid.axes()[0]
    mids = 0.5 * (x[1:] + x[:-1])
    a_max = max(float(np.linalg.norm(M, 2)) for M in op.blocks_at(mids[:, None])[0, 0])
    dt = cfg.dt if cfg.dt is not None else 0.9 * 0.4 * h * h / a_max
    result = contraction_sim(op, p, u0, cfg.t_final if cfg.t_final is not None else 1e-3, dt)
    report["oracle"] = result.to_dict()
    report["margin"] = -result.max_relative_increase
    if result.monotone:
        return EXIT_HOLDS
    report["notes"].append("the L^p norm increased during the run")
    return EXIT_FAILS


def cmd_region(cfg: RunConfig, report: dict[str, Any]) -> int:
    if cfg.op == "elasticity":
        rows, notes = elasticity_region(region_grid(cfg.nu_min, cfg.nu_max, cfg.steps))
        report["notes"].extend(notes)
        report["rows"] = [r.as_row() for r in rows]
    else:
        rows_r = []
        for r in np.linspace(1.0, cfg.r_max, cfg.steps):
            iv = sym_p_interval(1.0, float(r))
            rows_r.append({"r": float(r), "p_lo": iv.p_lo, "p_hi": iv.p_hi, "open": not iv.closed_lo})
        report["rows"] = rows_r
    return EXIT_HOLDS


HANDLERS = {
    "check": cmd_check,
    "angle": cmd_angle,
    "elasticity": cmd_elasticity,
    "shift": cmd_shift,
    "oracle": cmd_oracle,
    "sim": cmd_sim,
    "region": cmd_region,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_HOLDS
    try:
        cfg = resolve_config(args)
        configure_logging(cfg.log_level)
    except (DissipativityError, ValueError, OSError) as exc:
        print(f"lpdiss: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = _new_report(cfg)
    try:
        code = HANDLERS[cfg.command](cfg, report)
    except PreconditionError as exc:
        report["notes"].append(str(exc))
        if exc.witness is not None:
            report["witness"] = exc.witness.to_dict()
        code = EXIT_FAILS
    except ConsistencyError as exc:
        logger.error("consistency check failed: %s", exc)
        report["notes"].append(f"consistency check failed: {exc}")
        code = EXIT_UNDETERMINED
    except (DissipativityError, ValueError, OSError) as exc:
        print(f"lpdiss: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(report, cfg.format)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        write_atomic(cfg.out, text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
