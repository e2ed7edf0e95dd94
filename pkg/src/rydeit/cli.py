"""Command-line entry point.

    rydeit run --config cfg.toml [--preset fig1c|fig3|fig4] [--out DIR] [--plot] [--workers N] [--strict]
    rydeit validate --config cfg.toml
    rydeit predict --config cfg.toml

Exit codes: 0 success, 2 schema error, 3 physics error (including a failed
model comparison), 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import RunConfig, parse_config
from .errors import PhysicsError, RydEITError, SchemaError
from .model import DispersiveRegimeWarning
from .runner import PRESETS, WORKERS_ENV, default_workers, format_number, run_preset, run_scan
from .spectra import predict_for
from .validator import compare_models


def _load(path: Optional[str], strict: bool) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}") from exc
    return parse_config(text, strict=strict)


def _cmd_run(args) -> int:
    if args.config is None and args.preset is None:
        raise SchemaError("run needs --config or --preset")
    cfg = _load(args.config, args.strict)
    # flag > environment > config file
    if args.workers is not None:
        workers = args.workers
    elif os.environ.get(WORKERS_ENV):
        workers = default_workers()
    else:
        workers = cfg.workers
    if workers < 1:
        raise SchemaError("worker count must be >= 1", "--workers")
    cfg = replace(cfg, workers=workers, plot=cfg.plot or args.plot, out=args.out or cfg.out)
    if args.preset:
        files = run_preset(args.preset, cfg)
    else:
        files = run_scan(cfg)
    for path in files:
        print(path)
    return 0


def _cmd_validate(args) -> int:
    cfg = _load(args.config, args.strict)
    s = cfg.validate
    ok = True
    for v in cfg.v_values():
        rep = compare_models(cfg.raw, s.delta_p, v, s.t_end, s.samples, s.tolerance)
        ok &= rep.passed
        print(json.dumps({
            "v_mhz": v,
            "delta_p_mhz": s.delta_p,
            "max_abs_population_gap": rep.max_abs_population_gap,
            "e_population_peak": rep.e_population_peak,
            "control_e_population_peak": rep.control_e_population_peak,
            "dispersive_bound": rep.dispersive_bound,
            "passed": rep.passed,
        }, sort_keys=True))
    return 0 if ok else PhysicsError.exit_code


def _cmd_predict(args) -> int:
    cfg = _load(args.config, args.strict)
    lines = ["label,delta_p_mhz"]
    pred = predict_for(cfg.raw, cfg.v_values()[0])
    for label, x in pred.table():
        lines.append(f"{label},{format_number(x)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydeit", description="EIT spectra of two interacting Rydberg atoms")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="scan spectra from a config or a preset")
    run.add_argument("--config")
    run.add_argument("--preset", choices=PRESETS)
    run.add_argument("--out")
    run.add_argument("--plot", action="store_true")
    run.add_argument("--workers", type=int)
    run.add_argument("--strict", action="store_true")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="compare the four-level and effective models")
    val.add_argument("--config", required=True)
    val.add_argument("--strict", action="store_true")
    val.set_defaults(func=_cmd_validate)

    pred = sub.add_parser("predict", help="print the predicted peak table as CSV")
    pred.add_argument("--config", required=True)
    pred.add_argument("--strict", action="store_true")
    pred.set_defaults(func=_cmd_predict)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", DispersiveRegimeWarning)
            return args.func(args)
    except RydEITError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ArithmeticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
