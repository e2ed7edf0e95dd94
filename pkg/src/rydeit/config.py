"""Run configuration: a TOML document with nested sections.

Canonical schema (every section and key optional; defaults are the paper's
parameter set and a [-2, 2] MHz probe scan)::

    [params]                  # cyclic MHz
    omega_p1 = 1.0            # complex Rabi frequencies: number or [re, im]
    omega_p2 = 1.0
    omega_c1 = 20.0
    omega_c2 = 20.0
    delta_p2 = 50.0
    delta_c1 = 1000.0
    delta_c2 = 1000.0         # or delta_c = 0.0 (sets delta_c2 = delta_c1 + delta_c)
    gamma_ec = 3.0
    gamma_ep = 3.0
    gamma_r = 0.1
    v = 0.0                   # or c6 (MHz um^6) together with r_sep (um)
    coupling_on_control = true

    [scan]
    delta_p_min = -2.0
    delta_p_max = 2.0
    step = 0.005

    [sweep]                   # optional: v_min/v_max/step or values = [...]
    v_min = 0.0
    v_max = 2.0
    step = 0.05

    [run]
    mode = "two_atom"         # two_atom | single_atom | validate
    out = "out"
    name = "spectrum"         # stem of the output files
    workers = 1
    plot = false

    [validate]                # used by mode = "validate" and the validate command
    delta_p = 0.0
    t_end = 10.0
    samples = 201
    tolerance = 0.02
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import SchemaError
from .model import RawParams
from .spectra import detuning_grid

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

MODES = ("two_atom", "single_atom", "validate")

_PARAM_KEYS = {
    "omega_p1", "omega_p2", "omega_c1", "omega_c2",
    "delta_p2", "delta_c1", "delta_c2", "delta_c",
    "gamma_ec", "gamma_ep", "gamma_r",
    "v", "c6", "r_sep", "coupling_on_control",
}
_COMPLEX_KEYS = {"omega_p1", "omega_p2", "omega_c1", "omega_c2"}
_SCHEMA = {
    "params": _PARAM_KEYS,
    "scan": {"delta_p_min", "delta_p_max", "step"},
    "sweep": {"v_min", "v_max", "step", "values"},
    "run": {"mode", "out", "name", "workers", "plot"},
    "validate": {"delta_p", "t_end", "samples", "tolerance"},
}


@dataclass(frozen=True)
class ScanRange:
    delta_p_min: float = -2.0
    delta_p_max: float = 2.0
    step: float = 0.005

    def grid(self) -> np.ndarray:
        return detuning_grid(self.delta_p_min, self.delta_p_max, self.step)


@dataclass(frozen=True)
class ValidateSettings:
    delta_p: float = 0.0
    t_end: float = 10.0
    samples: int = 201
    tolerance: float = 0.02


@dataclass(frozen=True)
class RunConfig:
    raw: RawParams = field(default_factory=RawParams)
    scan: ScanRange = field(default_factory=ScanRange)
    sweep: Optional[Tuple[float, ...]] = None  # explicit v values; None means raw.v only
    mode: str = "two_atom"
    out: str = "out"
    name: str = "spectrum"
    workers: int = 1
    plot: bool = False
    validate: ValidateSettings = field(default_factory=ValidateSettings)

    def __post_init__(self):
        if self.mode not in MODES:
            raise SchemaError(f"unknown mode {self.mode!r}", "run.mode")
        if self.workers < 1:
            raise SchemaError("worker count must be >= 1", "run.workers")
        if not self.scan.step > 0:
            raise SchemaError("step must be positive", "scan.step")
        if self.scan.delta_p_max < self.scan.delta_p_min:
            raise SchemaError("empty scan range", "scan")

    def v_values(self) -> Tuple[float, ...]:
        if self.mode == "single_atom":
            return (0.0,)
        return self.sweep if self.sweep else (float(self.raw.v),)

    def run_raw(self) -> RawParams:
        if self.mode == "single_atom":
            return self.raw.with_(coupling_on_control=False, v=0.0)
        return self.raw

    def to_dict(self) -> Dict[str, Any]:
        """Canonical document that ``parse_dict`` maps back onto this config."""
        params = {}
        for key, value in asdict(self.raw).items():
            if key in ("c6", "r_sep"):
                continue
            if isinstance(value, complex):
                value = [value.real, value.imag] if value.imag else value.real
            params[key] = value
        doc = {
            "params": params,
            "scan": asdict(self.scan),
            "run": {"mode": self.mode, "out": self.out, "name": self.name, "workers": self.workers, "plot": self.plot},
            "validate": asdict(self.validate),
        }
        if self.sweep:
            doc["sweep"] = {"values": list(self.sweep)}
        return doc


def _number(value, path: str, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise SchemaError("must be finite", path)
    if integer:
        if value != int(value):
            raise SchemaError("expected an integer", path)
        return int(value)
    return float(value)


def _complex(value, path: str) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise SchemaError("complex values are [re, im]", path)
        return complex(_number(value[0], path + "[0]"), _number(value[1], path + "[1]"))
    return complex(_number(value, path))


def _section(doc: Mapping, name: str) -> Mapping:
    sec = doc.get(name, {})
    if not isinstance(sec, Mapping):
        raise SchemaError("expected a table", name)
    unknown = sorted(set(sec) - _SCHEMA[name])
    if unknown:
        raise SchemaError("unknown key", f"{name}.{unknown[0]}")
    return sec


def _parse_params(sec: Mapping) -> RawParams:
    kw: Dict[str, Any] = {}
    for key, value in sec.items():
        path = f"params.{key}"
        if key in _COMPLEX_KEYS:
            kw[key] = _complex(value, path)
        elif key == "coupling_on_control":
            if not isinstance(value, bool):
                raise SchemaError("expected true or false", path)
            kw[key] = value
        else:
            kw[key] = _number(value, path)
    if "delta_c" in kw:
        if "delta_c2" in sec:
            raise SchemaError("give delta_c or delta_c2, not both", "params.delta_c")
        kw["delta_c2"] = kw.get("delta_c1", RawParams.delta_c1) + kw.pop("delta_c")
    if ("c6" in kw) != ("r_sep" in kw):
        raise SchemaError("c6 and r_sep go together", "params.c6" if "c6" in kw else "params.r_sep")
    if "c6" in kw and "v" in kw:
        raise SchemaError("give v or (c6, r_sep), not both", "params.v")
    for key in ("gamma_ec", "gamma_ep", "gamma_r"):
        if kw.get(key, 0.0) < 0:
            raise SchemaError("decay rates must be >= 0", f"params.{key}")
    if "r_sep" in kw and kw["r_sep"] <= 0:
        raise SchemaError("must be positive", "params.r_sep")
    return RawParams(**kw)


def _parse_sweep(sec: Mapping) -> Optional[Tuple[float, ...]]:
    if not sec:
        return None
    if "values" in sec:
        if set(sec) != {"values"}:
            raise SchemaError("values excludes v_min/v_max/step", "sweep.values")
        vals = sec["values"]
        if not isinstance(vals, list) or not vals:
            raise SchemaError("expected a nonempty list", "sweep.values")
        return tuple(_number(x, f"sweep.values[{i}]") for i, x in enumerate(vals))
    missing = [k for k in ("v_min", "v_max", "step") if k not in sec]
    if missing:
        raise SchemaError("missing key", f"sweep.{missing[0]}")
    lo, hi, step = (_number(sec[k], f"sweep.{k}") for k in ("v_min", "v_max", "step"))
    if step <= 0:
        raise SchemaError("step must be positive", "sweep.step")
    if hi < lo:
        raise SchemaError("empty sweep", "sweep")
    return tuple(float(x) for x in detuning_grid(lo, hi, step))


def parse_dict(doc: Mapping, strict: bool = False) -> RunConfig:
    unknown = sorted(set(doc) - set(_SCHEMA))
    if unknown:
        raise SchemaError("unknown section", unknown[0])
    raw = _parse_params(_section(doc, "params"))

    scan_sec = _section(doc, "scan")
    scan = ScanRange(**{k: _number(v, f"scan.{k}") for k, v in scan_sec.items()})
    if scan.step <= 0:
        raise SchemaError("step must be positive", "scan.step")
    if scan.delta_p_max < scan.delta_p_min:
        raise SchemaError("empty scan range", "scan")

    sweep = _parse_sweep(_section(doc, "sweep"))

    run = _section(doc, "run")
    mode = run.get("mode", "two_atom")
    if mode not in MODES:
        raise SchemaError(f"expected one of {', '.join(MODES)}", "run.mode")
    for key in ("out", "name"):
        if key in run and not isinstance(run[key], str):
            raise SchemaError("expected a string", f"run.{key}")
    workers = _number(run.get("workers", 1), "run.workers", integer=True)
    if workers < 1:
        raise SchemaError("worker count must be >= 1", "run.workers")
    plot = run.get("plot", False)
    if not isinstance(plot, bool):
        raise SchemaError("expected true or false", "run.plot")

    val = _section(doc, "validate")
    settings = ValidateSettings(
        delta_p=_number(val.get("delta_p", 0.0), "validate.delta_p"),
        t_end=_number(val.get("t_end", 10.0), "validate.t_end"),
        samples=_number(val.get("samples", 201), "validate.samples", integer=True),
        tolerance=_number(val.get("tolerance", 0.02), "validate.tolerance"),
    )
    if settings.t_end <= 0:
        raise SchemaError("must be positive", "validate.t_end")
    if settings.samples < 2:
        raise SchemaError("need at least 2 samples", "validate.samples")

    raw.validate(strict=strict)
    return RunConfig(
        raw=raw,
        scan=scan,
        sweep=sweep,
        mode=mode,
        out=run.get("out", "out"),
        name=run.get("name", "spectrum"),
        workers=workers,
        plot=plot,
        validate=settings,
    )


def parse_config(text: str, strict: bool = False) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Raises :class:`SchemaError` (with the offending key path) for malformed
    or unknown entries and :class:`PhysicsError` when the parameters leave
    the dispersive regime under ``strict``; otherwise that case only warns.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"not valid TOML: {exc}") from exc
    return parse_dict(doc, strict=strict)
