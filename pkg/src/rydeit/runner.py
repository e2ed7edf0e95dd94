"""Parallel spectrum scans, preset experiments and their file outputs."""
from __future__ import annotations

import hashlib
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import RunConfig, ScanRange
from .model import RawParams
from .spectra import Spectrum, params_fingerprint, population_at, predict_for
from .svg import SpectrumMap, render_svg
from .validator import compare_models

WORKERS_ENV = "RYDEIT_WORKERS"
CSV_HEADER = "delta_p_mhz,v_mhz,rydberg_population"
PRESETS = ("fig1c", "fig3", "fig4")
FIG1C_PROBE = (0.2, 0.5, 1.0)
FIG3_LINECUTS = (0.2, 0.5, 1.0, 1.5)
FIG4_GAMMA_R = (0.01, 0.05, 0.1)
FIG4_V = (1.1, 4.0)


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV, "")
    try:
        n = int(value)
    except ValueError:
        return 1
    return max(n, 1)


def format_number(x: float) -> str:
    """Positional decimal with exactly 12 significant digits, no exponent."""
    x = float(x) + 0.0  # folds -0.0 into 0.0
    return np.format_float_positional(x, precision=12, unique=False, fractional=False, trim="k")


def _chunk_worker(args) -> List[float]:
    raw, jobs = args
    return [population_at(raw, d, v) for v, d in jobs]


def compute_populations(raw: RawParams, jobs: Sequence[Tuple[float, float]], workers: int = 1) -> np.ndarray:
    """Steady-state populations for ``(v, delta_p)`` jobs, returned in job order.

    Jobs are cut into contiguous chunks; each point is computed the same way
    whatever the chunking, so the output does not depend on ``workers``.
    """
    jobs = list(jobs)
    if workers <= 1 or len(jobs) < 2:
        return np.array(_chunk_worker((raw, jobs)))
    n_chunks = min(len(jobs), 4 * workers)
    bounds = np.linspace(0, len(jobs), n_chunks + 1).astype(int)
    chunks = [(raw, jobs[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_chunk_worker, chunks))
    return np.array([p for part in parts for p in part])


@dataclass
class ScanResult:
    detunings: np.ndarray
    vs: Tuple[float, ...]
    populations: np.ndarray  # shape (len(vs), len(detunings))
    raw: RawParams

    def spectrum(self, i: int) -> Spectrum:
        v = self.vs[i]
        return Spectrum(self.detunings, self.populations[i], v, params_fingerprint(self.raw, v))

    def as_map(self) -> SpectrumMap:
        return SpectrumMap(self.detunings, np.array(self.vs), self.populations)

    def csv_text(self, rows: Optional[Sequence[int]] = None) -> str:
        rows = range(len(self.vs)) if rows is None else rows
        lines = [CSV_HEADER]
        for i in rows:
            v = format_number(self.vs[i])
            for d, p in zip(self.detunings, self.populations[i]):
                lines.append(f"{format_number(d)},{v},{format_number(p)}")
        return "\n".join(lines) + "\n"


def scan(cfg: RunConfig, workers: Optional[int] = None) -> ScanResult:
    raw = cfg.run_raw()
    grid = cfg.scan.grid()
    vs = cfg.v_values()
    jobs = [(v, d) for v in vs for d in grid]  # v-major
    pops = compute_populations(raw, jobs, cfg.workers if workers is None else workers)
    return ScanResult(grid, tuple(vs), pops.reshape(len(vs), grid.size), raw)


class _Outputs:
    """Tracks written files so a failed run leaves nothing half-finished behind."""

    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.files: List[Path] = []

    def write(self, name: str, text: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        path = self.dir / name
        path.write_text(text, encoding="utf-8", newline="\n")
        self.files.append(path)
        return path

    def discard(self) -> None:
        for path in self.files:
            try:
                path.unlink()
            except FileNotFoundError:
                pass
        self.files.clear()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(cfg_docs: Dict[str, dict], outputs: _Outputs, started: float, extra: Optional[dict] = None) -> str:
    from . import __version__

    doc = {
        "package": "rydeit",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "configs": cfg_docs,
        "outputs": {p.name: _sha256(p) for p in outputs.files},
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _markers(raw: RawParams, v: float, two_atom: bool) -> List[Tuple[str, float]]:
    pred = predict_for(raw, v)
    if two_atom:
        return pred.table()
    return [("doublet+", pred.at_doublet[0]), ("doublet-", pred.at_doublet[1]), ("eit_center", pred.eit_center)]


def _write_scan(cfg: RunConfig, outputs: _Outputs, workers: Optional[int]) -> ScanResult:
    result = scan(cfg, workers)
    outputs.write(f"{cfg.name}.csv", result.csv_text())
    if cfg.plot:
        if len(result.vs) > 1:
            svg = render_svg(result.as_map(), title=cfg.name)
        else:
            two = cfg.mode == "two_atom"
            svg = render_svg(result.spectrum(0), _markers(cfg.raw, result.vs[0], two), title=cfg.name)
        outputs.write(f"{cfg.name}.svg", svg)
    return result


def _write_validation(cfg: RunConfig, outputs: _Outputs) -> dict:
    s = cfg.validate
    reports = {}
    for v in cfg.v_values():
        rep = compare_models(cfg.raw, s.delta_p, v, s.t_end, s.samples, s.tolerance)
        reports[f"{v:g}"] = {
            "max_abs_population_gap": rep.max_abs_population_gap,
            "e_population_peak": rep.e_population_peak,
            "control_e_population_peak": rep.control_e_population_peak,
            "dispersive_bound": rep.dispersive_bound,
            "tolerance": rep.tolerance,
            "passed": rep.passed,
            "gaps": rep.gaps,
        }
    outputs.write(f"{cfg.name}_validation.json", json.dumps(reports, indent=2, sort_keys=True) + "\n")
    return reports


def run_scan(cfg: RunConfig, out_dir: Optional[str] = None, workers: Optional[int] = None) -> List[Path]:
    """Run one configuration and write CSV, optional SVG and a JSON manifest.

    Returns the written paths (manifest last). Anything already written is
    removed if the run fails.
    """
    started = time.perf_counter()
    outputs = _Outputs(Path(out_dir or cfg.out))
    try:
        if cfg.mode == "validate":
            _write_validation(cfg, outputs)
        else:
            _write_scan(cfg, outputs, workers)
        outputs.write(f"{cfg.name}_manifest.json", _manifest({cfg.name: cfg.to_dict()}, outputs, started))
    except BaseException:
        outputs.discard()
        raise
    return list(outputs.files)


def preset_configs(name: str, base: Optional[RunConfig] = None) -> List[RunConfig]:
    """The run configurations behind a preset; ``base`` supplies parameters and run options."""
    base = base or RunConfig()
    raw = base.raw
    opts = dict(out=base.out, workers=base.workers, plot=base.plot)
    if name == "fig1c":
        return [
            RunConfig(
                raw=raw.with_(omega_p1=om, omega_p2=om),
                scan=ScanRange(-2.0, 2.0, 0.005),
                mode="single_atom",
                name=f"fig1c_omega_p_{om:g}",
                **opts,
            )
            for om in FIG1C_PROBE
        ]
    if name == "fig3":
        vs = tuple(round(0.05 * k, 12) for k in range(41))
        return [RunConfig(raw=raw, scan=ScanRange(-2.0, 2.0, 0.005), sweep=vs, mode="two_atom", name="fig3", **opts)]
    if name == "fig4":
        return [
            RunConfig(
                raw=raw.with_(gamma_r=g),
                scan=ScanRange(-5.0, 2.0, 0.005),
                sweep=FIG4_V,
                mode="two_atom",
                name=f"fig4_gamma_r_{g:g}",
                **opts,
            )
            for g in FIG4_GAMMA_R
        ]
    raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")


def run_preset(name: str, base: Optional[RunConfig] = None, out_dir: Optional[str] = None,
               workers: Optional[int] = None) -> List[Path]:
    """Reproduce one of the preset figures.

    fig1c: single-atom spectra for three probe strengths. fig3: two-atom map
    over probe detuning and V plus line cuts. fig4: two-atom spectra for
    three Rydberg decay rates at two interaction strengths.
    """
    started = time.perf_counter()
    cfgs = preset_configs(name, base)
    outputs = _Outputs(Path(out_dir or cfgs[0].out))
    try:
        results = [_write_scan(cfg, outputs, workers) for cfg in cfgs]
        if name == "fig3":
            res = results[0]
            rows = [res.vs.index(v) for v in FIG3_LINECUTS]
            outputs.write("fig3_linecuts.csv", res.csv_text(rows))
            if cfgs[0].plot:
                for i in rows:
                    v = res.vs[i]
                    svg = render_svg(res.spectrum(i), _markers(cfgs[0].raw, v, True), title=f"V = {v} MHz")
                    outputs.write(f"fig3_v_{v:g}.svg", svg)
        elif cfgs[0].plot and name == "fig1c":
            svg = render_svg([r.spectrum(0) for r in results], _markers(cfgs[-1].raw, 0.0, False), title="fig1c")
            outputs.write("fig1c.svg", svg)
        docs = {cfg.name: cfg.to_dict() for cfg in cfgs}
        outputs.write(f"{name}_manifest.json", _manifest(docs, outputs, started, {"preset": name}))
    except BaseException:
        outputs.discard()
        raise
    return list(outputs.files)
