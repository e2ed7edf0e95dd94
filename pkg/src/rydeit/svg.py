"""Dependency-free SVG figures: spectrum line plots and (delta_p, v) heat maps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptyData
from .spectra import Spectrum

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 20, 50


@dataclass
class SpectrumMap:
    """Populations on a (v, delta_p) grid; ``populations[i, k]`` belongs to ``vs[i]``, ``detunings[k]``."""

    detunings: np.ndarray
    vs: np.ndarray
    populations: np.ndarray

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.vs = np.asarray(self.vs, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        if self.populations.shape != (self.vs.size, self.detunings.size):
            raise ValueError("populations must have shape (len(vs), len(detunings))")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10)), key=lambda s: abs(s - raw))
    return np.arange(np.ceil(lo / step) * step, hi + 1e-9 * step, step)


def _fmt(x: float) -> str:
    return f"{x:.4g}" if abs(x) > 1e-12 else "0"


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        if xhi == xlo:
            xlo, xhi = xlo - 0.5, xhi + 0.5
        if yhi == ylo:
            ylo, yhi = ylo - 0.5, yhi + 0.5
        self.xlo, self.xhi, self.ylo, self.yhi = xlo, xhi, ylo, yhi
        self.w = WIDTH - MARGIN_L - MARGIN_R
        self.h = HEIGHT - MARGIN_T - MARGIN_B

    def x(self, v):
        return MARGIN_L + (v - self.xlo) / (self.xhi - self.xlo) * self.w

    def y(self, v):
        return MARGIN_T + (1 - (v - self.ylo) / (self.yhi - self.ylo)) * self.h

    def axes(self, xlabel: str, ylabel: str) -> List[str]:
        out = [
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{self.w}" height="{self.h}" fill="none" stroke="black"/>'
        ]
        for t in _ticks(self.xlo, self.xhi):
            px = self.x(t)
            out.append(f'<line class="tick" x1="{px:.2f}" y1="{MARGIN_T + self.h}" x2="{px:.2f}" y2="{MARGIN_T + self.h + 5}" stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{MARGIN_T + self.h + 18}" text-anchor="middle" font-size="11">{_fmt(t)}</text>')
        for t in _ticks(self.ylo, self.yhi):
            py = self.y(t)
            out.append(f'<line class="tick" x1="{MARGIN_L - 5}" y1="{py:.2f}" x2="{MARGIN_L}" y2="{py:.2f}" stroke="black"/>')
            out.append(f'<text x="{MARGIN_L - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
        out.append(f'<text x="{MARGIN_L + self.w / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
        out.append(
            f'<text x="15" y="{MARGIN_T + self.h / 2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 15 {MARGIN_T + self.h / 2})">{escape(ylabel)}</text>'
        )
        return out


def _color(z: float) -> str:
    # white -> dark red
    z = min(max(z, 0.0), 1.0)
    r = int(round(255 - 120 * z))
    g = b = int(round(255 * (1 - z)))
    return f"#{r:02x}{g:02x}{b:02x}"


def _document(body: Iterable[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">'
    )
    parts = [head, f"<title>{escape(title)}</title>", '<rect width="100%" height="100%" fill="white"/>']
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(
    data: Union[Spectrum, SpectrumMap, Sequence[Spectrum]],
    markers: Optional[Sequence[Tuple[str, float]]] = None,
    title: str = "",
) -> str:
    """SVG text for one or more spectra (line plot) or a heat map.

    ``markers`` are ``(label, delta_p)`` pairs drawn as vertical dashed lines,
    e.g. ``PeakPrediction.table()`` for the eleven reference detunings.
    """
    markers = list(markers or [])
    if isinstance(data, SpectrumMap):
        if data.populations.size == 0:
            raise EmptyData("heat map has no cells")
        return _heat_map(data, markers, title)
    curves = [data] if isinstance(data, Spectrum) else list(data)
    if not curves or any(c.detunings.size == 0 for c in curves):
        raise EmptyData("nothing to plot")
    return _line_plot(curves, markers, title)


def _marker_lines(frame: _Frame, markers) -> List[str]:
    out = []
    for label, x in markers:
        px = frame.x(x)
        out.append(
            f'<line class="marker" x1="{px:.2f}" y1="{MARGIN_T}" x2="{px:.2f}" y2="{MARGIN_T + frame.h}" '
            f'stroke="#1f5fbf" stroke-dasharray="4 3" stroke-width="0.8"><title>{escape(label)} {x:.4f}</title></line>'
        )
    return out


def _line_plot(curves: List[Spectrum], markers, title: str) -> str:
    xs = np.concatenate([c.detunings for c in curves] + [np.array([x for _, x in markers])])
    ymax = max(float(c.populations.max()) for c in curves)
    frame = _Frame(float(xs.min()), float(xs.max()), 0.0, ymax if ymax > 0 else 1.0)
    body = frame.axes("probe detuning (MHz)", "Rydberg population")
    palette = ("#000000", "#c0392b", "#2471a3", "#229954", "#7d3c98")
    for k, c in enumerate(curves):
        pts = " ".join(f"{frame.x(x):.2f},{frame.y(y):.2f}" for x, y in zip(c.detunings, c.populations))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{palette[k % len(palette)]}" stroke-width="1.2"/>')
    body.extend(_marker_lines(frame, markers))
    return _document(body, title)


def _heat_map(m: SpectrumMap, markers, title: str) -> str:
    dx = float(m.detunings[1] - m.detunings[0]) if m.detunings.size > 1 else 1.0
    dv = float(m.vs[1] - m.vs[0]) if m.vs.size > 1 else 1.0
    frame = _Frame(m.detunings[0] - dx / 2, m.detunings[-1] + dx / 2, m.vs[0] - dv / 2, m.vs[-1] + dv / 2)
    body = frame.axes("probe detuning (MHz)", "V (MHz)")
    top = float(m.populations.max()) or 1.0
    w = frame.w * dx / (frame.xhi - frame.xlo)
    h = frame.h * dv / (frame.yhi - frame.ylo)
    for i, v in enumerate(m.vs):
        y0 = frame.y(v + dv / 2)
        for k, x in enumerate(m.detunings):
            body.append(
                f'<rect class="cell" x="{frame.x(x - dx / 2):.2f}" y="{y0:.2f}" width="{w:.3f}" height="{h:.3f}" '
                f'fill="{_color(m.populations[i, k] / top)}"/>'
            )
    body.extend(_marker_lines(frame, markers))
    return _document(body, title)
