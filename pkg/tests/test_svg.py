import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from rydeit.errors import EmptyData
from rydeit.model import paper_params
from rydeit.spectra import Spectrum, detuning_grid, predict_for
from rydeit.svg import SpectrumMap, render_svg

NS = "{http://www.w3.org/2000/svg}"


def parse(text):
    return ET.fromstring(text)


def test_two_point_spectrum():
    root = parse(render_svg(Spectrum([0.0, 0.5], [0.1, 0.2], 0.0)))
    lines = root.findall(f".//{NS}polyline")
    assert len(lines) == 1
    assert len(lines[0].get("points").split()) == 2


def test_two_atom_markers():
    pred = predict_for(paper_params(), 1.5)
    x = detuning_grid(-2, 2, 0.5)
    svg = render_svg(Spectrum(x, np.zeros_like(x), 1.5), pred.table())
    markers = [e for e in parse(svg).iter(f"{NS}line") if e.get("class") == "marker"]
    assert len(markers) == 11


def test_heat_map_cells():
    m = SpectrumMap(detuning_grid(-1, 1, 0.25), [0.0, 0.5, 1.0], np.random.default_rng(0).random((3, 9)))
    cells = [e for e in parse(render_svg(m)).iter(f"{NS}rect") if e.get("class") == "cell"]
    assert len(cells) == 27
    fills = {c.get("fill") for c in cells}
    assert all(re.fullmatch(r"#[0-9a-f]{6}", f) for f in fills)


def test_axis_ticks_present():
    x = detuning_grid(-2, 2, 0.1)
    svg = render_svg(Spectrum(x, np.exp(-x**2), 0.0), title="a < b")
    root = parse(svg)
    texts = [t.text for t in root.iter(f"{NS}text")]
    assert "probe detuning (MHz)" in texts
    assert any(t in texts for t in ("-2", "-2.0"))
    assert root.find(f"{NS}title").text == "a < b"


def test_empty_inputs():
    with pytest.raises(EmptyData):
        render_svg(Spectrum([], [], 0.0))
    with pytest.raises(EmptyData):
        render_svg([])
    with pytest.raises(EmptyData):
        render_svg(SpectrumMap(np.array([]), np.array([]), np.zeros((0, 0))))


def test_map_shape_checked():
    with pytest.raises(ValueError):
        SpectrumMap([0, 1], [0], np.zeros((2, 2)))
