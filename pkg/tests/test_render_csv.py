import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from laminar import render
from laminar.csvio import read_rows, spectrum_csv, sweep_csv, write_rows, edges_csv
from laminar.errors import EmptyData
from laminar.stability import SweepCell, SweepGrid, StabilityVerdict, log_axis, sweep_regions

SVG = "{http://www.w3.org/2000/svg}"


def _verdict(exists, conv):
    return StabilityVerdict(-1.0 if exists else 1.0, exists, True, (-0.5, -0.9), (conv, conv), True, 0.0, [])


def test_one_by_one_grid():
    grid = SweepGrid(("w1_sig1", (0.5,)), ("w1_sig2", (0.1,)), [[SweepCell(0.5, 0.1, _verdict(True, True))]])
    svg = render.region_map_svg(grid)
    root = ET.fromstring(svg)
    plot = [r for r in root.iter(SVG + "rect") if r.get("fill") == render.GREEN and r.get("width") != "14"]
    assert len(plot) == 1
    assert "convergence" in svg and "existence" in svg
    assert "colour scale" in svg


def test_region_map_deterministic(lin, example_graphs):
    ax = log_axis(0.01, 2.0, 8)
    a = render.region_map_svg(sweep_regions(lin, example_graphs, ax, ax))
    b = render.region_map_svg(sweep_regions(lin, example_graphs, ax, ax, threads=3))
    assert a == b
    ET.fromstring(a)


def test_existence_contains_convergence(lin, example_graphs):
    ax = log_axis(0.01, 2.0, 12)
    grid = sweep_regions(lin, example_graphs, ax, ax)
    flags = [(c.verdict.exists, c.verdict.converges) for row in grid.cells for c in row]
    assert any(c for _, c in flags) and any(e and not c for e, c in flags)
    assert all(e for e, c in flags if c)
    svg = render.region_map_svg(grid)
    assert render.GREEN in svg and render.GREY in svg


def test_failed_cell_colour():
    grid = SweepGrid(("a", (1.0,)), ("b", (1.0,)), [[SweepCell(1.0, 1.0, None, "Boom: x")]])
    assert f'fill="{render.FAIL}"' in render.region_map_svg(grid)


def test_markers():
    cells = [[SweepCell(1.0, 1.0, _verdict(True, True), sim_class=s)] for s in ("Laminar", "Homogeneous", "Other")]
    grid = SweepGrid(("a", (1.0, 2.0, 3.0)), ("b", (1.0,)), cells)
    svg = render.region_map_svg(grid)
    assert svg.count("<circle") == 2 and svg.count("<path") == 1


def test_homogeneous_snapshot_identical_fill():
    rows = [(i, 1 if i < 5 else 2, 0.18) for i in range(10)]
    svg = render.tissue_svg(rows, 0.18)
    fills = re.findall(r'<circle[^>]*fill="(#[0-9a-f]{6})"', svg)
    assert len(fills) == 10 and len(set(fills)) == 1 and fills[0] == "#ffffff"


def test_laminar_snapshot_two_colours():
    rows = [(i, 1 if i < 5 else 2, 0.3 if i < 5 else 0.06) for i in range(10)]
    svg = render.tissue_svg(rows, 0.18)
    fills = re.findall(r'<circle[^>]*fill="(#[0-9a-f]{6})"', svg)
    assert len(set(fills[:5])) == 1 and len(set(fills[5:])) == 1 and fills[0] != fills[5]
    assert render.tissue_svg(rows, 0.18) == svg
    ET.fromstring(svg)


def test_spectrum_svg():
    rows = [(1, -0.9, True), (2, 0.1, False), (3, 1.0, False)]
    svg = render.spectrum_svg(rows)
    assert svg.count('fill="#d62728"') == 1
    ET.fromstring(svg)


def test_empty_inputs():
    with pytest.raises(EmptyData):
        render.tissue_svg([], 0.0)
    with pytest.raises(EmptyData):
        render.spectrum_svg([])
    with pytest.raises(EmptyData):
        render.region_map_svg(SweepGrid(("a", ()), ("b", ()), []))


def test_csv_round_trips(lin, example_graphs):
    ax = log_axis(0.05, 1.5, 3)
    grid = sweep_regions(lin, example_graphs, ax, ax)
    header, rows = read_rows(sweep_csv(grid))
    assert tuple(header) == ("w1_sig1", "w1_sig2", "margin", "exists", "converges", "sim_class")
    orig = grid.rows()
    for r, o in zip(rows, orig):
        assert np.allclose(r[:3], o[:3], rtol=1e-11)
        assert r[3:] == o[3:]
    g = example_graphs[1]
    header, rows = read_rows(edges_csv(g))
    assert tuple(rows) == g.edges
    srows = [(1, -0.25, True), (2, 1.0, False)]
    assert read_rows(spectrum_csv(srows))[1] == srows


def test_write_rows_formats():
    text = write_rows(("a", "b", "c", "d"), [(1, 0.1 + 0.2, True, None)])
    assert text.splitlines()[1] == "1,0.3,true,"
