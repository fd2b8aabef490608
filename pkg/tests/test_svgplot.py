import xml.etree.ElementTree as ET

import numpy as np
import pytest

from thermostirap.discrete import DiscreteModelParams
from thermostirap.liouville import IntegratorConfig, RunResult
from thermostirap.svgplot import (
    _color,
    emit_plots,
    heatmap_svg,
    line_svg,
    run_result_svg,
    timeseries_svg,
)
from thermostirap.sweeps import SweepAxis, SweepGrid, SweepSpec


def grid2d(fid=None):
    spec = SweepSpec(
        name="demo",
        kind="discrete",
        axes=(SweepAxis("g", (1.0, 2.0)), SweepAxis("temperature", (0.0, 5.0, 10.0))),
        base=DiscreteModelParams(),
        integrator=IntegratorConfig(),
    )
    if fid is None:
        fid = np.array([[0.1, 0.5, 0.9], [0.2, 0.6, 1.0]])
    return SweepGrid(spec=spec, fidelity=fid, fidelity1=1.0 - fid, failures={})


def grid1d():
    spec = SweepSpec(
        name="line",
        kind="discrete",
        axes=(SweepAxis("temperature", (0.0, 1.0, 2.0, 3.0)),),
        base=DiscreteModelParams(),
        integrator=IntegratorConfig(),
    )
    fid = np.array([0.9, 0.7, 0.5, np.nan])
    return SweepGrid(spec=spec, fidelity=fid, fidelity1=0.5 * fid, failures={3: "x"})


def run_result():
    t = np.linspace(-3.0, 3.0, 31)
    f1 = 0.5 + 0.5 * np.cos(t)
    return RunResult(
        times=t, f1=f1, f2=1.0 - f1, final_fidelity=float(1.0 - f1[-1]),
        diagnostics={}, meta={},
    )


def test_color_ramp():
    assert _color(0.0) == "#440154"
    assert _color(1.0) == "#fde725"
    assert _color(-3.0) == _color(0.0)  # clamped
    assert _color(7.0) == _color(1.0)
    assert _color(float("nan")) == "#999999"
    # monotone green channel along the ramp
    greens = [int(_color(v)[3:5], 16) for v in np.linspace(0, 1, 11)]
    assert greens == sorted(greens)


def test_heatmap_well_formed_and_deterministic():
    s = heatmap_svg(grid2d())
    assert s == heatmap_svg(grid2d())
    ET.fromstring(s)  # valid XML
    assert "demo: F over (g, temperature)" in s
    # one cell per grid point plus a 64-strip colorbar
    assert s.count("<rect") >= 6 + 64
    assert "temperature" in s and ">g<" in s


def test_heatmap_marks_missing_points():
    fid = np.array([[0.1, np.nan, 0.9], [0.2, 0.6, 1.0]])
    s = heatmap_svg(grid2d(fid))
    assert '#999999' in s


def test_line_plot_skips_nan_and_labels_series():
    s = line_svg(grid1d())
    ET.fromstring(s)
    assert "F2 (squares)" in s and "F1 (circles)" in s
    assert s.count("<circle") == 3  # NaN point dropped
    assert s.count("<polyline") == 2


def test_timeseries():
    t = np.linspace(0, 1, 5)
    runs = [("T=0", t, t * 0.0 + 1.0, t * 0.0), ("T=1", t, 1.0 - t, t)]
    s = timeseries_svg(runs, title="demo traces")
    ET.fromstring(s)
    assert s.count("<polyline") == 4  # F1+F2 per run
    assert "T=0" in s and "T=1" in s and "demo traces" in s
    with pytest.raises(ValueError, match="no traces"):
        timeseries_svg([])


def test_run_result_svg():
    s = run_result_svg(run_result())
    ET.fromstring(s)
    assert "F1 solid, F2 dashed" in s
    empty = RunResult(
        times=np.array([]), f1=np.array([]), f2=np.array([]),
        final_fidelity=0.0, diagnostics={}, meta={},
    )
    with pytest.raises(ValueError, match="empty"):
        run_result_svg(empty)


def test_emit_plots_dispatch(tmp_path):
    (p2,) = emit_plots(grid2d(), tmp_path)
    assert p2 == tmp_path / "plots" / "demo_heatmap.svg"
    (p1,) = emit_plots(grid1d(), tmp_path)
    assert p1 == tmp_path / "plots" / "line_lines.svg"
    (pr,) = emit_plots(run_result(), tmp_path)
    assert pr == tmp_path / "plots" / "traces.svg"
    for p in (p2, p1, pr):
        ET.fromstring(p.read_text())
    with pytest.raises(TypeError, match="cannot plot"):
        emit_plots({"not": "plottable"}, tmp_path)
    hollow = grid2d()
    hollow.fidelity = np.zeros((0, 0))
    with pytest.raises(ValueError, match="empty sweep grid"):
        emit_plots(hollow, tmp_path)
