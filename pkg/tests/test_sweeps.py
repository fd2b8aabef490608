import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermostirap.discrete import DiscreteModelParams
from thermostirap.liouville import IntegratorConfig
from thermostirap.pulses import Pulse
from thermostirap.sweeps import (
    GRID_CSV,
    PRESET_NAMES,
    SweepAxis,
    SweepGrid,
    SweepSpec,
    _with_value,
    fmt,
    preset,
    read_grid_csv,
    run_sweep,
    sweep_fingerprint,
    write_csv,
)
from thermostirap.tcmps import ContinuumModelParams, TcmpsConfig

FAST_BASE = DiscreteModelParams(
    g=4.0, pump=Pulse(2.0, 1.0, 1.0, "P"), stokes=Pulse(2.0, 1.0, 1.0, "S")
)
FAST_INTEG = IntegratorConfig(
    sample_stride=10**9, dt_divisor=10.0, conservation_tol=1e-3
)


def fast_spec(engine="oracle", integrator=FAST_INTEG):
    return SweepSpec(
        name="mini",
        kind="discrete",
        axes=(
            SweepAxis("g", (2.0, 4.0)),
            SweepAxis("temperature", (0.0, 5.0)),
        ),
        base=FAST_BASE,
        integrator=integrator,
        engine=engine,
    )


def test_spec_validation():
    with pytest.raises(ValueError, match="at least 2"):
        SweepAxis("g", (1.0,))
    with pytest.raises(ValueError, match="kind"):
        SweepSpec("x", "other", (SweepAxis("g", (1, 2)),), FAST_BASE, FAST_INTEG)
    with pytest.raises(ValueError, match="engine"):
        fast_spec(engine="magic")
    with pytest.raises(ValueError, match="1 or 2"):
        SweepSpec(
            "x",
            "discrete",
            (SweepAxis("g", (1, 2)),) * 3,
            FAST_BASE,
            FAST_INTEG,
        )


def test_point_indexing_row_major():
    spec = fast_spec()
    assert spec.shape == (2, 2)
    assert spec.n_points == 4
    # last axis varies fastest
    assert spec.point_values(0) == {"g": 2.0, "temperature": 0.0}
    assert spec.point_values(1) == {"g": 2.0, "temperature": 5.0}
    assert spec.point_values(2) == {"g": 4.0, "temperature": 0.0}
    p = spec.point_params(3)
    assert p.g == 4.0 and p.temperature == 5.0


def test_with_value_knobs():
    p = _with_value(FAST_BASE, "omega", 3.5)
    assert p.pump.amplitude == 3.5 and p.stokes.amplitude == 3.5
    p = _with_value(FAST_BASE, "delay", 2.5)
    assert p.pump.delay == 2.5 and p.stokes.delay == 2.5
    assert p.pump.center == 1.25 and p.stokes.center == -1.25
    p = _with_value(FAST_BASE, "width", 0.7)
    assert p.pump.width == 0.7
    assert _with_value(FAST_BASE, "temperature", 2.0).temperature == 2.0
    with pytest.raises(ValueError, match="unknown sweep axis"):
        _with_value(FAST_BASE, "couplingg", 1.0)


def test_fingerprint_tracks_every_knob():
    spec = fast_spec()
    fp = sweep_fingerprint(spec)
    assert fp == sweep_fingerprint(fast_spec())  # reconstruction is stable
    import dataclasses

    others = [
        dataclasses.replace(spec, name="other"),
        dataclasses.replace(spec, engine="liouville"),
        dataclasses.replace(spec, axes=(spec.axes[0], SweepAxis("temperature", (0.0, 6.0)))),
        dataclasses.replace(spec, base=dataclasses.replace(FAST_BASE, g=5.0)),
        dataclasses.replace(
            spec, integrator=dataclasses.replace(FAST_INTEG, dt_divisor=12.0)
        ),
    ]
    assert len({fp, *(sweep_fingerprint(s) for s in others)}) == 6


def test_fmt_twelve_significant_digits():
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt(1e-9) == "1e-09"
    assert fmt(0.0) == "0"
    assert fmt(np.float64(2.5)) == "2.5"
    assert fmt(123456789012345.0) == "1.23456789012e+14"


@given(st.floats(min_value=-1e12, max_value=1e12, allow_nan=False))
def test_fmt_roundtrip_accuracy(x):
    back = float(fmt(x))
    assert back == pytest.approx(x, rel=1e-11, abs=1e-300)


def test_csv_roundtrip(tmp_path):
    rows = [(0.1, 2.0 / 3.0), (1e-30, -4.25e7)]
    path = tmp_path / "t.csv"
    write_csv(path, ["a", "b"], rows)
    text = path.read_text()
    assert text.splitlines()[0] == "a,b"
    assert "\r" not in text  # plain newlines, one record per line
    header, arr = read_grid_csv(path)
    assert header == ["a", "b"]
    assert arr == pytest.approx(np.array(rows), rel=1e-11)


def test_run_sweep_end_to_end(tmp_path):
    spec = fast_spec()
    grid = run_sweep(spec, tmp_path)
    assert grid.failures == {}
    assert grid.fidelity.shape == (2, 2)
    assert np.all((grid.fidelity >= 0.0) & (grid.fidelity <= 1.0))
    assert np.all(grid.fidelity + grid.fidelity1 <= 1.0 + 1e-9)

    header, arr = read_grid_csv(tmp_path / GRID_CSV)
    assert header == ["g", "temperature", "F", "F1"]
    assert arr.shape == (4, 4)
    assert arr[:, 0].tolist() == [2.0, 2.0, 4.0, 4.0]
    assert arr[:, 1].tolist() == [0.0, 5.0, 0.0, 5.0]
    assert arr[:, 2] == pytest.approx(grid.fidelity.ravel(), rel=1e-11)
    # one stored point per grid index
    stored = sorted(p.name for p in (tmp_path / ".points").iterdir())
    assert stored == [f"point_{i:04d}.json" for i in range(4)]

    from thermostirap.liouville import mixture_oracle

    direct = mixture_oracle(spec.point_params(3), spec.integrator)
    assert grid.fidelity[1, 1] == pytest.approx(direct.final_fidelity, abs=1e-12)


def test_resume_uses_stored_points_and_fingerprint_guard(tmp_path):
    spec = fast_spec()
    first = run_sweep(spec, tmp_path)
    point0 = tmp_path / ".points" / "point_0000.json"

    # poison the stored value; resume must trust it (same fingerprint)
    rec = json.loads(point0.read_text())
    rec["F"] = 0.123456
    point0.write_text(json.dumps(rec, sort_keys=True))
    resumed = run_sweep(spec, tmp_path, resume=True)
    assert resumed.fidelity[0, 0] == 0.123456

    # a stale fingerprint invalidates the point and it gets recomputed
    rec["fingerprint"] = "stale"
    point0.write_text(json.dumps(rec, sort_keys=True))
    recomputed = run_sweep(spec, tmp_path, resume=True)
    assert recomputed.fidelity[0, 0] == pytest.approx(first.fidelity[0, 0], abs=1e-12)

    # without resume everything is rerun from scratch
    fresh = run_sweep(spec, tmp_path, resume=False)
    assert np.array_equal(fresh.fidelity, first.fidelity)


def test_failing_points_are_quarantined(tmp_path):
    # a norm guard far below the integrator's roundoff floor trips every point
    spec = fast_spec(
        engine="liouville",
        integrator=IntegratorConfig(
            sample_stride=10**9, dt_divisor=10.0, conservation_tol=1e-18
        ),
    )
    grid = run_sweep(spec, tmp_path)
    assert set(grid.failures) == {0, 1, 2, 3}
    assert all("DivergenceError" in msg for msg in grid.failures.values())
    assert np.all(np.isnan(grid.fidelity))
    header, arr = read_grid_csv(tmp_path / GRID_CSV)
    assert np.all(np.isnan(arr[:, 2]))  # NaN cells survive the CSV roundtrip


def test_parallel_matches_serial_bytes(tmp_path):
    spec = fast_spec()
    run_sweep(spec, tmp_path / "serial", jobs=1)
    run_sweep(spec, tmp_path / "par", jobs=2)
    a = (tmp_path / "serial" / GRID_CSV).read_bytes()
    b = (tmp_path / "par" / GRID_CSV).read_bytes()
    assert a == b


def test_continuum_sweep_writes_traces(tmp_path):
    spec = SweepSpec(
        name="minic",
        kind="continuum",
        axes=(SweepAxis("temperature", (0.0, 0.8)),),
        base=ContinuumModelParams(
            pump=Pulse(1.0, 1.0, 1.0, "P"),
            stokes=Pulse(1.0, 1.0, 1.0, "S"),
            delta=0.5,
            n_chain=4,
            d_loc=3,
        ),
        integrator=TcmpsConfig(dt=0.05, t_max=3.0, chi_max=None, sample_stride=5),
        engine="tcmps",
    )
    grid = run_sweep(spec, tmp_path)
    assert grid.failures == {}
    assert np.all((grid.fidelity > 0.0) & (grid.fidelity < 1.0))
    names = sorted(p.name for p in (tmp_path / "traces").iterdir())
    assert names == ["temperature0.8.csv", "temperature0.csv"]
    header, arr = read_grid_csv(tmp_path / "traces" / "temperature0.csv")
    assert header == ["t", "F1", "F2"]
    assert arr[0, 1] == pytest.approx(1.0)
    assert arr[-1, 2] == pytest.approx(grid.fidelity[0], abs=1e-9)


def test_presets_construct():
    for name in PRESET_NAMES:
        spec = preset(name)
        assert spec.name == name
    assert preset("fig2a").shape == (9, 9)
    assert preset("fig2a", "paper").shape == (33, 33)
    assert preset("fig2c").axes[0].values[0] == pytest.approx(1.0)
    assert preset("fig2c").axes[0].values[-1] == pytest.approx(8.0)
    assert preset("fig3").kind == "continuum"
    assert preset("fig3").engine == "tcmps"
    assert preset("fig3", "paper").base.n_chain == 50
    with pytest.raises(ValueError, match="preset"):
        preset("fig9")
    with pytest.raises(ValueError, match="scale"):
        preset("fig2a", "huge")
