import numpy as np
import pytest

import faultfoc as ff
from faultfoc.analysis import SweepResult
from faultfoc.errors import ConfigError
from faultfoc.plotting import (MAX_POINTS, render_sweep, render_trace_panels,
                               trace_columns)

from conftest import base_config


@pytest.fixture(scope="module")
def short_trace(machine, controller_cfg):
    return ff.run(base_config(machine, controller_cfg, 0.01))


def test_trace_columns_cover_csv_names(short_trace):
    cols = trace_columns(short_trace)
    from faultfoc.simulator import Trace
    assert sorted(cols) == sorted(Trace.CSV_HEADER.split(","))
    n = len(short_trace)
    assert all(len(v) == n for v in cols.values())


def test_render_trace_panels_writes_each_panel(short_trace, tmp_path):
    paths = render_trace_panels(trace_columns(short_trace), tmp_path)
    assert [p.name for p in paths] == ["trace_dq.svg", "trace_abc.svg",
                                       "trace_speed.svg"]
    for p in paths:
        assert p.stat().st_size > 0
        assert p.read_text().lstrip().startswith("<?xml")


def test_render_is_byte_deterministic(short_trace, tmp_path):
    cols = trace_columns(short_trace)
    a = render_trace_panels(cols, tmp_path / "a", panels=("dq",))
    b = render_trace_panels(cols, tmp_path / "b", panels=("dq",))
    assert a[0].read_bytes() == b[0].read_bytes()


def test_render_rejects_unknown_panel(short_trace, tmp_path):
    with pytest.raises(ConfigError):
        render_trace_panels(trace_columns(short_trace), tmp_path,
                            panels=("dq", "hologram"))


def test_render_reports_missing_columns(tmp_path):
    data = {"t": np.arange(10.0)}
    with pytest.raises(ConfigError, match="i_d"):
        render_trace_panels(data, tmp_path, panels=("dq",))


def test_long_traces_are_thinned(tmp_path):
    n = 6 * MAX_POINTS
    data = {name: np.zeros(n)
            for name in ("t", "i_d", "i_q", "i_d_ref", "i_q_ref")}
    data["t"] = np.arange(n, dtype=float)
    paths = render_trace_panels(data, tmp_path, panels=("dq",))
    # a thinned figure of constant-zero lines stays small
    assert paths[0].stat().st_size < 2_000_000


def test_render_sweep_marks_minimum(tmp_path):
    res = SweepResult(np.array([150.0, 197.0, 210.0]),
                      np.array([0.2, 0.09, 0.14]))
    path = tmp_path / "sweep.svg"
    render_sweep(res, path)
    text = path.read_text()
    assert "minimum at 197" in text
    render_sweep(res, tmp_path / "again.svg")
    assert (tmp_path / "again.svg").read_bytes() == path.read_bytes()
