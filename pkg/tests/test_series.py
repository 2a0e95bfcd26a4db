"""Time-series container and delimited-text round trips."""

from __future__ import annotations

import numpy as np
import pytest

from thermoesn.errors import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidArgumentError,
    MissingFileError,
)
from thermoesn.series import (
    TimeSeries,
    read_csv_columns,
    read_state_csv,
    state_header,
    write_state_csv,
)


def _random_series(n: int = 40, modes: int = 3, seed: int = 0) -> TimeSeries:
    rng = np.random.default_rng(seed)
    return TimeSeries(dt=0.01, t0=5.0,
                      states=rng.standard_normal((n, 2 * modes)))


def test_timeseries_validation():
    with pytest.raises(InvalidArgumentError):
        TimeSeries(dt=0.0, t0=0.0, states=np.zeros((3, 2)))
    with pytest.raises(DimensionMismatchError):
        TimeSeries(dt=0.1, t0=0.0, states=np.zeros(5))


def test_timeseries_window_and_times():
    series = _random_series()
    window = series.window(10, 25)
    assert window.n_samples == 15
    assert window.t0 == pytest.approx(series.t0 + 10 * series.dt)
    np.testing.assert_array_equal(window.states, series.states[10:25])
    np.testing.assert_allclose(series.times,
                               series.t0 + np.arange(40) * series.dt)
    np.testing.assert_array_equal(series.column(2), series.states[:, 2])


def test_state_header_layout():
    assert state_header(2) == ["t", "eta_1", "eta_2", "mu_1", "mu_2"]
    assert state_header(1, with_u_f=True) == ["t", "eta_1", "mu_1", "u_f"]


def test_state_csv_round_trip_is_value_exact(tmp_path):
    series = _random_series(seed=3)
    path = tmp_path / "series.csv"
    write_state_csv(path, series)
    back = read_state_csv(path)
    # 17 significant digits round-trip doubles exactly.
    np.testing.assert_array_equal(back.states, series.states)
    assert back.dt == series.dt
    assert back.t0 == series.t0


def test_state_csv_manifest_comment(tmp_path):
    series = _random_series()
    path = tmp_path / "series.csv"
    manifest = "# manifest: simulate, abcdef123456, 0, 1.0"
    write_state_csv(path, series, manifest=manifest)
    lines = path.read_text().splitlines()
    assert lines[0] == manifest
    assert lines[1].startswith("t,eta_1")
    back = read_state_csv(path)
    np.testing.assert_array_equal(back.states, series.states)


def test_state_csv_with_u_f_column(tmp_path):
    series = _random_series(modes=2)
    u_f = np.arange(series.n_samples, dtype=float)
    path = tmp_path / "series.csv"
    write_state_csv(path, series, u_f=u_f)
    header, columns = read_csv_columns(path)
    assert header[-1] == "u_f"
    np.testing.assert_array_equal(columns[:, -1], u_f)
    # The state reader ignores the extra diagnostic column.
    back = read_state_csv(path)
    assert back.dim == 4


def test_read_missing_file():
    with pytest.raises(MissingFileError):
        read_state_csv("/nonexistent/series.csv")


def test_read_rejects_malformed_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,eta_1,mu_1\n0.0,1.0\n")
    with pytest.raises(DimensionMismatchError):
        read_state_csv(path)
    empty = tmp_path / "empty.csv"
    empty.write_text("t,eta_1,mu_1\n")
    with pytest.raises(InsufficientDataError):
        read_state_csv(empty)
