"""Uniformly sampled multivariate time series and its CSV form.

The CSV layout is `t,eta_1..eta_Ng,mu_1..mu_Ng[,u_f]`, one row per sample,
values written with 17 significant digits so a read-back is value-exact.
Lines starting with `#` (e.g. the manifest line) are ignored on read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidArgumentError,
    MissingFileError,
)

FLOAT_FMT = "%.17g"


@dataclass
class TimeSeries:
    """States sampled every `dt` starting at `t0`; row k is the state at
    t0 + k*dt, packed as (eta_1..eta_Ng, mu_1..mu_Ng)."""

    dt: float
    t0: float
    states: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2:
            raise DimensionMismatchError("states must be a 2-d array (n_samples, dim)")
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")

    @property
    def n_samples(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    @property
    def t_end(self) -> float:
        """Time of the last sample."""
        return self.t0 + self.dt * (self.n_samples - 1)

    def window(self, start: int, stop: int) -> "TimeSeries":
        """Sub-series of sample indices [start, stop), sharing storage."""
        if not 0 <= start < stop <= self.n_samples:
            raise InsufficientDataError(
                f"window [{start}, {stop}) out of range for {self.n_samples} samples"
            )
        return TimeSeries(self.dt, self.t0 + start * self.dt, self.states[start:stop])

    def column(self, index: int) -> np.ndarray:
        return self.states[:, index]


def state_header(n_modes: int, with_u_f: bool = False) -> list[str]:
    names = ["t"]
    names += [f"eta_{j}" for j in range(1, n_modes + 1)]
    names += [f"mu_{j}" for j in range(1, n_modes + 1)]
    if with_u_f:
        names.append("u_f")
    return names


def write_state_csv(
    path,
    series: TimeSeries,
    *,
    u_f: np.ndarray | None = None,
    manifest: str | None = None,
) -> None:
    """Write a state time series; `u_f` appends the flame-velocity column."""
    if series.dim % 2 != 0:
        raise DimensionMismatchError("state dimension must be even (eta and mu blocks)")
    n_modes = series.dim // 2
    columns = [series.times, *series.states.T]
    header = state_header(n_modes, with_u_f=u_f is not None)
    if u_f is not None:
        if len(u_f) != series.n_samples:
            raise DimensionMismatchError("u_f length must match the series")
        columns.append(np.asarray(u_f, dtype=float))
    write_csv(path, header, np.column_stack(columns), manifest=manifest)


def write_csv(path, header: list[str], rows: np.ndarray, *, manifest: str | None = None) -> None:
    """Comma-separated table with full double precision and optional manifest line."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    with open(path, "w") as fh:
        if manifest is not None:
            fh.write(manifest.rstrip("\n") + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")


def read_csv_columns(path) -> tuple[list[str], np.ndarray]:
    """Read a CSV written by write_csv; returns (header, data) skipping # lines."""
    try:
        fh = open(path)
    except OSError as exc:
        raise MissingFileError(f"cannot read {path}: {exc}") from exc
    with fh:
        header: list[str] | None = None
        rows: list[list[float]] = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [name.strip() for name in line.split(",")]
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if header is None or not rows:
        raise InsufficientDataError(f"{path} contains no data rows")
    data = np.asarray(rows, dtype=float)
    if data.shape[1] != len(header):
        raise DimensionMismatchError(f"{path}: row width does not match header")
    return header, data


def read_state_csv(path) -> TimeSeries:
    """Read a state CSV back into a TimeSeries (the u_f column is dropped)."""
    header, data = read_csv_columns(path)
    if header[0] != "t":
        raise DimensionMismatchError(f"{path}: first column must be 't'")
    state_cols = [i for i, name in enumerate(header) if name.startswith(("eta_", "mu_"))]
    if not state_cols:
        raise DimensionMismatchError(f"{path}: no eta_*/mu_* state columns found")
    t = data[:, 0]
    if len(t) < 2:
        raise InsufficientDataError(f"{path}: need at least two samples")
    # snap the reconstructed step to 12 decimals so a written series loads
    # with exactly the step it was produced with
    dt = round((t[-1] - t[0]) / (len(t) - 1), 12)
    if dt <= 0:
        raise InvalidArgumentError(f"{path}: sample times must be increasing")
    expected = t[0] + dt * np.arange(len(t))
    if np.max(np.abs(t - expected)) > 1e-9 * max(1.0, np.max(np.abs(t))):
        raise InvalidArgumentError(f"{path}: sample times are not uniformly spaced")
    return TimeSeries(dt=float(dt), t0=float(t[0]), states=data[:, state_cols])
