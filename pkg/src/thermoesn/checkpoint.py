"""Plain-text persistence for trained networks.

Format (line-oriented, whitespace-separated, ``%.17g`` floats so every
IEEE-754 double round-trips value-exactly):

    ESN v1
    Nx Nu Ny Nf
    W_IN
    <Nx lines of Nu values, row-major>
    W
    <one `row col value` line per nonzero, row-major order>
    W_OUT
    <Ny lines of Nf values, row-major>

A hybrid checkpoint appends:

    ROM
    n_modes beta tau x_f damping_c1 damping_c2
    dt full_dim
    PARTITION
    <one `row_start row_stop col_start col_stop` line per input block>

Lines starting with ``#`` (e.g. a trailing manifest line) are ignored on
read. ``load_checkpoint`` returns a :class:`~thermoesn.reservoir.Reservoir`
or a :class:`~thermoesn.hybrid.HybridEsn` depending on the ROM section.
"""
from __future__ import annotations

import os
from typing import Union

import numpy as np

from .errors import (DimensionMismatchError, InvalidArgumentError,
                     MissingFileError, UntrainedReadoutError)
from .galerkin import ModelParams
from .hybrid import HybridEsn, input_block_map
from .reservoir import Reservoir
from .series import FLOAT_FMT

MAGIC = "ESN v1"


def _fmt(value: float) -> str:
    return FLOAT_FMT % value


def _matrix_lines(mat: np.ndarray) -> list[str]:
    return [" ".join(_fmt(v) for v in row) for row in mat]


def save_checkpoint(path, model: Union[Reservoir, HybridEsn],
                    *, manifest: str | None = None) -> None:
    """Write a trained network to `path` (value-exact round trip)."""
    if isinstance(model, HybridEsn):
        reservoir, hybrid = model.reservoir, model
    else:
        reservoir, hybrid = model, None
    if reservoir.w_out is None:
        raise UntrainedReadoutError("cannot checkpoint an untrained readout")
    n_x = reservoir.n_reservoir
    n_u = reservoir.n_inputs
    n_y, n_f = reservoir.w_out.shape
    lines = [MAGIC, f"{n_x} {n_u} {n_y} {n_f}", "W_IN"]
    lines += _matrix_lines(reservoir.w_in)
    lines.append("W")
    rows, cols = np.nonzero(reservoir.w)
    for i, j in zip(rows, cols):
        lines.append(f"{i} {j} {_fmt(reservoir.w[i, j])}")
    lines.append("W_OUT")
    lines += _matrix_lines(reservoir.w_out)
    if hybrid is not None:
        p = hybrid.rom_params
        lines.append("ROM")
        lines.append(" ".join([str(p.n_modes)] + [
            _fmt(v) for v in (p.beta, p.tau, p.x_f,
                              p.damping_c1, p.damping_c2)]))
        lines.append(f"{_fmt(hybrid.dt)} {hybrid.full_dim}")
        lines.append("PARTITION")
        for row_range, col_range in input_block_map(n_x, hybrid.full_dim):
            lines.append(f"{row_range.start} {row_range.stop} "
                         f"{col_range.start} {col_range.stop}")
    if manifest:
        comment = manifest.rstrip("\n")
        if not comment.startswith("#"):
            comment = f"# {comment}"
        lines.append(comment)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


class _Cursor:
    """Sequential reader over non-comment lines."""

    def __init__(self, path):
        if not os.path.exists(path):
            raise MissingFileError(f"checkpoint not found: {path}")
        with open(path, encoding="ascii") as fh:
            self.lines = [ln.rstrip("\n") for ln in fh
                          if ln.strip() and not ln.startswith("#")]
        self.pos = 0

    def peek(self) -> str | None:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def take(self) -> str:
        line = self.peek()
        if line is None:
            raise InvalidArgumentError("checkpoint truncated")
        self.pos += 1
        return line


def _read_matrix(cur: _Cursor, n_rows: int, n_cols: int,
                 name: str) -> np.ndarray:
    mat = np.empty((n_rows, n_cols))
    for i in range(n_rows):
        parts = cur.take().split()
        if len(parts) != n_cols:
            raise DimensionMismatchError(
                f"{name} row {i} has {len(parts)} values, expected {n_cols}")
        mat[i] = [float(v) for v in parts]
    return mat


def load_checkpoint(path) -> Union[Reservoir, HybridEsn]:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    cur = _Cursor(path)
    if cur.take() != MAGIC:
        raise InvalidArgumentError(f"not a checkpoint file: {path}")
    try:
        n_x, n_u, n_y, n_f = (int(v) for v in cur.take().split())
    except ValueError as exc:
        raise InvalidArgumentError(f"bad checkpoint header: {exc}") from exc
    if cur.take() != "W_IN":
        raise InvalidArgumentError("expected W_IN section")
    w_in = _read_matrix(cur, n_x, n_u, "W_IN")
    if cur.take() != "W":
        raise InvalidArgumentError("expected W section")
    w = np.zeros((n_x, n_x))
    while cur.peek() is not None and cur.peek() != "W_OUT":
        parts = cur.take().split()
        if len(parts) != 3:
            raise InvalidArgumentError(f"bad W triplet: {' '.join(parts)}")
        i, j = int(parts[0]), int(parts[1])
        w[i, j] = float(parts[2])
    if cur.peek() is None:
        raise InvalidArgumentError("expected W_OUT section")
    cur.take()
    w_out = _read_matrix(cur, n_y, n_f, "W_OUT")
    reservoir = Reservoir(w_in=w_in, w=w, w_out=w_out)
    if cur.peek() is None:
        return reservoir
    if cur.take() != "ROM":
        raise InvalidArgumentError("unexpected trailing section")
    parts = cur.take().split()
    params = ModelParams(n_modes=int(parts[0]), beta=float(parts[1]),
                         tau=float(parts[2]), x_f=float(parts[3]),
                         damping_c1=float(parts[4]),
                         damping_c2=float(parts[5]))
    dt_line = cur.take().split()
    dt, full_dim = float(dt_line[0]), int(dt_line[1])
    if cur.take() != "PARTITION":
        raise InvalidArgumentError("expected PARTITION section")
    blocks = []
    while cur.peek() is not None:
        parts = cur.take().split()
        blocks.append(tuple(int(v) for v in parts))
    expected = [(r.start, r.stop, c.start, c.stop)
                for r, c in input_block_map(n_x, full_dim)]
    if blocks != expected:
        raise DimensionMismatchError(
            "partition map does not match the hybrid wiring contract")
    return HybridEsn(reservoir=reservoir, rom_params=params,
                     full_dim=full_dim, dt=dt)
