"""Checkpoint persistence: plain-text format and value-exact round trips."""

from __future__ import annotations

import dataclasses
import functools
import tempfile
from pathlib import Path

import numpy as np
import pytest

from thermoesn.checkpoint import load_checkpoint, save_checkpoint
from thermoesn.errors import (
    InvalidArgumentError,
    MissingFileError,
    UntrainedReadoutError,
)
from thermoesn.galerkin import delay_steps, simulate
from thermoesn.hybrid import HybridEsn, hesn_predict, hesn_train
from thermoesn.reservoir import EsnConfig, init_reservoir, predict_closed_loop, train_esn

from conftest import CHAOTIC, HESN_CFG


@functools.lru_cache(maxsize=1)
def _train_data():
    series, _ = simulate(CHAOTIC, duration=6.0)
    return series


@functools.lru_cache(maxsize=1)
def _trained_esn():
    return train_esn(_train_data(), EsnConfig(seed=1))[0]


@functools.lru_cache(maxsize=1)
def _trained_hesn():
    rom = dataclasses.replace(CHAOTIC, n_modes=1)
    return hesn_train(_train_data(), dataclasses.replace(HESN_CFG, seed=1),
                      rom, state_noise=0.0)[0]


def test_esn_roundtrip_bit_exact():
    model = _trained_esn()
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.esn"
        save_checkpoint(path, model)
        loaded = load_checkpoint(path)
    np.testing.assert_array_equal(loaded.w_in, model.w_in)
    np.testing.assert_array_equal(loaded.w, model.w)
    np.testing.assert_array_equal(loaded.w_out, model.w_out)
    data = _train_data()
    warm = data.window(data.n_samples - 100, data.n_samples)
    np.testing.assert_array_equal(
        predict_closed_loop(loaded, warm, 25).states,
        predict_closed_loop(model, warm, 25).states)


def test_esn_checkpoint_format(tmp_path):
    model = _trained_esn()
    path = tmp_path / "model.esn"
    save_checkpoint(path, model)
    lines = path.read_text().splitlines()
    assert lines[0] == "ESN v1"
    assert lines[1].split() == ["100", "20", "20", "100"]
    assert "W_IN" in lines and "W" in lines and "W_OUT" in lines
    # The adjacency is stored sparsely, one `row col value` triplet per
    # nonzero entry.
    w_start = lines.index("W") + 1
    w_end = lines.index("W_OUT")
    triplets = lines[w_start:w_end]
    assert len(triplets) == int(np.count_nonzero(model.w))
    row, col, value = triplets[0].split()
    assert model.w[int(row), int(col)] == float(value)


def test_hesn_roundtrip_with_rom_section(tmp_path):
    model = _trained_hesn()
    path = tmp_path / "model.esn"
    save_checkpoint(path, model)
    text = path.read_text()
    assert "ROM" in text.splitlines()
    assert "PARTITION" in text.splitlines()
    loaded = load_checkpoint(path)
    assert isinstance(loaded, HybridEsn)
    assert loaded.rom_params == model.rom_params
    assert loaded.full_dim == model.full_dim
    assert loaded.dt == model.dt
    np.testing.assert_array_equal(loaded.reservoir.w_out,
                                  model.reservoir.w_out)
    data = _train_data()
    warm_n = delay_steps(model.rom_params.tau, data.dt) + 100
    warm = data.window(data.n_samples - warm_n, data.n_samples)
    np.testing.assert_array_equal(hesn_predict(loaded, warm, 25).states,
                                  hesn_predict(model, warm, 25).states)


def test_checkpoint_manifest_comment_ignored(tmp_path):
    model = _trained_esn()
    path = tmp_path / "model.esn"
    manifest = "# manifest: train, 123456789abc, 1, 1.0"
    save_checkpoint(path, model, manifest=manifest)
    lines = path.read_text().splitlines()
    assert lines[0] == "ESN v1"  # the magic stays first for format sniffing
    assert lines[-1] == manifest  # embedded verbatim, exactly once
    assert sum("manifest" in line for line in lines) == 1
    loaded = load_checkpoint(path)
    np.testing.assert_array_equal(loaded.w_out, model.w_out)


def test_untrained_model_cannot_checkpoint(tmp_path):
    reservoir = init_reservoir(EsnConfig(seed=0))
    with pytest.raises(UntrainedReadoutError):
        save_checkpoint(tmp_path / "model.esn", reservoir)


def test_missing_checkpoint(tmp_path):
    with pytest.raises(MissingFileError):
        load_checkpoint(tmp_path / "absent.esn")


def test_corrupt_checkpoint_rejected(tmp_path):
    path = tmp_path / "bad.esn"
    path.write_text("NOT A CHECKPOINT\n")
    with pytest.raises(InvalidArgumentError):
        load_checkpoint(path)
    truncated = tmp_path / "short.esn"
    good = tmp_path / "good.esn"
    save_checkpoint(good, _trained_esn())
    lines = good.read_text().splitlines()
    truncated.write_text("\n".join(lines[: len(lines) // 2]))
    with pytest.raises(InvalidArgumentError):
        load_checkpoint(truncated)
