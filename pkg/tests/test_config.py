"""Configuration parsing: key table, validation, overrides, manifests."""

from __future__ import annotations

import re

import pytest

from thermoesn.config import (
    ExperimentConfig,
    apply_overrides,
    canonical_text,
    config_hash,
    manifest_line,
    parse_config,
)
from thermoesn.errors import ConfigError
from thermoesn.version import VERSION


def _write(tmp_path, text: str):
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return path


def test_empty_file_gives_defaults(tmp_path):
    config = parse_config(_write(tmp_path, ""))
    assert config == ExperimentConfig()


def test_comments_and_blank_lines_ignored(tmp_path):
    config = parse_config(_write(tmp_path, "\n# a comment\n\nmodel.beta = 6.5\n"))
    assert config.beta == 6.5


def test_values_land_in_sections(tmp_path):
    text = """
model.n_modes = 4
model.tau = 0.3
esn.sigma_in = 0.03
esn.rho = 0.3
run.mode = hesn
run.rom_ng = 2
run.sweep_ng = 1, 2, 4
hybrid.validated = false
grid.sigma_in = 0.01, 0.03
paths.data = data/truth.csv
"""
    config = parse_config(_write(tmp_path, text))
    assert config.n_modes == 4 and config.tau == 0.3
    assert config.sigma_in == 0.03 and config.rho == 0.3
    assert config.mode == "hesn" and config.rom_ng == 2
    assert config.sweep_ng == (1, 2, 4)
    assert config.validated is False
    assert config.grid_sigma_in == (0.01, 0.03)
    assert config.data_path == "data/truth.csv"


def test_unknown_key_reports_line_number(tmp_path):
    path = _write(tmp_path, "model.beta = 7.0\nmodel.bogus = 1\n")
    with pytest.raises(ConfigError, match=r"exp\.cfg:2"):
        parse_config(path)


def test_range_error_names_key(tmp_path):
    path = _write(tmp_path, "model.beta = -1\n")
    with pytest.raises(ConfigError, match=r"model\.beta"):
        parse_config(path)


def test_type_error_reports_line(tmp_path):
    path = _write(tmp_path, "\nesn.washout = soon\n")
    with pytest.raises(ConfigError, match=r"exp\.cfg:2"):
        parse_config(path)


def test_missing_equals_is_fatal(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(_write(tmp_path, "model.beta 7.0\n"))


def test_overrides_beat_file_values(tmp_path):
    config = parse_config(_write(tmp_path, "esn.seed = 3\nmodel.beta = 6.0\n"))
    config = apply_overrides(config, [("esn.seed", "7")])
    assert config.seed == 7
    assert config.beta == 6.0


def test_override_errors_name_the_flag():
    with pytest.raises(ConfigError, match="esn.seed"):
        apply_overrides(ExperimentConfig(), [("esn.seed", "many")])


def test_cross_key_validation():
    with pytest.raises(ConfigError, match="rom_ng"):
        ExperimentConfig(rom_ng=11).validate()
    with pytest.raises(ConfigError, match="tau"):
        ExperimentConfig(tau=0.005).validate()
    with pytest.raises(ConfigError, match="threshold"):
        ExperimentConfig(accept_threshold=0.5, valid_threshold=0.1).validate()


def test_mode_dependent_spectral_radius():
    config = ExperimentConfig()
    assert config.effective_rho == 0.1
    assert ExperimentConfig(mode="hesn").effective_rho == 0.3
    assert ExperimentConfig(mode="hesn", rho=0.7).effective_rho == 0.7


def test_esn_config_widths():
    config = ExperimentConfig()
    assert config.esn_config("esn").n_inputs == 20
    assert config.esn_config("hesn").n_inputs == 40
    assert config.esn_config("hesn").spectral_radius == 0.3
    with pytest.raises(ConfigError):
        config.esn_config("rom")


def test_canonical_hash_is_stable_and_sensitive():
    a = ExperimentConfig()
    b = ExperimentConfig()
    assert canonical_text(a) == canonical_text(b)
    assert config_hash(a) == config_hash(b)
    assert re.fullmatch(r"[0-9a-f]{12}", config_hash(a))
    assert config_hash(ExperimentConfig(beta=6.0)) != config_hash(a)


def test_manifest_line_format():
    config = ExperimentConfig(seed=5)
    line = manifest_line("evaluate", config)
    match = re.fullmatch(
        r"# manifest: evaluate, ([0-9a-f]{12}), 5, (.+)", line)
    assert match
    assert match.group(1) == config_hash(config)
    assert match.group(2) == VERSION
