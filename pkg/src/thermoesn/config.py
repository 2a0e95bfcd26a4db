"""Flat `key = value` experiment configuration with typed, validated keys.

A config file is plain text: one assignment per line, `#` comments, blank
lines ignored. Keys are dotted into sections — `model.` (the physical
system), `esn.` (network hyperparameters), `run.` (experiment layout and
execution), `hybrid.` (the validated training loop), `grid.` (search axes),
and `paths.` (artifact locations). An empty file is a complete
configuration: every key has a default, and the defaults are the values the
experiments were designed around (sigma_in 0.2, density 0.03, gamma 1e-7,
dt 0.01, 5000 training samples, 100 neurons, beta 7.0, tau 0.2, x_f 0.2,
10 modes). The network's spectral-radius default depends on the mode — 0.1
for a plain network, 0.3 for the hybrid — so `esn.rho` is only pinned when
set explicitly.

Unknown keys, malformed values, and out-of-range values are all fatal and
cite the offending line. Command-line overrides pass through the same typed
table (`apply_overrides`), so precedence is: flag beats file beats default.

`config_hash` fingerprints the resolved configuration; every artifact the
harness writes embeds it in a manifest line so outputs can be traced back
to the exact settings (and seed) that produced them.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import ConfigError, MissingFileError
from .galerkin import ModelParams
from .reservoir import EsnConfig
from .version import VERSION

MODES = ("esn", "hesn", "rom")

ESN_RHO_DEFAULT = 0.1
HESN_RHO_DEFAULT = 0.3


@dataclass
class ExperimentConfig:
    """Resolved settings of one harness invocation."""

    # model.*
    n_modes: int = 10
    beta: float = 7.0
    tau: float = 0.2
    x_f: float = 0.2
    damping_c1: float = 0.1
    damping_c2: float = 0.06
    # esn.*
    n_reservoir: int = 100
    sigma_in: float = 0.2
    rho: Optional[float] = None  # None -> mode-dependent default
    density: float = 0.03
    gamma: float = 1e-7
    washout: int = 100
    seed: int = 0
    # run.*
    mode: str = "esn"
    rom_ng: int = 1
    dt: float = 0.01
    train_samples: int = 5000
    horizon: float = 250.0
    transient: float = 200.0
    validation_duration: float = 50.0
    reference_duration: float = 1000.0
    duration: float = 300.0
    discard: float = 0.0
    n_seeds: int = 16
    workers: int = 1
    lyapunov_duration: float = 1000.0
    sweep_ng: tuple[int, ...] = (1, 4, 10)
    # hybrid.*
    validated: bool = True
    candidates: int = 12
    accept_threshold: float = 0.02
    valid_threshold: float = 0.12
    state_noise: float = 3e-3
    # grid.*
    grid_sigma_in: tuple[float, ...] = ()
    grid_rho: tuple[float, ...] = ()
    grid_gamma: tuple[float, ...] = ()
    # paths.*
    data_path: str = "truth.csv"
    checkpoint_path: str = "model.esn"
    prediction_path: str = "prediction.csv"
    report_dir: str = "reports"

    @property
    def effective_rho(self) -> float:
        if self.rho is not None:
            return self.rho
        return HESN_RHO_DEFAULT if self.mode == "hesn" else ESN_RHO_DEFAULT

    @property
    def full_dim(self) -> int:
        return 2 * self.n_modes

    def model_params(self) -> ModelParams:
        return ModelParams(n_modes=self.n_modes, beta=self.beta, tau=self.tau,
                           x_f=self.x_f, damping_c1=self.damping_c1,
                           damping_c2=self.damping_c2)

    def rom_params(self) -> ModelParams:
        return dataclasses.replace(self.model_params(), n_modes=self.rom_ng)

    def esn_config(self, mode: Optional[str] = None) -> EsnConfig:
        mode = mode or self.mode
        if mode not in ("esn", "hesn"):
            raise ConfigError(f"no network configuration for mode '{mode}'")
        n_in = self.full_dim * (2 if mode == "hesn" else 1)
        rho = self.rho
        if rho is None:
            rho = HESN_RHO_DEFAULT if mode == "hesn" else ESN_RHO_DEFAULT
        return EsnConfig(n_reservoir=self.n_reservoir, sigma_in=self.sigma_in,
                         spectral_radius=rho, density=self.density,
                         gamma=self.gamma, washout=self.washout,
                         seed=self.seed, n_inputs=n_in,
                         n_outputs=self.full_dim)

    def experiment_setup(self):
        from .evaluation import ExperimentSetup

        return ExperimentSetup(
            params=self.model_params(), dt=self.dt,
            train_duration=self.train_samples * self.dt,
            validation_duration=self.validation_duration,
            horizon=self.horizon, transient=self.transient,
            reference_duration=self.reference_duration,
        )

    def validate(self) -> None:
        """Cross-key invariants, checked after all assignments."""
        if self.rom_ng > self.n_modes:
            raise ConfigError(
                f"run.rom_ng = {self.rom_ng} exceeds model.n_modes = "
                f"{self.n_modes}"
            )
        if any(ng > self.n_modes for ng in self.sweep_ng):
            raise ConfigError(
                f"run.sweep_ng = {list(self.sweep_ng)} exceeds "
                f"model.n_modes = {self.n_modes}"
            )
        if self.tau < self.dt:
            raise ConfigError(
                f"model.tau = {self.tau} must be at least run.dt = {self.dt}"
            )
        if self.accept_threshold > self.valid_threshold:
            raise ConfigError(
                "hybrid.accept_threshold must not exceed hybrid.valid_threshold"
            )


# --------------------------------------------------------------------------
# Typed key table


def _to_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got '{text}'") from None


def _to_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got '{text}'") from None


def _to_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected true/false, got '{text}'")


def _to_str(text: str) -> str:
    return text.strip()


def _to_mode(text: str) -> str:
    mode = text.strip().lower()
    if mode not in MODES:
        raise ConfigError(f"expected one of {'/'.join(MODES)}, got '{text}'")
    return mode


def _to_int_list(text: str) -> tuple[int, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ConfigError("expected a comma-separated list of integers")
    return tuple(_to_int(part) for part in items)


def _to_float_list(text: str) -> tuple[float, ...]:
    items = [part.strip() for part in text.split(",") if part.strip()]
    if not items:
        raise ConfigError("expected a comma-separated list of numbers")
    return tuple(_to_float(part) for part in items)


def _positive(value, key):
    if not value > 0:
        raise ConfigError(f"{key} must be positive, got {value}")


def _nonnegative(value, key):
    if value < 0:
        raise ConfigError(f"{key} must be >= 0, got {value}")


def _unit_open(value, key):
    if not 0 < value < 1:
        raise ConfigError(f"{key} must lie strictly between 0 and 1, got {value}")


def _unit_half_open(value, key):
    if not 0 < value <= 1:
        raise ConfigError(f"{key} must lie in (0, 1], got {value}")


def _at_least(minimum):
    def check(value, key):
        if value < minimum:
            raise ConfigError(f"{key} must be >= {minimum}, got {value}")

    return check


def _all_positive_ints(value, key):
    if any(item < 1 for item in value):
        raise ConfigError(f"{key} entries must be >= 1, got {list(value)}")


def _all_positive(value, key):
    if any(not item > 0 for item in value):
        raise ConfigError(f"{key} entries must be positive, got {list(value)}")


@dataclass(frozen=True)
class _Key:
    attr: str
    cast: Callable
    check: Optional[Callable] = None


KEY_TABLE: dict[str, _Key] = {
    "model.n_modes": _Key("n_modes", _to_int, _at_least(1)),
    "model.beta": _Key("beta", _to_float, _positive),
    "model.tau": _Key("tau", _to_float, _positive),
    "model.x_f": _Key("x_f", _to_float, _unit_open),
    "model.damping_c1": _Key("damping_c1", _to_float, _nonnegative),
    "model.damping_c2": _Key("damping_c2", _to_float, _nonnegative),
    "esn.n_reservoir": _Key("n_reservoir", _to_int, _at_least(2)),
    "esn.sigma_in": _Key("sigma_in", _to_float, _positive),
    "esn.rho": _Key("rho", _to_float, _positive),
    "esn.density": _Key("density", _to_float, _unit_half_open),
    "esn.gamma": _Key("gamma", _to_float, _nonnegative),
    "esn.washout": _Key("washout", _to_int, _nonnegative),
    "esn.seed": _Key("seed", _to_int, _nonnegative),
    "run.mode": _Key("mode", _to_mode),
    "run.rom_ng": _Key("rom_ng", _to_int, _at_least(1)),
    "run.dt": _Key("dt", _to_float, _positive),
    "run.train_samples": _Key("train_samples", _to_int, _at_least(1)),
    "run.horizon": _Key("horizon", _to_float, _positive),
    "run.transient": _Key("transient", _to_float, _nonnegative),
    "run.validation_duration": _Key("validation_duration", _to_float, _positive),
    "run.reference_duration": _Key("reference_duration", _to_float, _positive),
    "run.duration": _Key("duration", _to_float, _positive),
    "run.discard": _Key("discard", _to_float, _nonnegative),
    "run.n_seeds": _Key("n_seeds", _to_int, _at_least(1)),
    "run.workers": _Key("workers", _to_int, _at_least(1)),
    "run.lyapunov_duration": _Key("lyapunov_duration", _to_float, _positive),
    "run.sweep_ng": _Key("sweep_ng", _to_int_list, _all_positive_ints),
    "hybrid.validated": _Key("validated", _to_bool),
    "hybrid.candidates": _Key("candidates", _to_int, _at_least(1)),
    "hybrid.accept_threshold": _Key("accept_threshold", _to_float, _positive),
    "hybrid.valid_threshold": _Key("valid_threshold", _to_float, _positive),
    "hybrid.state_noise": _Key("state_noise", _to_float, _nonnegative),
    "grid.sigma_in": _Key("grid_sigma_in", _to_float_list, _all_positive),
    "grid.rho": _Key("grid_rho", _to_float_list, _all_positive),
    "grid.gamma": _Key("grid_gamma", _to_float_list, None),
    "paths.data": _Key("data_path", _to_str),
    "paths.checkpoint": _Key("checkpoint_path", _to_str),
    "paths.prediction": _Key("prediction_path", _to_str),
    "paths.report_dir": _Key("report_dir", _to_str),
}


def _assign(config: ExperimentConfig, key: str, raw: str, where: str) -> None:
    entry = KEY_TABLE.get(key)
    if entry is None:
        raise ConfigError(f"{where}: unknown key '{key}'")
    try:
        value = entry.cast(raw)
        if entry.check is not None:
            entry.check(value, key)
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    setattr(config, entry.attr, value)


def parse_config(path) -> ExperimentConfig:
    """Read a config file; every key optional, unknown keys fatal."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"config file not found: {path}")
    config = ExperimentConfig()
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got '{stripped}'"
            )
        key, _, raw = stripped.partition("=")
        _assign(config, key.strip(), raw.strip(), f"{path}:{lineno}")
    try:
        config.validate()
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config


def apply_overrides(config: ExperimentConfig,
                    overrides: Sequence[tuple[str, str]]) -> ExperimentConfig:
    """Apply (key, value) pairs from command-line flags; flags beat the file."""
    for key, raw in overrides:
        _assign(config, key, raw, f"flag {key}")
    config.validate()
    return config


# --------------------------------------------------------------------------
# Fingerprinting and manifests


def canonical_text(config: ExperimentConfig) -> str:
    """One `key = value` line per table entry, sorted; the hash input."""
    lines = []
    for key in sorted(KEY_TABLE):
        value = getattr(config, KEY_TABLE[key].attr)
        if isinstance(value, tuple):
            rendered = ", ".join(repr(item) for item in value)
        else:
            rendered = repr(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    """12-hex-digit fingerprint of the resolved configuration."""
    digest = hashlib.sha256(canonical_text(config).encode()).hexdigest()
    return digest[:12]


def manifest_line(subcommand: str, config: ExperimentConfig,
                  seed: Optional[int] = None) -> str:
    """The provenance line embedded in every artifact."""
    shown = config.seed if seed is None else seed
    return (f"# manifest: {subcommand}, {config_hash(config)}, {shown}, "
            f"{VERSION}")
