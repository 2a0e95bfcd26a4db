"""Hybrid echo state network: reservoir plus an imperfect physical model.

A truncated Galerkin model (typically a single mode) runs alongside the
reservoir. At every step it takes the current full state estimate, keeps the
modes it resolves, integrates them forward by one sample, and zero-pads the
result back to full width; that one-step prediction y_rom enters both the
reservoir input, [u; y_rom], and the readout features, [x; y_rom]. Half the
reservoir rows are wired to the data input and half to the model output.

During training the model's delay buffer is fed from the true data's
projected flame velocity (teacher forcing); during closed-loop prediction it
is fed from the network's own projected outputs. Because y_rom is not odd in
the reservoir state, the hybrid loop does not share the plain network's
sign symmetry.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import galerkin
from .errors import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidArgumentError,
    NumericalBlowupError,
    UntrainedReadoutError,
    ValidationFailedError,
)
from .galerkin import DEFAULT_BLOWUP_LIMIT, DelayHistory, ModelParams, delay_steps
from .reservoir import (
    EsnConfig,
    Reservoir,
    TrainDiagnostics,
    effective_ridge,
    init_reservoir,
    train_readout,
)
from .series import TimeSeries

#: Scale of the Gaussian state jitter injected while teacher forcing.
DEFAULT_STATE_NOISE = 3e-3
#: Defaults of the statistically validated training loop.
DEFAULT_CANDIDATES = 12
DEFAULT_ACCEPT_THRESHOLD = 0.02
DEFAULT_VALID_THRESHOLD = 0.12


@dataclass
class HybridEsn:
    """A trained reservoir with its physical-model attachment.

    `full_dim` is the data width (2 N_g of the full system, = N_y); the
    reservoir takes 2*full_dim inputs ([u; y_rom]) and reads out from
    N_x + full_dim features ([x; y_rom]). `rom_delay` holds the delay buffer
    of the most recent operation; predictions always build a fresh one from
    their warm window, so it is a diagnostic, not carried state.
    """

    reservoir: Reservoir
    rom_params: ModelParams
    full_dim: int
    dt: float
    rom_delay: Optional[DelayHistory] = None

    @property
    def rom_dim(self) -> int:
        return 2 * self.rom_params.n_modes

    def __post_init__(self) -> None:
        if self.full_dim < 2 or self.full_dim % 2 != 0:
            raise InvalidArgumentError("full_dim must be a positive even integer")
        if self.rom_dim > self.full_dim:
            raise InvalidArgumentError(
                "the reduced model cannot have more modes than the data"
            )
        if self.reservoir.n_inputs != 2 * self.full_dim:
            raise DimensionMismatchError(
                "hybrid reservoir must take 2*full_dim inputs ([u; y_rom])"
            )


def input_block_map(n_reservoir: int, full_dim: int) -> list[tuple[range, range]]:
    """Row/column wiring of the hybrid input layer: the first half of the
    reservoir rows listen to the data input u (columns 0..full_dim), the
    second half to the model output y_rom (columns full_dim..2*full_dim)."""
    half = n_reservoir // 2
    return [
        (range(0, half), range(0, full_dim)),
        (range(half, n_reservoir), range(full_dim, 2 * full_dim)),
    ]


def project_state(u_full: np.ndarray, rom_modes: int) -> np.ndarray:
    """Keep the first `rom_modes` (eta, mu) pairs of a packed full state."""
    u_full = np.asarray(u_full, dtype=float)
    half = u_full.shape[-1] // 2
    if u_full.shape[-1] % 2 != 0 or rom_modes > half:
        raise DimensionMismatchError(
            f"cannot project width-{u_full.shape[-1]} state onto {rom_modes} modes"
        )
    return np.concatenate(
        (u_full[..., :rom_modes], u_full[..., half:half + rom_modes]), axis=-1
    )


def embed_state(y_rom: np.ndarray, full_dim: int) -> np.ndarray:
    """Zero-pad a packed reduced state back to `full_dim` width."""
    y_rom = np.asarray(y_rom, dtype=float)
    rom_modes = y_rom.shape[-1] // 2
    half = full_dim // 2
    if y_rom.shape[-1] % 2 != 0 or rom_modes > half:
        raise DimensionMismatchError(
            f"cannot embed width-{y_rom.shape[-1]} state into {full_dim}"
        )
    out = np.zeros(y_rom.shape[:-1] + (full_dim,))
    out[..., :rom_modes] = y_rom[..., :rom_modes]
    out[..., half:half + rom_modes] = y_rom[..., rom_modes:]
    return out


def rom_one_step(u_full, rom_delay: DelayHistory, rom_params: ModelParams,
                 dt: float) -> np.ndarray:
    """One-sample prediction of the reduced model from a full state.

    Projects `u_full` onto the resolved modes, appends the projected flame
    velocity (and its rate) to the delay buffer at the buffer's next node
    time, integrates one step of length dt, and embeds the result back to
    full width. The buffer thus advances with whatever the caller feeds in —
    true data during training, network output during prediction.
    """
    u_full = np.asarray(u_full, dtype=float)
    if u_full.ndim != 1 or u_full.shape[0] % 2 != 0:
        raise DimensionMismatchError("u_full must be a packed 1-d state of even width")
    y = project_state(u_full, rom_params.n_modes)
    rom_delay.append(
        galerkin.flame_velocity(y, rom_params.x_f),
        galerkin.flame_velocity_rate(y, rom_params.x_f),
    )
    y_next, _ = galerkin.step_once(rom_params, y, rom_delay, dt)
    return embed_state(y_next, u_full.shape[0])


def _prime_delay(data: np.ndarray, t0: float, dt: float,
                 rom_params: ModelParams) -> tuple[DelayHistory, int]:
    """Fresh delay buffer prefilled from the first ceil(tau/dt) samples.

    Returns the buffer (next node time = t0 + m*dt) and the priming count m.
    """
    m = delay_steps(rom_params.tau, dt)
    if data.shape[0] < m + 2:
        raise InsufficientDataError(
            f"need at least {m + 2} samples to prime a tau={rom_params.tau} "
            f"delay buffer at dt={dt}, got {data.shape[0]}"
        )
    hist = DelayHistory(dt, t0, capacity=max(256, m + 2))
    projected = project_state(data[:m], rom_params.n_modes)
    u_f = galerkin.flame_velocity(projected, rom_params.x_f)
    du_f = galerkin.flame_velocity_rate(projected, rom_params.x_f)
    for k in range(m):
        hist.append(float(u_f[k]), float(du_f[k]))
    return hist, m


def hesn_train(data: TimeSeries, config: EsnConfig, rom_params: ModelParams,
               *, state_noise: float = DEFAULT_STATE_NOISE,
               noise_rng: Optional[np.random.Generator] = None,
               ) -> tuple[HybridEsn, TrainDiagnostics]:
    """Teacher-forced training of the hybrid network on full-model data.

    The first ceil(tau/dt) samples prime the model's delay buffer; from
    there every sample n yields the reservoir input [u(n); y_rom(n)], the
    feature vector [x(n); y_rom(n)], and the target u(n+1), with the first
    `washout` pairs discarded before the ridge regression.

    A small Gaussian jitter (scale `state_noise`) is added to the reservoir
    state after each update. The jitter both propagates to the next step and
    stays in the stored feature, so the readout is fitted on the same
    slightly-perturbed states it will see once its own output feeds back;
    this stabilizes the closed loop's long-run statistics. Pass
    `state_noise=0.0` for the noiseless teacher recursion. The jitter stream
    defaults to a generator derived from `config.seed`, keeping training
    deterministic.
    """
    u = data.states
    full_dim = u.shape[1]
    if config.n_inputs != 2 * full_dim:
        raise DimensionMismatchError(
            f"config.n_inputs must be 2*full_dim = {2 * full_dim}, "
            f"got {config.n_inputs}"
        )
    if config.n_outputs != full_dim:
        raise DimensionMismatchError(
            f"config.n_outputs must equal full_dim = {full_dim}"
        )
    hist, m = _prime_delay(u, data.t0, data.dt, rom_params)
    n_pairs = u.shape[0] - m - 1
    if n_pairs <= config.washout:
        raise InsufficientDataError(
            f"need more than washout + {m + 1} samples, got {u.shape[0]}"
        )
    if state_noise < 0:
        raise InvalidArgumentError("state_noise must be >= 0")
    if noise_rng is None:
        noise_rng = np.random.default_rng((config.seed, 0, 1))
    reservoir = init_reservoir(
        config, input_block_map(config.n_reservoir, full_dim)
    )
    w_in, w = reservoir.w_in, reservoir.w
    x = np.zeros(config.n_reservoir)
    features = np.empty((config.n_reservoir + full_dim, n_pairs))
    for k in range(n_pairs):
        n = m + k
        y_rom = rom_one_step(u[n], hist, rom_params, data.dt)
        x = np.tanh(w_in @ np.concatenate((u[n], y_rom)) + w @ x)
        if state_noise > 0:
            x = x + state_noise * noise_rng.standard_normal(x.shape[0])
        features[:config.n_reservoir, k] = x
        features[config.n_reservoir:, k] = y_rom
    targets = u[m + 1:].T
    x_mat = features[:, config.washout:]
    y_mat = np.ascontiguousarray(targets[:, config.washout:])
    loading = effective_ridge(config.gamma, y_mat.shape[0], x_mat.shape[1])
    reservoir.w_out = train_readout(x_mat, y_mat, loading)
    residual = reservoir.w_out @ x_mat - y_mat
    diagnostics = TrainDiagnostics(
        mse=float(np.mean(residual * residual)),
        readout_norm=float(np.linalg.norm(reservoir.w_out)),
        n_samples=x_mat.shape[1],
    )
    model = HybridEsn(reservoir=reservoir, rom_params=rom_params,
                      full_dim=full_dim, dt=data.dt, rom_delay=hist)
    return model, diagnostics


def hesn_predict(model: HybridEsn, warm_inputs: TimeSeries,
                 n_steps: int) -> TimeSeries:
    """Closed-loop prediction: the network's output is its next input.

    A fresh delay buffer is primed from the warm window's first samples and
    the reservoir is teacher-forced over the rest; after that, each output
    y(n) = W_out [x(n); y_rom(n)] becomes the next input and its projection
    feeds the model's delay buffer. Unlike the plain network, the loop runs
    an unbounded physical model inside it, so outputs are checked against a
    divergence limit and a NumericalBlowupError is raised if they escape.
    """
    reservoir = model.reservoir
    if reservoir.w_out is None:
        raise UntrainedReadoutError("hybrid readout has not been trained")
    n_features = reservoir.n_reservoir + model.full_dim
    if reservoir.w_out.shape != (model.full_dim, n_features):
        raise DimensionMismatchError(
            "hybrid readout must map [x; y_rom] features to full-width outputs"
        )
    warm = warm_inputs.states
    if warm.shape[1] != model.full_dim:
        raise DimensionMismatchError(
            f"warm inputs have width {warm.shape[1]}, expected {model.full_dim}"
        )
    if abs(warm_inputs.dt - model.dt) > 1e-12 * model.dt:
        raise InvalidArgumentError("warm inputs must use the training step size")
    if n_steps < 0:
        raise InvalidArgumentError("n_steps must be >= 0")
    hist, m = _prime_delay(warm, warm_inputs.t0, model.dt, model.rom_params)
    model.rom_delay = hist
    w_in, w, w_out = reservoir.w_in, reservoir.w, reservoir.w_out
    x = np.zeros(reservoir.n_reservoir)
    for n in range(m, warm.shape[0]):
        y_rom = rom_one_step(warm[n], hist, model.rom_params, model.dt)
        x = np.tanh(w_in @ np.concatenate((warm[n], y_rom)) + w @ x)
    outputs = np.empty((n_steps, model.full_dim))
    u = w_out @ np.concatenate((x, y_rom))
    for k in range(n_steps):
        if not np.all(np.abs(u) < DEFAULT_BLOWUP_LIMIT):
            raise NumericalBlowupError(
                f"closed-loop output escaped |u| < {DEFAULT_BLOWUP_LIMIT:g} "
                f"at step {k} (t = {warm_inputs.t0 + (warm.shape[0] + k) * model.dt:g})"
            )
        outputs[k] = u
        y_rom = rom_one_step(u, hist, model.rom_params, model.dt)
        x = np.tanh(w_in @ np.concatenate((u, y_rom)) + w @ x)
        u = w_out @ np.concatenate((x, y_rom))
    t_first = warm_inputs.t0 + warm.shape[0] * warm_inputs.dt
    return TimeSeries(dt=model.dt, t0=t_first, states=outputs)


def candidate_seed(seed: int, candidate: int) -> int:
    """Deterministic matrix seed of training candidate `candidate`.

    Candidate 0 keeps the configured seed unchanged, so the first candidate
    is exactly the network `hesn_train` would build; later candidates hash
    (seed, candidate) into an independent, reproducible redraw.
    """
    if candidate == 0:
        return seed
    return int(np.random.SeedSequence((seed, candidate)).generate_state(1)[0])


@dataclass(frozen=True)
class CandidateRecord:
    """Outcome of one training candidate inside the validated loop."""

    candidate: int
    matrix_seed: int
    validation_error: Optional[float]  # None when the closed loop diverged


@dataclass
class ValidationRecord:
    """How a validated training call reached (or failed to reach) a model."""

    accepted: Optional[int]
    validation_error: Optional[float]
    candidates: list[CandidateRecord] = field(default_factory=list)

    @property
    def n_candidates(self) -> int:
        return len(self.candidates)


def _mean_horizon_energy(model: HybridEsn, warm: TimeSeries,
                         horizon_steps: int) -> Optional[float]:
    """Mean acoustic energy of a closed-loop run, or None if it diverges."""
    try:
        pred = hesn_predict(model, warm, horizon_steps)
    except NumericalBlowupError:
        return None
    energy = galerkin.acoustic_energy(pred.states)
    if not np.all(np.isfinite(energy)):
        return None
    return float(np.mean(energy))


def hesn_train_validated(
    data: TimeSeries, config: EsnConfig, rom_params: ModelParams, *,
    validation_reference: float,
    horizon_steps: int,
    warm_samples: Optional[int] = None,
    n_candidates: int = DEFAULT_CANDIDATES,
    accept_threshold: float = DEFAULT_ACCEPT_THRESHOLD,
    valid_threshold: float = DEFAULT_VALID_THRESHOLD,
    state_noise: float = DEFAULT_STATE_NOISE,
) -> tuple[HybridEsn, TrainDiagnostics, ValidationRecord]:
    """Train hybrid networks until one reproduces a long-run statistic.

    One-step training error barely constrains what a network does once its
    own output feeds back, so a single draw of the random input and
    reservoir matrices occasionally yields a closed loop whose attractor is
    wrong (or divergent) even though its teacher-forced fit is excellent.
    This wrapper makes training robust to that draw: each candidate is
    trained as in `hesn_train` (candidate j redraws the matrices with
    `candidate_seed(config.seed, j)` and a jitter stream derived from
    (seed, j, 1)), then judged by running it closed-loop for
    `horizon_steps` from the last `warm_samples` of the training data
    (default: delay-priming samples plus one washout span) and comparing
    the mean acoustic energy of that run against `validation_reference`.

    A candidate whose relative error is at most `accept_threshold` is
    returned immediately. If none reaches it, the best candidate is
    returned provided it stays within `valid_threshold`; otherwise the call
    raises ValidationFailedError (with the per-candidate record attached as
    `record`) so sweeps can count the seed as failed and continue. The
    whole procedure is deterministic in (data, config).
    """
    if not validation_reference > 0:
        raise InvalidArgumentError("validation_reference must be positive")
    if horizon_steps < 1:
        raise InvalidArgumentError("horizon_steps must be >= 1")
    if n_candidates < 1:
        raise InvalidArgumentError("n_candidates must be >= 1")
    if not 0 < accept_threshold <= valid_threshold:
        raise InvalidArgumentError(
            "thresholds must satisfy 0 < accept_threshold <= valid_threshold"
        )
    if warm_samples is None:
        warm_samples = delay_steps(rom_params.tau, data.dt) + config.washout
    if not 0 < warm_samples <= data.n_samples:
        raise InsufficientDataError(
            f"warm_samples = {warm_samples} exceeds the {data.n_samples} "
            "training samples"
        )
    warm = data.window(data.n_samples - warm_samples, data.n_samples)
    record = ValidationRecord(accepted=None, validation_error=None)
    best: Optional[tuple[float, HybridEsn, TrainDiagnostics, int]] = None
    for j in range(n_candidates):
        matrix_seed = candidate_seed(config.seed, j)
        candidate_config = dataclasses.replace(config, seed=matrix_seed)
        noise_rng = np.random.default_rng((config.seed, j, 1))
        model, diagnostics = hesn_train(
            data, candidate_config, rom_params,
            state_noise=state_noise, noise_rng=noise_rng,
        )
        mean_energy = _mean_horizon_energy(model, warm, horizon_steps)
        if mean_energy is None:
            record.candidates.append(CandidateRecord(j, matrix_seed, None))
            continue
        error = abs(mean_energy - validation_reference) / validation_reference
        record.candidates.append(CandidateRecord(j, matrix_seed, error))
        if best is None or error < best[0]:
            best = (error, model, diagnostics, j)
        if error <= accept_threshold:
            break
    if best is not None and best[0] <= valid_threshold:
        record.accepted = best[3]
        record.validation_error = best[0]
        return best[1], best[2], record
    exc = ValidationFailedError(
        f"no candidate out of {record.n_candidates} reproduced the reference "
        f"statistic within {valid_threshold:.0%}"
        + (f" (best: {best[0]:.1%})" if best is not None else "")
    )
    exc.record = record
    raise exc
