"""Ergodic-average experiments: error metrics, seed ensembles, and sweeps.

The question every experiment here answers is statistical, not pointwise:
after a closed-loop predictor has long since lost track of the true
trajectory, does the time average of an observable over its own attractor
still match the truth? The workflow is

  1. `build_dataset` integrates the full model once, splits off a training
     span and a validation span, and computes the reference average from a
     separate long integration;
  2. the free-run helpers (`rom_free_run`, `esn_free_run`, `hesn_free_run`)
     train one predictor and run it autonomously over the horizon;
  3. the ensemble drivers repeat that over independent seeds and reduce to
     a median with per-seed records, `ng_sweep` repeats the hybrid ensemble
     per model order, and `grid_search` scans hyperparameter cells.

Seeds and grid cells are independent tasks; they run on a bounded worker
pool and are reduced in submission order, so results never depend on the
pool size. A failed seed (divergent loop, rejected validation) is recorded
alongside the valid ones, and a median taken over fewer than half the
requested seeds is flagged invalid rather than dropped.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional, Sequence

import numpy as np

from . import galerkin
from .errors import (
    DimensionMismatchError,
    EmptyWindowError,
    InvalidArgumentError,
    ThermoesnError,
    ZeroReferenceError,
)
from .galerkin import DEFAULT_DT, DelayHistory, ModelParams, Stepper, delay_steps
from .hybrid import (
    DEFAULT_ACCEPT_THRESHOLD,
    DEFAULT_CANDIDATES,
    DEFAULT_STATE_NOISE,
    DEFAULT_VALID_THRESHOLD,
    HybridEsn,
    ValidationRecord,
    embed_state,
    hesn_predict,
    hesn_train,
    hesn_train_validated,
    project_state,
)
from .reservoir import EsnConfig, predict_closed_loop, train_esn
from .series import TimeSeries

DEFAULT_SEEDS = 16
DEFAULT_HORIZON = 250.0
DEFAULT_TRAIN_DURATION = 50.0
DEFAULT_VALIDATION_DURATION = 50.0
DEFAULT_REFERENCE_DURATION = 1000.0


# ---------------------------------------------------------------------------
# Observables and scalar metrics


@dataclass(frozen=True)
class Observable:
    """A named scalar function of the full state, averaged along orbits.

    `fn` may map one packed state to a real or a whole (n, dim) block to an
    (n,) array; `apply` accepts either convention.
    """

    name: str
    fn: Callable

    def apply(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        if states.ndim != 2:
            raise DimensionMismatchError("observable expects an (n, dim) block")
        out = np.asarray(self.fn(states))
        if out.shape == (states.shape[0],):
            return out.astype(float)
        return np.array([float(self.fn(s)) for s in states])


ACOUSTIC_ENERGY = Observable("acoustic_energy", galerkin.acoustic_energy)


def time_average(series: TimeSeries, observable: Observable = ACOUSTIC_ENERGY,
                 discard: float = 0.0) -> float:
    """Uniform-weight mean of `observable` over samples with t >= t0 + discard.

    The finite-horizon estimator of the attractor average: for an ergodic
    orbit it converges to the statistical average as the span grows.
    """
    if discard < 0:
        raise InvalidArgumentError("discard must be >= 0")
    start = int(math.ceil(discard / series.dt - 1e-9))
    if start >= series.n_samples:
        raise EmptyWindowError(
            f"discarding {discard} time units leaves no samples out of "
            f"{series.n_samples}"
        )
    values = observable.apply(series.states[start:])
    return float(np.mean(values))


def relative_error(predicted: float, reference: float) -> float:
    """|predicted - reference| / |reference|."""
    if reference == 0:
        raise ZeroReferenceError("relative error is undefined for reference 0")
    return abs(predicted - reference) / abs(reference)


# ---------------------------------------------------------------------------
# Attractor diagnostics (trajectory-level checks used by the regime tests)


def rms_amplitude(series: TimeSeries, columns: Sequence[int]) -> float:
    """Root-mean-square of the Euclidean norm over the given columns."""
    block = series.states[:, list(columns)]
    return float(np.sqrt(np.mean(np.sum(block * block, axis=1))))


def oscillation_amplitude(series: TimeSeries, column: int,
                          discard: float = 0.0) -> float:
    """Half the peak-to-peak excursion of one component after `discard`."""
    start = int(math.ceil(discard / series.dt - 1e-9))
    if start >= series.n_samples:
        raise EmptyWindowError("discard leaves no samples for the amplitude")
    values = series.states[start:, column]
    return float(values.max() - values.min()) / 2.0


def poincare_section(series: TimeSeries, *, section_column: int,
                     record_column: int, discard: float = 0.0) -> np.ndarray:
    """Values of one component at upward zero crossings of another.

    Crossing times come from linear interpolation of the section component;
    the recorded component is evaluated there by a parabola through the
    three surrounding samples, so section values of a periodic orbit agree
    to far better than the sampling resolution.
    """
    start = int(math.ceil(discard / series.dt - 1e-9))
    s = series.states[start:, section_column]
    r = series.states[start:, record_column]
    if s.shape[0] < 3:
        raise EmptyWindowError("need at least 3 samples for a section")
    up = np.nonzero((s[:-1] < 0.0) & (s[1:] >= 0.0))[0]
    up = up[(up >= 1) & (up < s.shape[0] - 1)]
    if up.size == 0:
        return np.empty(0)
    frac = s[up] / (s[up] - s[up + 1])  # in [0, 1): crossing offset in steps
    # parabola through (-1, r[i-1]), (0, r[i]), (1, r[i+1]) evaluated at frac
    a = 0.5 * (r[up + 1] + r[up - 1]) - r[up]
    b = 0.5 * (r[up + 1] - r[up - 1])
    return r[up] + b * frac + a * frac * frac


def poincare_dispersion(series: TimeSeries, *, section_column: int,
                        record_column: int, discard: float = 0.0) -> float:
    """Spread (max - min) of the Poincaré-section returns.

    Near zero for a period-one limit cycle; order of the attractor width
    for a chaotic orbit.
    """
    returns = poincare_section(series, section_column=section_column,
                               record_column=record_column, discard=discard)
    if returns.size < 2:
        raise EmptyWindowError("fewer than two section crossings")
    return float(returns.max() - returns.min())


def divergence_time(predicted: TimeSeries, truth: TimeSeries,
                    columns: Sequence[int], threshold: float) -> float:
    """Time from prediction start until the component error exceeds `threshold`.

    The error is the Euclidean distance over `columns` between prediction
    and truth at equal times; returns inf if it never exceeds the threshold
    over the common span.
    """
    if abs(predicted.dt - truth.dt) > 1e-12 * truth.dt:
        raise InvalidArgumentError("series must share the sampling step")
    if abs(predicted.t0 - truth.t0) > 1e-9 * truth.dt + 1e-12:
        raise InvalidArgumentError("series must start at the same time")
    n = min(predicted.n_samples, truth.n_samples)
    cols = list(columns)
    delta = predicted.states[:n, cols] - truth.states[:n, cols]
    err = np.sqrt(np.sum(delta * delta, axis=1))
    beyond = np.nonzero(err > threshold)[0]
    if beyond.size == 0:
        return math.inf
    return float(beyond[0] * truth.dt)


# ---------------------------------------------------------------------------
# Dataset: one truth integration shared by every predictor


@dataclass(frozen=True)
class ExperimentSetup:
    """Spans and step size of one ergodic-average experiment."""

    params: ModelParams = ModelParams()
    dt: float = DEFAULT_DT
    train_duration: float = DEFAULT_TRAIN_DURATION
    validation_duration: float = DEFAULT_VALIDATION_DURATION
    horizon: float = DEFAULT_HORIZON
    transient: float = 200.0
    reference_duration: float = DEFAULT_REFERENCE_DURATION

    def __post_init__(self) -> None:
        for name in ("dt", "train_duration", "validation_duration", "horizon",
                     "reference_duration"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.transient < 0:
            raise InvalidArgumentError("transient must be >= 0")

    @property
    def n_train_samples(self) -> int:
        return int(round(self.train_duration / self.dt))

    @property
    def n_validation_samples(self) -> int:
        return int(round(self.validation_duration / self.dt))

    @property
    def n_prediction_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Truth data, its splits, and the reference average they are scored by.

    `truth` spans the training window plus whichever is longer of the
    validation span and the prediction horizon, so trajectory-level
    comparisons over the horizon stay in range. `reference_average` comes
    from an independent, much longer integration of the same model.
    """

    setup: ExperimentSetup
    truth: TimeSeries
    train: TimeSeries
    validation: TimeSeries
    validation_average: float
    reference_average: float

    @property
    def full_dim(self) -> int:
        return self.truth.dim

    @property
    def horizon_steps(self) -> int:
        return self.setup.n_prediction_steps

    @property
    def horizon_truth(self) -> TimeSeries:
        """Truth over the prediction window (starts right after training)."""
        n_train = self.setup.n_train_samples
        return self.truth.window(n_train, n_train + self.horizon_steps)


def build_dataset(setup: ExperimentSetup = ExperimentSetup(), *,
                  reference_average: Optional[float] = None) -> Dataset:
    """Integrate the truth, split it, and attach the reference average.

    Pass `reference_average` to reuse a previously computed value and skip
    the long reference integration.
    """
    n_train = setup.n_train_samples
    n_val = setup.n_validation_samples
    n_pred = setup.n_prediction_steps
    duration = setup.dt * (n_train + max(n_val, n_pred))
    truth, _ = galerkin.simulate(setup.params, setup.dt, duration=duration,
                                 transient=setup.transient)
    train = truth.window(0, n_train)
    validation = truth.window(n_train, n_train + n_val)
    validation_average = time_average(validation)
    if reference_average is None:
        reference, _ = galerkin.simulate(
            setup.params, setup.dt, duration=setup.reference_duration,
            transient=setup.transient,
        )
        reference_average = time_average(reference)
    return Dataset(setup=setup, truth=truth, train=train,
                   validation=validation,
                   validation_average=validation_average,
                   reference_average=float(reference_average))


# ---------------------------------------------------------------------------
# Free-run predictors (train once, run autonomously over the horizon)


def rom_free_run(dataset: Dataset, rom_params: ModelParams,
                 n_steps: Optional[int] = None) -> TimeSeries:
    """Run the truncated model alone from the end of the training data.

    Its delay buffer is primed from the projected tail of the training
    window, the integrator starts at the last training sample, and the
    output is zero-padded back to full width, aligned sample-for-sample
    with the network predictions.
    """
    if n_steps is None:
        n_steps = dataset.horizon_steps
    dt = dataset.setup.dt
    m = delay_steps(rom_params.tau, dt)
    train = dataset.train
    if train.n_samples < m + 1:
        raise EmptyWindowError("training window shorter than the delay span")
    tail = project_state(train.states[-(m + 1):], rom_params.n_modes)
    u_f = galerkin.flame_velocity(tail, rom_params.x_f)
    du_f = galerkin.flame_velocity_rate(tail, rom_params.x_f)
    hist = DelayHistory(dt, train.t0 + (train.n_samples - 1 - m) * dt,
                        capacity=max(256, m + 2))
    for k in range(m):
        hist.append(float(u_f[k]), float(du_f[k]))
    stepper = Stepper(rom_params, tail[-1], hist, dt)
    trajectory = stepper.run(n_steps)
    prediction = trajectory.window(1, n_steps + 1)  # drop the initial sample
    return TimeSeries(dt=dt, t0=prediction.t0,
                      states=embed_state(prediction.states, dataset.full_dim))


def esn_free_run(dataset: Dataset, config: EsnConfig,
                 n_steps: Optional[int] = None) -> TimeSeries:
    """Train a plain network on the training window and run it closed-loop."""
    if n_steps is None:
        n_steps = dataset.horizon_steps
    reservoir, _ = train_esn(dataset.train, config)
    warm = dataset.train.window(dataset.train.n_samples - config.washout,
                                dataset.train.n_samples)
    return predict_closed_loop(reservoir, warm, n_steps)


@dataclass(frozen=True)
class TrainerOptions:
    """Knobs of the hybrid training loop, threaded through the ensembles."""

    validated: bool = True
    state_noise: float = DEFAULT_STATE_NOISE
    candidates: int = DEFAULT_CANDIDATES
    accept_threshold: float = DEFAULT_ACCEPT_THRESHOLD
    valid_threshold: float = DEFAULT_VALID_THRESHOLD


def hesn_free_run(dataset: Dataset, config: EsnConfig,
                  rom_params: ModelParams, n_steps: Optional[int] = None, *,
                  trainer: TrainerOptions = TrainerOptions(),
                  ) -> tuple[TimeSeries, Optional[ValidationRecord]]:
    """Train a hybrid network and run it closed-loop over the horizon.

    With `trainer.validated` (the default) the training candidate is
    selected by reproducing the validation window's mean acoustic energy; a
    ValidationFailedError propagates to the caller when no candidate
    qualifies. Otherwise a single candidate is trained as-is.
    """
    if n_steps is None:
        n_steps = dataset.horizon_steps
    warm_samples = delay_steps(rom_params.tau, dataset.setup.dt) + config.washout
    if trainer.validated:
        model, _, record = hesn_train_validated(
            dataset.train, config, rom_params,
            validation_reference=dataset.validation_average,
            horizon_steps=dataset.horizon_steps,
            warm_samples=warm_samples,
            n_candidates=trainer.candidates,
            accept_threshold=trainer.accept_threshold,
            valid_threshold=trainer.valid_threshold,
            state_noise=trainer.state_noise,
        )
    else:
        model, _ = hesn_train(dataset.train, config, rom_params,
                              state_noise=trainer.state_noise)
        record = None
    warm = dataset.train.window(dataset.train.n_samples - warm_samples,
                                dataset.train.n_samples)
    return hesn_predict(model, warm, n_steps), record


# ---------------------------------------------------------------------------
# Seed ensembles


@dataclass(frozen=True, eq=False)
class SeedRun:
    """One seed's outcome inside an ensemble.

    `relative_error` is None when the seed failed (`failure` says why);
    `trajectory` holds requested state columns of the prediction for
    trajectory-level checks.
    """

    seed: int
    relative_error: Optional[float]
    predicted_average: Optional[float] = None
    n_candidates: int = 1
    validation_error: Optional[float] = None
    failure: Optional[str] = None
    trajectory: Optional[TimeSeries] = None

    @property
    def valid(self) -> bool:
        return self.relative_error is not None


@dataclass(eq=False)
class EvalReport:
    """Predicted versus reference average, with per-seed statistics.

    For a single deterministic run `relative_error` is exactly
    |predicted - reference| / |reference|. For an ensemble, both
    `predicted_average` and `relative_error` are medians over the valid
    seeds (so the identity holds per seed, not between the two medians),
    and `median_valid` is False when fewer than half the seeds are valid.
    """

    reference_average: float
    predicted_average: Optional[float]
    relative_error: Optional[float]
    horizon: float
    n_prediction_steps: int
    per_seed: tuple[SeedRun, ...] = ()
    median_valid: bool = True

    @property
    def n_valid(self) -> int:
        return sum(1 for run in self.per_seed if run.valid)


def _run_indexed(jobs: Sequence[Callable[[], object]], workers: int) -> list:
    """Run independent jobs on a bounded pool; results in submission order."""
    if workers < 1:
        raise InvalidArgumentError("workers must be >= 1")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [future.result() for future in futures]


def _keep_columns(prediction: TimeSeries,
                  columns: Sequence[int]) -> Optional[TimeSeries]:
    if not columns:
        return None
    return TimeSeries(dt=prediction.dt, t0=prediction.t0,
                      states=prediction.states[:, list(columns)].copy())


def _reduce_ensemble(dataset: Dataset, runs: Sequence[SeedRun]) -> EvalReport:
    valid = [run for run in runs if run.valid]
    predicted = (float(np.median([run.predicted_average for run in valid]))
                 if valid else None)
    error = (float(np.median([run.relative_error for run in valid]))
             if valid else None)
    return EvalReport(
        reference_average=dataset.reference_average,
        predicted_average=predicted,
        relative_error=error,
        horizon=dataset.setup.horizon,
        n_prediction_steps=dataset.horizon_steps,
        per_seed=tuple(runs),
        median_valid=bool(valid) and 2 * len(valid) >= len(runs),
    )


def evaluate_rom(dataset: Dataset, rom_params: ModelParams,
                 discard: float = 0.0,
                 keep_columns: Sequence[int] = ()) -> EvalReport:
    """Score the truncated model's own attractor average.

    The run is deterministic; its single per-seed entry is recorded under
    seed 0 so report tables and figures have a uniform shape.
    """
    prediction = rom_free_run(dataset, rom_params)
    predicted = time_average(prediction, ACOUSTIC_ENERGY, discard)
    error = relative_error(predicted, dataset.reference_average)
    run = SeedRun(seed=0, relative_error=error, predicted_average=predicted,
                  trajectory=_keep_columns(prediction, keep_columns))
    return EvalReport(
        reference_average=dataset.reference_average,
        predicted_average=predicted,
        relative_error=error,
        horizon=dataset.setup.horizon,
        n_prediction_steps=dataset.horizon_steps,
        per_seed=(run,),
    )


def _esn_seed_run(dataset: Dataset, config: EsnConfig, seed: int,
                  discard: float, keep: Sequence[int]) -> SeedRun:
    cfg = dataclasses.replace(config, seed=seed)
    try:
        prediction = esn_free_run(dataset, cfg)
        predicted = time_average(prediction, ACOUSTIC_ENERGY, discard)
        return SeedRun(
            seed=seed,
            relative_error=relative_error(predicted, dataset.reference_average),
            predicted_average=predicted,
            trajectory=_keep_columns(prediction, keep),
        )
    except ThermoesnError as exc:
        return SeedRun(seed=seed, relative_error=None,
                       failure=f"{type(exc).__name__}: {exc}")


def _hesn_seed_run(dataset: Dataset, config: EsnConfig,
                   rom_params: ModelParams, seed: int, discard: float,
                   keep: Sequence[int], trainer: TrainerOptions) -> SeedRun:
    cfg = dataclasses.replace(config, seed=seed)
    try:
        prediction, record = hesn_free_run(dataset, cfg, rom_params,
                                           trainer=trainer)
        predicted = time_average(prediction, ACOUSTIC_ENERGY, discard)
        return SeedRun(
            seed=seed,
            relative_error=relative_error(predicted, dataset.reference_average),
            predicted_average=predicted,
            n_candidates=record.n_candidates if record else 1,
            validation_error=record.validation_error if record else None,
            trajectory=_keep_columns(prediction, keep),
        )
    except ThermoesnError as exc:
        record = getattr(exc, "record", None)
        return SeedRun(seed=seed, relative_error=None,
                       n_candidates=record.n_candidates if record else 1,
                       failure=f"{type(exc).__name__}: {exc}")


def evaluate_esn_ensemble(dataset: Dataset, base_config: EsnConfig, *,
                          n_seeds: int = DEFAULT_SEEDS, discard: float = 0.0,
                          workers: int = 1,
                          keep_columns: Sequence[int] = ()) -> EvalReport:
    """Median attractor-average error of plain networks over seeds.

    Seeds are base_config.seed, base_config.seed + 1, ...; each seed is an
    independent draw of the input and reservoir matrices.
    """
    seeds = range(base_config.seed, base_config.seed + n_seeds)
    jobs = [
        (lambda s=seed: _esn_seed_run(dataset, base_config, s, discard,
                                      keep_columns))
        for seed in seeds
    ]
    return _reduce_ensemble(dataset, _run_indexed(jobs, workers))


def evaluate_hesn_ensemble(dataset: Dataset, base_config: EsnConfig,
                           rom_params: ModelParams, *,
                           n_seeds: int = DEFAULT_SEEDS, discard: float = 0.0,
                           workers: int = 1,
                           keep_columns: Sequence[int] = (),
                           trainer: TrainerOptions = TrainerOptions(),
                           ) -> EvalReport:
    """Median attractor-average error of hybrid networks over seeds."""
    seeds = range(base_config.seed, base_config.seed + n_seeds)
    jobs = [
        (lambda s=seed: _hesn_seed_run(dataset, base_config, rom_params, s,
                                       discard, keep_columns, trainer))
        for seed in seeds
    ]
    return _reduce_ensemble(dataset, _run_indexed(jobs, workers))


# ---------------------------------------------------------------------------
# Model-order sweep


@dataclass(eq=False)
class SweepResult:
    """Per-model-order ensemble reports, in the requested order."""

    reports: dict[int, EvalReport] = field(default_factory=dict)

    def rows(self) -> Iterator[tuple[int, int, float]]:
        """(n_modes, seed, relative_error) rows; failed seeds carry nan."""
        for ng, report in self.reports.items():
            for run in report.per_seed:
                yield ng, run.seed, (
                    run.relative_error if run.valid else math.nan
                )

    def medians(self) -> dict[int, Optional[float]]:
        return {ng: report.relative_error
                for ng, report in self.reports.items()}


def ng_sweep(base_config: EsnConfig, rom_ng_values: Sequence[int],
             n_seeds: int = DEFAULT_SEEDS, horizon: float = DEFAULT_HORIZON,
             *, dataset: Optional[Dataset] = None,
             params: Optional[ModelParams] = None, discard: float = 0.0,
             workers: int = 1, keep_columns: Sequence[int] = (),
             trainer: TrainerOptions = TrainerOptions()) -> SweepResult:
    """Hybrid-ensemble medians as a function of the resolved model order.

    All orders share one dataset (built here when not supplied) and one
    reference average; every requested order contributes exactly one report
    with `n_seeds` per-seed entries, valid or failed.
    """
    if dataset is None:
        setup = ExperimentSetup(params=params or ModelParams(),
                                horizon=horizon)
        dataset = build_dataset(setup)
    n_modes = dataset.setup.params.n_modes
    values = list(rom_ng_values)
    if not values:
        raise InvalidArgumentError("rom_ng_values must be nonempty")
    if any(ng < 1 or ng > n_modes for ng in values):
        raise InvalidArgumentError(
            f"rom_ng_values must lie in 1..{n_modes}, got {values}"
        )
    result = SweepResult()
    for ng in values:
        rom_params = dataclasses.replace(dataset.setup.params, n_modes=ng)
        result.reports[ng] = evaluate_hesn_ensemble(
            dataset, base_config, rom_params, n_seeds=n_seeds,
            discard=discard, workers=workers, keep_columns=keep_columns,
            trainer=trainer,
        )
    return result


# ---------------------------------------------------------------------------
# Hyperparameter grid search


GRID_FIELDS = ("sigma_in", "rho", "gamma")
_CONFIG_FIELDS = {"sigma_in": "sigma_in", "rho": "spectral_radius",
                  "gamma": "gamma"}


@dataclass(frozen=True)
class GridCell:
    """One evaluated point of the hyperparameter grid."""

    sigma_in: float
    rho: float
    gamma: float
    objective: float
    failure: Optional[str] = None


@dataclass(eq=False)
class GridResult:
    """Argmin cell plus the complete table, in lexicographic cell order."""

    best: EsnConfig
    best_cell: GridCell
    cells: list[GridCell]

    def rows(self) -> Iterator[tuple[float, float, float, float]]:
        for cell in self.cells:
            yield cell.sigma_in, cell.rho, cell.gamma, cell.objective


def validation_objective(dataset: Dataset,
                         discard: float = 0.0) -> Callable[[EsnConfig], float]:
    """Relative error of the mean acoustic energy on the validation span.

    The returned closure trains a plain network with the candidate
    configuration, runs it closed-loop for exactly the validation span (the
    window right after the training data), and scores its mean acoustic
    energy against the truth average of that window — the test span is
    never touched.
    """
    n_steps = dataset.validation.n_samples

    def objective(config: EsnConfig) -> float:
        prediction = esn_free_run(dataset, config, n_steps)
        predicted = time_average(prediction, ACOUSTIC_ENERGY, discard)
        return relative_error(predicted, dataset.validation_average)

    return objective


def hesn_validation_objective(dataset: Dataset, rom_params: ModelParams,
                              discard: float = 0.0,
                              state_noise: float = DEFAULT_STATE_NOISE,
                              ) -> Callable[[EsnConfig], float]:
    """Hybrid-network analogue of `validation_objective`.

    Trains a single candidate (no statistical validation — the scan itself
    is the selection) and scores the validation span's mean acoustic
    energy.
    """
    n_steps = dataset.validation.n_samples
    trainer = TrainerOptions(validated=False, state_noise=state_noise)

    def objective(config: EsnConfig) -> float:
        prediction, _ = hesn_free_run(dataset, config, rom_params, n_steps,
                                      trainer=trainer)
        predicted = time_average(prediction, ACOUSTIC_ENERGY, discard)
        return relative_error(predicted, dataset.validation_average)

    return objective


def grid_search(grid: Mapping[str, Sequence[float]],
                objective: Callable[[EsnConfig], float],
                base_config: EsnConfig, *, workers: int = 1) -> GridResult:
    """Exhaustive scan of the (sigma_in, rho, gamma) Cartesian product.

    Unlisted axes stay at the base configuration's value. Cells are
    enumerated with axes sorted ascending, so equal objectives resolve to
    the lexicographically smallest (sigma_in, rho, gamma). A cell whose
    evaluation raises or returns a non-finite value scores inf and records
    the reason; it can never be the argmin of a grid with any finite cell.
    """
    unknown = set(grid) - set(GRID_FIELDS)
    if unknown:
        raise InvalidArgumentError(
            f"unknown grid axes {sorted(unknown)}; expected {GRID_FIELDS}"
        )
    axes = []
    for name in GRID_FIELDS:
        values = grid.get(name)
        if values is None or len(values) == 0:
            values = [getattr(base_config, _CONFIG_FIELDS[name])]
        axes.append(sorted(float(v) for v in values))

    points = [(s, r, g) for s in axes[0] for r in axes[1] for g in axes[2]]

    def evaluate(point: tuple[float, float, float]) -> GridCell:
        sigma_in, rho, gamma = point
        config = dataclasses.replace(base_config, sigma_in=sigma_in,
                                     spectral_radius=rho, gamma=gamma)
        try:
            value = float(objective(config))
        except ThermoesnError as exc:
            return GridCell(sigma_in, rho, gamma, math.inf,
                            failure=f"{type(exc).__name__}: {exc}")
        if not math.isfinite(value):
            return GridCell(sigma_in, rho, gamma, math.inf,
                            failure="non-finite objective")
        return GridCell(sigma_in, rho, gamma, value)

    jobs = [(lambda p=point: evaluate(p)) for point in points]
    cells = _run_indexed(jobs, workers)
    best_cell = cells[0]
    for cell in cells[1:]:
        if cell.objective < best_cell.objective:
            best_cell = cell
    best = dataclasses.replace(base_config, sigma_in=best_cell.sigma_in,
                               spectral_radius=best_cell.rho,
                               gamma=best_cell.gamma)
    return GridResult(best=best, best_cell=best_cell, cells=cells)
