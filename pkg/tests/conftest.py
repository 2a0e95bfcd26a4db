"""Shared fixtures: expensive truth integrations and seed ensembles.

Everything here is session-scoped so the chaotic dataset, the periodic
dataset, and the seed ensembles are computed once and reused by the unit
tests and the acceptance gate alike.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from thermoesn import (
    EsnConfig,
    ExperimentSetup,
    ModelParams,
    TrainerOptions,
    build_dataset,
    evaluate_esn_ensemble,
    evaluate_rom,
    hesn_predict,
    hesn_train,
    ng_sweep,
)
from thermoesn.errors import ThermoesnError
from thermoesn.galerkin import delay_steps

FIXTURES = Path(__file__).parent / "fixtures"
REFERENCE_SPEC = json.loads((FIXTURES / "reference_eac.json").read_text())
REFERENCE_EAC = REFERENCE_SPEC["reference_average"]

CHAOTIC = ModelParams()                      # beta=7.0, tau=0.2: chaotic
PERIODIC = ModelParams(beta=6.0, tau=0.3)    # limit cycle
ESN_CFG = EsnConfig()                        # 20 -> 20, rho=0.1
HESN_CFG = EsnConfig(spectral_radius=0.3, n_inputs=40, n_outputs=20)
N_SEEDS = 16
TRACK_COLUMNS = (0, 10)                      # (eta_1, mu_1)

# Wall-clock cost of each expensive fixture, for the acceptance-gate budgets.
TIMINGS: dict[str, float] = {}


@contextmanager
def _timed(name: str):
    start = time.perf_counter()
    yield
    TIMINGS[name] = time.perf_counter() - start


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Repeat the acceptance-gate verdict lines after the test summary."""
    module = sys.modules.get("test_acceptance")
    if module is None:
        for name, candidate in sys.modules.items():
            if name.endswith(".test_acceptance"):
                module = candidate
                break
    results = getattr(module, "RESULTS", None) if module else None
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def dataset():
    """Chaotic-regime truth data with a freshly integrated reference average.

    Built without the pinned fixture value on purpose: the suite checks the
    fresh integration against the fixture, tying the repo constant to the
    code that produced it.
    """
    with _timed("dataset"):
        return build_dataset()


@pytest.fixture(scope="session")
def lc_dataset():
    """Periodic-regime truth data (limit cycle)."""
    return build_dataset(ExperimentSetup(params=PERIODIC))


@pytest.fixture(scope="session")
def tiny_dataset():
    """A short, cheap dataset for plumbing tests that never score accuracy."""
    setup = ExperimentSetup(train_duration=8.0, validation_duration=4.0,
                            horizon=4.0, transient=50.0)
    return build_dataset(setup, reference_average=REFERENCE_EAC)


@pytest.fixture(scope="session")
def esn_report(dataset):
    """Plain-network ensemble over the prediction horizon, 16 seeds."""
    with _timed("esn_report"):
        return evaluate_esn_ensemble(dataset, ESN_CFG, n_seeds=N_SEEDS,
                                     keep_columns=TRACK_COLUMNS)


@pytest.fixture(scope="session")
def rom_report(dataset):
    """One-mode truncated model run over the prediction horizon."""
    with _timed("rom_report"):
        return evaluate_rom(dataset, dataclasses.replace(CHAOTIC, n_modes=1),
                            keep_columns=TRACK_COLUMNS)


@pytest.fixture(scope="session")
def sweep(dataset):
    """Hybrid ensembles at truncation orders 1, 4 and 10, 16 seeds each."""
    with _timed("sweep"):
        return ng_sweep(HESN_CFG, (1, 4, 10), n_seeds=N_SEEDS,
                        dataset=dataset, keep_columns=TRACK_COLUMNS,
                        trainer=TrainerOptions())


@pytest.fixture(scope="session")
def lc_amplitude_runs(lc_dataset):
    """Periodic-regime hybrid predictions per input scale, 16 seeds each.

    Single-candidate, noise-free training with the full-order physical
    attachment, so the closed loop reflects the input scale alone: no
    candidate re-selection and no regularizing noise masks a bad sigma_in.
    """
    dt = lc_dataset.setup.dt
    train = lc_dataset.train
    warm_n = delay_steps(lc_dataset.setup.params.tau, dt) + HESN_CFG.washout
    warm = train.window(train.n_samples - warm_n, train.n_samples)
    runs = {}
    with _timed("lc_amplitude_runs"):
        for sigma_in in (0.03, 0.2):
            predictions = []
            for seed in range(N_SEEDS):
                config = dataclasses.replace(HESN_CFG, sigma_in=sigma_in,
                                             seed=seed)
                try:
                    model, _ = hesn_train(train, config,
                                          lc_dataset.setup.params,
                                          state_noise=0.0)
                    predictions.append(
                        hesn_predict(model, warm, lc_dataset.horizon_steps))
                except ThermoesnError:
                    predictions.append(None)
            runs[sigma_in] = predictions
    return runs
