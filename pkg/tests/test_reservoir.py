"""Echo-state-network tests: matrix generation, training, closed loop."""

from __future__ import annotations

import dataclasses
import functools
import math

import numpy as np
import pytest

from thermoesn.errors import (
    DimensionMismatchError,
    InsufficientDataError,
    InvalidArgumentError,
    SingularSystemError,
    SpectralRadiusError,
    UntrainedReadoutError,
)
from thermoesn.galerkin import simulate
from thermoesn.reservoir import (
    EsnConfig,
    Reservoir,
    collect_states,
    effective_ridge,
    init_reservoir,
    predict_closed_loop,
    spectral_radius,
    step,
    train_esn,
    train_readout,
)
from thermoesn.series import TimeSeries

from conftest import CHAOTIC


@functools.lru_cache(maxsize=1)
def _small_train() -> TimeSeries:
    """A short chaotic window, enough for washout plus a few hundred pairs."""
    series, _ = simulate(CHAOTIC, duration=6.0)
    return series


def _trained_small(seed: int = 0) -> tuple[Reservoir, EsnConfig]:
    config = EsnConfig(seed=seed)
    reservoir, _ = train_esn(_small_train(), config)
    return reservoir, config


# ---------------------------------------------------------------------------
# Matrix generation


def test_init_reservoir_deterministic():
    config = EsnConfig(seed=11)
    a = init_reservoir(config)
    b = init_reservoir(config)
    np.testing.assert_array_equal(a.w_in, b.w_in)
    np.testing.assert_array_equal(a.w, b.w)
    c = init_reservoir(dataclasses.replace(config, seed=12))
    assert not np.array_equal(a.w, c.w)


def test_spectral_radius_within_tolerance():
    for seed in range(5):
        config = EsnConfig(seed=seed, spectral_radius=0.3)
        measured = spectral_radius(init_reservoir(config).w)
        assert 0.2997 <= measured <= 0.3003, f"seed {seed}: {measured}"


def test_adjacency_sparsity_binomial():
    # Central 99.9% interval of Binomial(100*100, 0.03).
    for seed in range(10):
        nnz = int(np.count_nonzero(init_reservoir(EsnConfig(seed=seed)).w))
        assert 235 <= nnz <= 367, f"seed {seed}: {nnz} nonzeros"


def test_input_weights_bounded_by_sigma():
    config = EsnConfig(seed=3, sigma_in=0.2)
    reservoir = init_reservoir(config)
    assert reservoir.w_in.shape == (100, 20)
    assert np.abs(reservoir.w_in).max() <= 0.2


def test_zero_adjacency_rejected():
    # A density so small that no entry is drawn cannot be scaled to the
    # requested spectral radius.
    with pytest.raises(SpectralRadiusError):
        init_reservoir(EsnConfig(seed=0, density=1e-9))


# ---------------------------------------------------------------------------
# State update


def test_step_zero_fixed_point():
    reservoir = init_reservoir(EsnConfig(seed=0))
    reservoir.x = np.zeros(100)
    assert np.all(step(reservoir, np.zeros(20)) == 0.0)


def test_step_stays_in_tanh_range():
    reservoir = init_reservoir(EsnConfig(seed=0, sigma_in=5.0))
    rng = np.random.default_rng(0)
    reservoir.x = rng.uniform(-1, 1, 100)
    out = step(reservoir, rng.uniform(-10, 10, 20))
    # saturated units round to exactly 1.0, so the bound is inclusive
    assert np.all(np.abs(out) <= 1.0)


def test_step_scalar_oracle():
    reservoir = Reservoir(w_in=np.array([[2.0]]), w=np.array([[0.5]]),
                          x=np.array([0.1]))
    out = step(reservoir, np.array([1.0]))
    assert out[0] == pytest.approx(math.tanh(2.0 * 1.0 + 0.5 * 0.1),
                                   rel=1e-12)


def test_step_dimension_mismatch():
    reservoir = init_reservoir(EsnConfig(seed=0))
    reservoir.x = np.zeros(100)
    with pytest.raises(DimensionMismatchError):
        step(reservoir, np.zeros(7))


# ---------------------------------------------------------------------------
# State harvesting


def test_collect_states_shapes_and_targets():
    data = _small_train()
    config = EsnConfig(seed=0, washout=100)
    reservoir = init_reservoir(config)
    x_mat, y_mat = collect_states(reservoir, data, config.washout)
    n_cols = data.n_samples - config.washout - 1
    assert x_mat.shape == (100, n_cols)
    assert y_mat.shape == (20, n_cols)
    np.testing.assert_array_equal(y_mat.T, data.states[config.washout + 1:])


def test_collect_states_deterministic_and_from_zero():
    data = _small_train().window(0, 150)
    reservoir = init_reservoir(EsnConfig(seed=4))
    x1, _ = collect_states(reservoir, data, 0)
    x2, _ = collect_states(reservoir, data, 0)
    np.testing.assert_array_equal(x1, x2)
    # Column n holds the state after absorbing input n, starting from zero.
    x = np.zeros(100)
    for n in range(3):
        x = np.tanh(reservoir.w_in @ data.states[n] + reservoir.w @ x)
        np.testing.assert_array_equal(x1[:, n], x)


def test_collect_states_insufficient_data():
    data = _small_train().window(0, 50)
    reservoir = init_reservoir(EsnConfig(seed=0))
    with pytest.raises(InsufficientDataError):
        collect_states(reservoir, data, 100)


# ---------------------------------------------------------------------------
# Ridge readout


def test_ridge_identity_case():
    eye = np.eye(5)
    w_out = train_readout(eye, eye, 0.0)
    np.testing.assert_allclose(w_out, eye, atol=1e-12)


def test_ridge_matches_dense_oracle():
    rng = np.random.default_rng(42)
    x = rng.standard_normal((5, 40))
    y = rng.standard_normal((3, 40))
    gamma = 1e-7
    w_out = train_readout(x, y, gamma)
    oracle = np.linalg.solve(x @ x.T + gamma * np.eye(5), x @ y.T).T
    err = np.abs(w_out - oracle).max() / np.abs(oracle).max()
    assert err < 1e-8


def test_ridge_huge_gamma_shrinks_readout():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, (5, 40))
    y = rng.uniform(-1, 1, (3, 40))
    w_out = train_readout(x, y, 1e12)
    assert np.linalg.norm(w_out) < 1e-6


def test_ridge_singular_without_regularization():
    x = np.zeros((3, 10))
    y = np.ones((2, 10))
    with pytest.raises(SingularSystemError):
        train_readout(x, y, 0.0)


def test_ridge_gradient_descent_oracle():
    # Minimize sum||W X - Y||^2 + gamma ||W||^2 by plain gradient descent
    # and compare objective values.
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5, 60))
    y = rng.standard_normal((2, 60))
    gamma = 1e-3

    def objective(w):
        r = w @ x - y
        return float(np.sum(r * r) + gamma * np.sum(w * w))

    w_ridge = train_readout(x, y, gamma)
    w_gd = np.zeros_like(w_ridge)
    step_size = 1.0 / (2.0 * (np.linalg.eigvalsh(x @ x.T).max() + gamma))
    for _ in range(200_000):
        w_gd -= step_size * 2.0 * (w_gd @ x @ x.T - y @ x.T + gamma * w_gd)
    j_ridge, j_gd = objective(w_ridge), objective(w_gd)
    assert abs(j_gd - j_ridge) / j_ridge < 1e-4
    assert j_ridge <= j_gd + 1e-9 * j_gd


def test_readout_first_order_optimality():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((6, 80))
    y = rng.standard_normal((2, 80))
    gamma = 1e-4
    w_out = train_readout(x, y, gamma)

    def objective(w):
        r = w @ x - y
        return float(np.sum(r * r) + gamma * np.sum(w * w))

    base = objective(w_out)
    for _ in range(120):
        d = rng.standard_normal(w_out.shape)
        d *= 1e-3 / np.linalg.norm(d)
        assert objective(w_out + d) >= base - 1e-9 * base


def test_effective_ridge_scales_with_problem_size():
    assert effective_ridge(1e-7, 20, 4899) == pytest.approx(1e-7 * 20 * 4899)
    assert effective_ridge(0.0, 20, 100) == 0.0


def test_train_esn_applies_scaled_ridge():
    data = _small_train()
    config = EsnConfig(seed=2)
    model, diag = train_esn(data, config)
    reservoir = init_reservoir(config)
    x_mat, y_mat = collect_states(reservoir, data, config.washout)
    loading = effective_ridge(config.gamma, config.n_outputs, x_mat.shape[1])
    manual = train_readout(x_mat, y_mat, loading)
    np.testing.assert_array_equal(model.w_out, manual)
    assert diag.mse >= 0.0 and math.isfinite(diag.mse)
    assert diag.n_samples == x_mat.shape[1]
    assert diag.readout_norm == pytest.approx(np.linalg.norm(manual))


# ---------------------------------------------------------------------------
# Closed-loop prediction


def test_predict_requires_trained_readout():
    reservoir = init_reservoir(EsnConfig(seed=0))
    with pytest.raises(UntrainedReadoutError):
        predict_closed_loop(reservoir, _small_train().window(0, 50), 10)


def test_predict_definitional_recursion():
    # Each emitted output is W_out times the previous state, bit-exactly,
    # and timestamps continue the warm window on the shared grid.
    model, config = _trained_small()
    data = _small_train()
    warm = data.window(data.n_samples - config.washout, data.n_samples)
    pred = predict_closed_loop(model, warm, 40)
    x = np.zeros(100)
    for u in warm.states:
        x = np.tanh(model.w_in @ u + model.w @ x)
    outputs = []
    for _ in range(40):
        u = model.w_out @ x
        outputs.append(u)
        x = np.tanh(model.w_in @ u + model.w @ x)
    np.testing.assert_array_equal(pred.states, np.array(outputs))
    assert pred.dt == warm.dt
    assert pred.t0 == pytest.approx(warm.t0 + warm.n_samples * warm.dt)


def test_sign_symmetry():
    # Without bias terms the closed-loop map is odd: negating the
    # post-warmup state negates the whole emitted trajectory.
    model, config = _trained_small()
    data = _small_train()
    warm = data.window(data.n_samples - config.washout, data.n_samples)
    x = np.zeros(100)
    for u in warm.states:
        x = np.tanh(model.w_in @ u + model.w @ x)

    def rollout(x0):
        x_run, outputs = x0.copy(), []
        for _ in range(60):
            u = model.w_out @ x_run
            outputs.append(u)
            x_run = np.tanh(model.w_in @ u + model.w @ x_run)
        return np.array(outputs)

    np.testing.assert_array_equal(rollout(-x), -rollout(x))


def test_effective_matrix_shape():
    model, _ = _trained_small()
    w_eff = model.effective_matrix()
    np.testing.assert_allclose(w_eff, model.w + model.w_in @ model.w_out,
                               rtol=1e-15)


def test_echo_state_decay():
    # With zero input the state contracts to numerical zero at the operating
    # spectral radii; the norm must fall below 1e-6 well within 1e4 steps
    # and never grow along the way.
    for rho in (0.1, 0.3):
        for seed in range(5):
            config = EsnConfig(seed=seed, spectral_radius=rho)
            reservoir = init_reservoir(config)
            rng = np.random.default_rng(seed)
            x = np.tanh(reservoir.w_in @ rng.uniform(-1, 1, 20))
            norms = [float(np.linalg.norm(x))]
            for _ in range(10_000):
                x = np.tanh(reservoir.w @ x)
                norms.append(float(np.linalg.norm(x)))
                if norms[-1] == 0.0:
                    break
            assert min(norms) < 1e-6
            assert np.all(np.diff(norms) <= 0.0)


def test_closed_loop_learns_sine_period():
    # Synthetic benchmark: a sine of period 5 must be reproduced in closed
    # loop with the period recovered to 2% over 50 time units.
    dt, period = 0.02, 5.0
    t = np.arange(0, 60.0, dt)
    data = TimeSeries(dt=dt, t0=0.0,
                      states=np.sin(2 * math.pi * t / period)[:, None])
    config = EsnConfig(n_inputs=1, n_outputs=1, seed=0,
                       spectral_radius=0.8, sigma_in=1.0, gamma=1e-7)
    model, _ = train_esn(data, config)
    warm = data.window(data.n_samples - 200, data.n_samples)
    pred = predict_closed_loop(model, warm, int(round(50.0 / dt)))
    sig = pred.states[:, 0]
    assert np.all(np.isfinite(sig))
    up = np.nonzero((sig[:-1] < 0.0) & (sig[1:] >= 0.0))[0]
    assert len(up) >= 8
    crossings = (up - sig[up] / (sig[up + 1] - sig[up])) * dt
    measured = float(np.mean(np.diff(crossings)))
    assert abs(measured - period) / period < 0.02
    # The oscillation must also persist, not decay toward a fixed point.
    tail = sig[-len(sig) // 5:]
    assert 0.8 < np.abs(tail).max() < 1.2


def test_train_esn_rejects_short_data():
    with pytest.raises(InsufficientDataError):
        train_esn(_small_train().window(0, 80), EsnConfig(seed=0))
