"""Acceptance gate: seven end-to-end checks of the scientific claims.

Each test prints one `ACCEPTANCE n: PASS/FAIL` line (repeated after the
run summary) with the measured numbers, then asserts, so a red criterion
is visible at a glance. The expensive artifacts (truth datasets, seed
ensembles, the truncation-order sweep) are session fixtures shared with
the unit tests; wall-clock budgets are checked against the measured build
time of exactly the fixtures each criterion consumes.

The criteria, in order:

1. The full ten-mode model at the operating point is chaotic with a
   leading Lyapunov exponent in [0.09, 0.15].
2. The one-mode truncation of the same point is a clean limit cycle, and
   the alternative operating point is non-chaotic for the full model.
3. Over a 250-time-unit horizon (median of 16 seeds): the one-mode model
   alone misses the attractor average by 35-65%, the plain network by at
   least 30%, while the hybrid of the two stays within 10% and beats the
   plain network at least threefold.
4. Raising the physical model order from 1 to 4 modes shrinks the hybrid's
   median error at least 1.5x; 10 modes is no worse than 4 and not exact.
5. In the periodic regime the hybrid reproduces the limit cycle (amplitude
   within 5% of truth, near-zero section dispersion) for at least 12 of 16
   seeds at input scale 0.03, while scale 0.2 fails for the majority.
6. The fast property checks (integrator order, energy budgets, network
   symmetry, ridge oracle, sparsity, spectral radius, checkpoint
   round-trip, averaging oracle) all re-run clean in under a minute.
7. Every predictor's trajectory leaves the truth track well before t = 60
   (no predictor scores the average by shadowing the signal), with the
   criterion-3 network claims still holding on the same runs.
"""

from __future__ import annotations

import dataclasses
import time

from conftest import CHAOTIC, PERIODIC, TIMINGS, TRACK_COLUMNS
from thermoesn.errors import ThermoesnError
from thermoesn.evaluation import (
    divergence_time,
    oscillation_amplitude,
    poincare_dispersion,
    rms_amplitude,
)
from thermoesn.galerkin import lyapunov_leading, simulate
from thermoesn.series import TimeSeries

RESULTS: list[str] = []


def _report(number: int, ok: bool, detail: str) -> bool:
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def test_criterion_1_full_model_is_chaotic():
    start = time.perf_counter()
    exponent = lyapunov_leading(CHAOTIC, 0.01)
    elapsed = time.perf_counter() - start
    ok = 0.09 <= exponent <= 0.15 and elapsed <= 120.0
    assert _report(
        1, ok,
        f"leading exponent {exponent:.4f} (required [0.09, 0.15]) "
        f"in {elapsed:.0f} s (budget 120 s)",
    )


def test_criterion_2_truncation_and_second_regime():
    start = time.perf_counter()
    cycle, _ = simulate(dataclasses.replace(CHAOTIC, n_modes=1), 0.005,
                        duration=100.0)
    dispersion = poincare_dispersion(cycle, section_column=1, record_column=0)
    exponent = lyapunov_leading(PERIODIC, 0.01)
    elapsed = time.perf_counter() - start
    ok = dispersion < 1e-3 and exponent <= 0.01 and elapsed <= 120.0
    assert _report(
        2, ok,
        f"one-mode section dispersion {dispersion:.2e} (required < 1e-3), "
        f"second-regime exponent {exponent:.4f} (required <= 0.01) "
        f"in {elapsed:.0f} s (budget 120 s)",
    )


def test_criterion_3_hybrid_beats_both_ingredients(esn_report, rom_report,
                                                   sweep):
    rom_err = rom_report.relative_error
    esn_err = esn_report.relative_error
    hesn = sweep.reports[1]
    hesn_err = hesn.relative_error
    elapsed = (TIMINGS["dataset"] + TIMINGS["esn_report"]
               + TIMINGS["rom_report"])
    ok = (
        0.35 <= rom_err <= 0.65
        and esn_err >= 0.30 and esn_report.median_valid
        and hesn_err is not None and hesn_err <= 0.10 and hesn.median_valid
        and esn_err >= 3.0 * hesn_err
        and elapsed <= 600.0
    )
    assert _report(
        3, ok,
        f"truncated model {rom_err:.3f} (required [0.35, 0.65]), "
        f"plain network {esn_err:.3f} (required >= 0.30), "
        f"hybrid {hesn_err:.4f} (required <= 0.10 and >= 3x below plain; "
        f"ratio {esn_err / hesn_err:.1f}) "
        f"in {elapsed:.0f} s (budget 600 s, sweep budgeted in criterion 4)",
    )


def test_criterion_4_error_falls_with_model_order(sweep):
    medians = sweep.medians
    m1, m4, m10 = medians[1], medians[4], medians[10]
    elapsed = TIMINGS["sweep"]
    ok = (
        None not in (m1, m4, m10)
        and m1 >= 1.5 * m4
        and 0.0 < m10 <= m4
        and all(sweep.reports[ng].median_valid for ng in (1, 4, 10))
        and elapsed <= 1800.0
    )
    assert _report(
        4, ok,
        f"median error by resolved modes: 1 -> {m1:.4f}, 4 -> {m4:.4f} "
        f"(required <= {m1 / 1.5:.4f}), 10 -> {m10:.4f} "
        f"(required in (0, {m4:.4f}]) "
        f"in {elapsed:.0f} s (budget 1800 s)",
    )


def _matches_cycle(prediction, amp_eta, amp_mu):
    """True when a prediction reproduces the truth limit cycle to 5%."""
    if prediction is None:
        return False
    try:
        dispersion = poincare_dispersion(prediction, section_column=1,
                                         record_column=0, discard=50.0)
        if dispersion > 0.05 * amp_eta:
            return False
        for column, amplitude in ((0, amp_eta), (1, amp_mu)):
            predicted = oscillation_amplitude(prediction, column,
                                              discard=50.0)
            if abs(predicted - amplitude) > 0.05 * amplitude:
                return False
    except ThermoesnError:
        return False
    return True


def test_criterion_5_input_scale_separates_seeds(lc_dataset,
                                                 lc_amplitude_runs):
    truth = lc_dataset.horizon_truth
    amp_eta = oscillation_amplitude(truth, 0, discard=50.0)
    amp_mu = oscillation_amplitude(truth, 10, discard=50.0)

    counts = {}
    for sigma_in, predictions in lc_amplitude_runs.items():
        tracks = [
            None if p is None else TimeSeries(
                dt=p.dt, t0=p.t0, states=p.states[:, list(TRACK_COLUMNS)])
            for p in predictions
        ]
        counts[sigma_in] = sum(
            _matches_cycle(track, amp_eta, amp_mu) for track in tracks
        )
    n_seeds = len(lc_amplitude_runs[0.03])
    elapsed = TIMINGS["lc_amplitude_runs"]
    ok = counts[0.03] >= 12 and 2 * counts[0.2] < n_seeds
    assert _report(
        5, ok,
        f"cycle reproduced at input scale 0.03 for {counts[0.03]}/{n_seeds} "
        f"seeds (required >= 12), at 0.2 for {counts[0.2]}/{n_seeds} "
        f"(required: majority fail) in {elapsed:.0f} s",
    )


def test_criterion_6_property_suites_rerun_clean():
    import test_checkpoint
    import test_evaluation
    import test_galerkin
    import test_reservoir

    properties = (
        test_galerkin.test_rk4_convergence_order,
        test_galerkin.test_energy_decays_without_forcing,
        test_galerkin.test_energy_conserved_without_damping,
        test_reservoir.test_sign_symmetry,
        test_reservoir.test_ridge_matches_dense_oracle,
        test_reservoir.test_adjacency_sparsity_binomial,
        test_reservoir.test_spectral_radius_within_tolerance,
        test_checkpoint.test_esn_roundtrip_bit_exact,
        test_evaluation.test_time_average_two_pass_oracle,
    )
    start = time.perf_counter()
    failures = []
    for check in properties:
        try:
            check()
        except Exception as exc:  # noqa: BLE001 - report, then fail below
            failures.append(f"{check.__name__}: {exc}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60.0
    detail = (f"{len(properties)} property checks in {elapsed:.1f} s "
              f"(budget 60 s)")
    if failures:
        detail += "; failed: " + "; ".join(failures)
    assert _report(6, ok, detail)


def test_criterion_7_predictions_do_not_shadow_the_signal(dataset,
                                                          esn_report,
                                                          rom_report, sweep):
    truth = dataset.horizon_truth
    threshold = 0.1 * rms_amplitude(truth, TRACK_COLUMNS)
    track = TimeSeries(dt=truth.dt, t0=truth.t0,
                       states=truth.states[:, list(TRACK_COLUMNS)])

    worst = {}
    for label, report in (("truncated model", rom_report),
                          ("plain network", esn_report),
                          ("hybrid", sweep.reports[1])):
        times = [
            divergence_time(run.trajectory, track, (0, 1), threshold)
            for run in report.per_seed if run.valid
        ]
        assert times, f"{label}: no valid seeds to check"
        worst[label] = max(times)

    esn_err = esn_report.relative_error
    hesn_err = sweep.reports[1].relative_error
    ok = (
        all(value <= 60.0 for value in worst.values())
        and esn_err >= 0.30
        and hesn_err <= 0.10
        and esn_err >= 3.0 * hesn_err
    )
    spans = ", ".join(f"{label} {value:.2f}" for label, value in worst.items())
    assert _report(
        7, ok,
        f"latest track departure at t = {spans} (required <= 60 for all "
        f"seeds) with the criterion-3 network claims intact on the same "
        f"runs (plain {esn_err:.3f} >= 0.30, hybrid {hesn_err:.4f} <= 0.10, "
        f"ratio {esn_err / hesn_err:.1f} >= 3)",
    )
