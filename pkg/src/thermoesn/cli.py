"""Command-line experiment harness.

Subcommands cover the whole workflow: `simulate` writes truth data,
`train`/`predict` persist and replay one network through a checkpoint,
`evaluate` scores attractor averages for any predictor, `sweep-ng` scans
the hybrid's model order, `grid-search` scans network hyperparameters,
`lyapunov` estimates the leading exponent of the configured model, and
`plot` renders any produced CSV to a deterministic SVG.

Every subcommand reads an optional config file (flat `key = value`; see the
`config` module) and accepts `--set key=value` overrides; flags beat the
file, the file beats the defaults. Artifacts embed a manifest line
(`# manifest: subcommand, config-hash, seed, version`) so each one can be
reproduced from its settings. Report subcommands write a CSV, a structured
text summary, and a PNG figure side by side.

Errors exit with a single-line `error: <Type>: <message>` on stderr and a
distinct status: 2 for configuration problems, 3 for missing files, 4 for
dimension mismatches, 5 for numerical blowups, 1 otherwise.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import evaluation, galerkin
from .checkpoint import load_checkpoint, save_checkpoint
from .config import (
    ExperimentConfig,
    apply_overrides,
    manifest_line,
    parse_config,
)
from .errors import ConfigError, InsufficientDataError, ThermoesnError
from .evaluation import (
    EvalReport,
    GridResult,
    SweepResult,
    TrainerOptions,
    build_dataset,
)
from .galerkin import delay_steps
from .hybrid import HybridEsn, hesn_predict, hesn_train, hesn_train_validated
from .reservoir import predict_closed_loop, train_esn
from .series import read_csv_columns, read_state_csv, write_csv, write_state_csv
from .svgplot import emit_plot
from .version import VERSION

EXIT_CODES_HELP = """\
exit codes:
  0  success
  1  runtime failure (training, data, or I/O errors not listed below)
  2  configuration error (bad key, bad value, bad combination)
  3  missing input file
  4  dimension mismatch between artifacts
  5  numerical blowup during integration or closed-loop prediction
"""


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH",
                        help="config file (flat key = value)")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="override any config key (repeatable)")
    parser.add_argument("--seed", type=int, help="shorthand for esn.seed")
    parser.add_argument("--mode", choices=("esn", "hesn", "rom"),
                        help="shorthand for run.mode")
    parser.add_argument("--workers", type=int,
                        help="shorthand for run.workers")


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        config = parse_config(args.config)
    else:
        config = ExperimentConfig()
    overrides: list[tuple[str, str]] = []
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got '{item}'")
        overrides.append((key.strip(), value.strip()))
    if args.seed is not None:
        overrides.append(("esn.seed", str(args.seed)))
    if args.mode is not None:
        overrides.append(("run.mode", args.mode))
    if args.workers is not None:
        overrides.append(("run.workers", str(args.workers)))
    return apply_overrides(config, overrides)


def _trainer_options(config: ExperimentConfig) -> TrainerOptions:
    return TrainerOptions(
        validated=config.validated,
        state_noise=config.state_noise,
        candidates=config.candidates,
        accept_threshold=config.accept_threshold,
        valid_threshold=config.valid_threshold,
    )


def _report_dir(config: ExperimentConfig) -> Path:
    directory = Path(config.report_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "n/a"
    return f"{value:.6g}"


def _summarize_report(report: EvalReport, label: str) -> str:
    lines = [
        f"[{label}]",
        f"reference_average   = {_fmt(report.reference_average)}",
        f"predicted_average   = {_fmt(report.predicted_average)}",
        f"relative_error      = {_fmt(report.relative_error)}",
        f"horizon             = {_fmt(report.horizon)}",
        f"n_prediction_steps  = {report.n_prediction_steps}",
    ]
    if report.per_seed:
        lines.append(
            f"valid_seeds         = {report.n_valid}/{len(report.per_seed)}"
        )
        lines.append(
            "median_flag         = "
            + ("ok" if report.median_valid else "INVALID (under half valid)")
        )
        for run in report.per_seed:
            if run.valid:
                extra = ""
                if run.validation_error is not None:
                    extra = (f"  candidates={run.n_candidates}"
                             f"  validation={_fmt(run.validation_error)}")
                lines.append(
                    f"  seed {run.seed:3d}: error={_fmt(run.relative_error)}"
                    f"{extra}"
                )
            else:
                lines.append(f"  seed {run.seed:3d}: FAILED ({run.failure})")
    return "\n".join(lines)


def _write_summary(path: Path, text: str, manifest: str) -> None:
    path.write_text(manifest + "\n" + text + "\n")


# ---------------------------------------------------------------------------
# Subcommand handlers


def cmd_simulate(args: argparse.Namespace, config: ExperimentConfig) -> int:
    params = config.model_params()
    series, _ = galerkin.simulate(params, config.dt,
                                  duration=config.duration,
                                  transient=config.transient)
    u_f = galerkin.flame_velocity(series.states, params.x_f)
    write_state_csv(config.data_path, series, u_f=u_f,
                    manifest=manifest_line("simulate", config))
    print(f"wrote {config.data_path}: {series.n_samples} samples, "
          f"{series.dim} state columns + u_f")
    return 0


def _training_window(config: ExperimentConfig):
    data = read_state_csv(config.data_path)
    if data.n_samples < config.train_samples:
        raise InsufficientDataError(
            f"{config.data_path} holds {data.n_samples} samples; "
            f"run.train_samples = {config.train_samples}"
        )
    return data, data.window(0, config.train_samples)


def cmd_train(args: argparse.Namespace, config: ExperimentConfig) -> int:
    data, train = _training_window(config)
    if config.mode == "esn":
        model, diagnostics = train_esn(train, config.esn_config())
        note = ""
    elif config.mode == "hesn":
        esn_config = config.esn_config()
        rom_params = config.rom_params()
        if config.validated:
            n_val = int(round(config.validation_duration / config.dt))
            if data.n_samples < config.train_samples + n_val:
                raise ConfigError(
                    "validated hybrid training needs a validation span after "
                    f"the training window: {config.train_samples + n_val} "
                    f"samples required, {data.n_samples} available "
                    "(set hybrid.validated = false or provide more data)"
                )
            validation = data.window(config.train_samples,
                                     config.train_samples + n_val)
            model, diagnostics, record = hesn_train_validated(
                train, esn_config, rom_params,
                validation_reference=evaluation.time_average(validation),
                horizon_steps=int(round(config.horizon / config.dt)),
                n_candidates=config.candidates,
                accept_threshold=config.accept_threshold,
                valid_threshold=config.valid_threshold,
                state_noise=config.state_noise,
            )
            note = (f", accepted candidate {record.accepted} of "
                    f"{record.n_candidates} (validation error "
                    f"{record.validation_error:.4f})")
        else:
            model, diagnostics = hesn_train(train, esn_config, rom_params,
                                            state_noise=config.state_noise)
            note = ""
    else:
        raise ConfigError("run.mode = rom has nothing to train")
    save_checkpoint(config.checkpoint_path, model,
                    manifest=manifest_line("train", config))
    print(f"wrote {config.checkpoint_path}: training mse "
          f"{diagnostics.mse:.3e} over {diagnostics.n_samples} samples"
          f"{note}")
    return 0


def cmd_predict(args: argparse.Namespace, config: ExperimentConfig) -> int:
    model = load_checkpoint(config.checkpoint_path)
    _, train = _training_window(config)
    n_steps = int(round(config.horizon / config.dt))
    if isinstance(model, HybridEsn):
        warm_n = delay_steps(model.rom_params.tau, model.dt) + config.washout
        warm = train.window(train.n_samples - warm_n, train.n_samples)
        prediction = hesn_predict(model, warm, n_steps)
    else:
        warm = train.window(train.n_samples - config.washout, train.n_samples)
        prediction = predict_closed_loop(model, warm, n_steps)
    write_state_csv(config.prediction_path, prediction,
                    manifest=manifest_line("predict", config))
    print(f"wrote {config.prediction_path}: {prediction.n_samples} steps "
          f"from t = {prediction.t0:g}")
    return 0


def cmd_evaluate(args: argparse.Namespace, config: ExperimentConfig) -> int:
    dataset = build_dataset(config.experiment_setup())
    if config.mode == "rom":
        report = evaluation.evaluate_rom(dataset, config.rom_params(),
                                         config.discard)
    elif config.mode == "esn":
        report = evaluation.evaluate_esn_ensemble(
            dataset, config.esn_config(), n_seeds=config.n_seeds,
            discard=config.discard, workers=config.workers,
        )
    else:
        report = evaluation.evaluate_hesn_ensemble(
            dataset, config.esn_config(), config.rom_params(),
            n_seeds=config.n_seeds, discard=config.discard,
            workers=config.workers, trainer=_trainer_options(config),
        )
    manifest = manifest_line("evaluate", config)
    directory = _report_dir(config)
    rows = [(float(run.seed),
             run.relative_error if run.valid else math.nan)
            for run in report.per_seed]
    write_csv(directory / "evaluate_report.csv", ["seed", "relative_error"],
              np.asarray(rows), manifest=manifest)
    summary = _summarize_report(report, f"evaluate mode={config.mode}")
    _write_summary(directory / "evaluate_summary.txt", summary, manifest)
    from .figures import save_eval_figure

    save_eval_figure(report, directory / "evaluate_errors.png",
                     title=f"mode={config.mode}")
    print(summary)
    print(f"wrote {directory}/evaluate_report.csv, evaluate_summary.txt, "
          "evaluate_errors.png")
    return 0


def cmd_sweep_ng(args: argparse.Namespace, config: ExperimentConfig) -> int:
    dataset = build_dataset(config.experiment_setup())
    result = evaluation.ng_sweep(
        config.esn_config("hesn"), config.sweep_ng, config.n_seeds,
        config.horizon, dataset=dataset, discard=config.discard,
        workers=config.workers, trainer=_trainer_options(config),
    )
    manifest = manifest_line("sweep-ng", config)
    directory = _report_dir(config)
    rows = np.asarray([(float(ng), float(seed), err)
                       for ng, seed, err in result.rows()])
    write_csv(directory / "sweep_ng.csv", ["ng", "seed", "relative_error"],
              rows, manifest=manifest)
    blocks = [_summarize_report(report, f"rom modes = {ng}")
              for ng, report in result.reports.items()]
    summary = "\n\n".join(blocks)
    _write_summary(directory / "sweep_ng_summary.txt", summary, manifest)
    from .figures import save_sweep_figure

    save_sweep_figure(result, directory / "sweep_ng.png")
    print(summary)
    print(f"wrote {directory}/sweep_ng.csv, sweep_ng_summary.txt, sweep_ng.png")
    return 0


def _summarize_grid(result: GridResult) -> str:
    best = result.best_cell
    lines = [
        "[grid search]",
        f"cells               = {len(result.cells)}",
        f"best sigma_in       = {best.sigma_in:g}",
        f"best rho            = {best.rho:g}",
        f"best gamma          = {best.gamma:g}",
        f"best objective      = {_fmt(best.objective)}",
    ]
    failures = [cell for cell in result.cells if cell.failure]
    for cell in failures:
        lines.append(
            f"  failed cell ({cell.sigma_in:g}, {cell.rho:g}, "
            f"{cell.gamma:g}): {cell.failure}"
        )
    return "\n".join(lines)


def cmd_grid_search(args: argparse.Namespace, config: ExperimentConfig) -> int:
    grid = {}
    if config.grid_sigma_in:
        grid["sigma_in"] = config.grid_sigma_in
    if config.grid_rho:
        grid["rho"] = config.grid_rho
    if config.grid_gamma:
        grid["gamma"] = config.grid_gamma
    if not grid:
        raise ConfigError(
            "configure at least one axis: grid.sigma_in, grid.rho, grid.gamma"
        )
    dataset = build_dataset(config.experiment_setup())
    if config.mode == "esn":
        objective = evaluation.validation_objective(dataset, config.discard)
    elif config.mode == "hesn":
        objective = evaluation.hesn_validation_objective(
            dataset, config.rom_params(), config.discard, config.state_noise,
        )
    else:
        raise ConfigError("grid search needs run.mode = esn or hesn")
    result = evaluation.grid_search(grid, objective,
                                    config.esn_config(config.mode),
                                    workers=config.workers)
    manifest = manifest_line("grid-search", config)
    directory = _report_dir(config)
    rows = np.asarray(list(result.rows()))
    write_csv(directory / "grid_search.csv",
              ["sigma_in", "rho", "gamma", "objective"], rows,
              manifest=manifest)
    summary = _summarize_grid(result)
    _write_summary(directory / "grid_search_summary.txt", summary, manifest)
    from .figures import save_grid_figure

    save_grid_figure(result, directory / "grid_search.png")
    print(summary)
    print(f"wrote {directory}/grid_search.csv, grid_search_summary.txt, "
          "grid_search.png")
    return 0


def cmd_lyapunov(args: argparse.Namespace, config: ExperimentConfig) -> int:
    exponent = galerkin.lyapunov_leading(
        config.model_params(), config.dt,
        t_total=config.lyapunov_duration, seed=config.seed,
        transient=config.transient,
    )
    print(manifest_line("lyapunov", config))
    print(f"lambda_1 = {exponent:.6f}")
    return 0


def cmd_plot(args: argparse.Namespace, config: ExperimentConfig) -> int:
    if args.columns is not None:
        columns = [name.strip() for name in args.columns.split(",")
                   if name.strip()]
        if not columns:
            raise ConfigError("--columns expects a comma-separated name list")
    else:
        header, _ = read_csv_columns(args.csv)
        columns = header
        if args.phase:
            raise ConfigError(
                "--phase needs exactly two columns; pass --columns x,y"
            )
    emit_plot(args.csv, columns, args.out, phase=args.phase,
              manifest=manifest_line("plot", config))
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoesn",
        description=(
            "Echo-state-network experiments on a time-delayed thermoacoustic "
            "model: learn long-time attractor averages with plain and "
            "model-augmented reservoirs."
        ),
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, handler, help_text, configure=None):
        p = sub.add_parser(name, help=help_text,
                           epilog=EXIT_CODES_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        _add_common(p)
        if configure is not None:
            configure(p)
        p.set_defaults(handler=handler)
        return p

    def simulate_opts(p):
        p.add_argument("--duration", type=float, help="span to record")
        p.add_argument("--out", help="shorthand for paths.data")

    def data_opts(p):
        p.add_argument("--data", help="shorthand for paths.data")
        p.add_argument("--checkpoint", help="shorthand for paths.checkpoint")

    def predict_opts(p):
        data_opts(p)
        p.add_argument("--horizon", type=float, help="prediction span")
        p.add_argument("--out", help="shorthand for paths.prediction")

    def report_opts(p):
        p.add_argument("--n-seeds", type=int, help="ensemble size")
        p.add_argument("--horizon", type=float, help="prediction span")
        p.add_argument("--rom-ng", type=int,
                       help="modes resolved by the physical model")
        p.add_argument("--report-dir", help="shorthand for paths.report_dir")

    add("simulate", cmd_simulate, "integrate the full model, write truth CSV",
        simulate_opts)
    add("train", cmd_train, "train one network on truth data, save checkpoint",
        data_opts)
    add("predict", cmd_predict, "closed-loop prediction from a checkpoint",
        predict_opts)
    add("evaluate", cmd_evaluate,
        "score attractor averages for the configured predictor", report_opts)
    add("sweep-ng", cmd_sweep_ng,
        "hybrid error vs resolved model order (per-seed medians)", report_opts)
    add("grid-search", cmd_grid_search,
        "scan network hyperparameters on the validation span", report_opts)
    add("lyapunov", cmd_lyapunov,
        "estimate the leading Lyapunov exponent of the configured model")
    plot = add("plot", cmd_plot, "render a produced CSV to deterministic SVG")
    plot.add_argument("csv", help="input CSV path")
    plot.add_argument("out", help="output SVG path")
    plot.add_argument("--columns", help="comma-separated column names")
    plot.add_argument("--phase", action="store_true",
                      help="two-column phase portrait instead of lines")
    return parser


_FLAG_KEYS = (
    ("duration", "run.duration"),
    ("horizon", "run.horizon"),
    ("n_seeds", "run.n_seeds"),
    ("rom_ng", "run.rom_ng"),
    ("data", "paths.data"),
    ("checkpoint", "paths.checkpoint"),
    ("report_dir", "paths.report_dir"),
)


def _flag_overrides(args: argparse.Namespace) -> list[tuple[str, str]]:
    overrides = []
    for attr, key in _FLAG_KEYS:
        value = getattr(args, attr, None)
        if value is not None:
            overrides.append((key, str(value)))
    if args.subcommand == "simulate" and getattr(args, "out", None):
        overrides.append(("paths.data", args.out))
    if args.subcommand == "predict" and getattr(args, "out", None):
        overrides.append(("paths.prediction", args.out))
    return overrides


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        apply_overrides(config, _flag_overrides(args))
        return args.handler(args, config)
    except ThermoesnError as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
