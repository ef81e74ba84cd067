"""Command-line frontend: generate data, train one model, run the benchmark.

Subcommands:
    generate   integrate the Mackey-Glass equation and write series.csv
    train      train a single model with one seed; checkpoint + metrics
    compare    paired Monte-Carlo benchmark of both configurations
    plot       re-render the SVG charts from existing CSV files

Configuration comes from built-in defaults, an optional ``--config`` file
(flat key=value), generic ``--set key=value`` overrides, and dedicated
flags, in increasing order of precedence. Every compare run echoes its
fully resolved configuration next to the outputs.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    build_experiment_config,
    parse_config_file,
    resolve_config,
    write_config_echo,
)
from .experiment import (
    make_run_datasets,
    mse_to_db,
    run_monte_carlo,
    summarize,
    train_single_model,
    write_curve_csv,
    write_predictions_csv,
    write_runs_csv,
    write_summary_csv,
)
from .network import evaluate, load_network_csv, save_network_csv
from .series import generate_mackey_glass, write_series_csv

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key=value config file")
    common.add_argument("--seed", type=int, metavar="N", help="override base_seed")
    common.add_argument("--out", metavar="DIR", help="output directory (default: results)")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        dest="assignments",
        help="override any config key (repeatable)",
    )

    parser = argparse.ArgumentParser(
        prog="strbf",
        description="RBF and spatio-temporal RBF benchmark on Mackey-Glass data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write the series CSV")
    p.add_argument("--a", type=float, help="delayed-term coefficient")
    p.add_argument("--b", type=float, help="decay coefficient")
    p.add_argument("--tau", type=float, help="delay in seconds")
    p.add_argument("--exponent", type=float, help="denominator exponent")
    p.add_argument("--x0", type=float, help="initial value at t=0")
    p.add_argument("--len", type=float, dest="horizon", help="horizon in seconds")
    p.add_argument("--step", type=float, help="integration step in seconds")
    p.add_argument("--sample-interval", type=float, help="sampling interval in seconds")

    p = sub.add_parser("train", parents=[common], help="train one model with one seed")
    p.add_argument("--model", choices=("rbf", "strbf"), required=True)
    p.add_argument("--eta", type=float, help="override the model's learning rate")
    p.add_argument("--epochs", type=int, help="override the epoch count")
    p.add_argument("--eval-only", action="store_true", help="reload a checkpoint and evaluate")
    p.add_argument("--checkpoint", metavar="PATH", help="checkpoint path to write or reload")

    p = sub.add_parser("compare", parents=[common], help="full paired benchmark")
    p.add_argument("--runs", type=int, help="number of Monte-Carlo runs")
    p.add_argument("--plot", action="store_true", help="also render SVG charts")

    sub.add_parser("plot", parents=[common], help="re-render SVGs from existing CSVs")
    return parser


def _resolved_from_args(args) -> dict:
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {}
    for assignment in args.assignments:
        key, sep, value = assignment.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {assignment!r}")
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    return resolve_config(file_values, overrides)


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def cmd_generate(args) -> int:
    flag_map = {
        "a": "mg_a",
        "b": "mg_b",
        "tau": "mg_delay",
        "exponent": "mg_exponent",
        "x0": "mg_initial_value",
        "horizon": "mg_horizon",
        "step": "mg_integration_step",
        "sample_interval": "mg_sample_interval",
    }
    resolved = _resolved_from_args(args)
    for attr, key in flag_map.items():
        value = getattr(args, attr)
        if value is not None:
            resolved[key] = value
    config = build_experiment_config(resolved)
    series = generate_mackey_glass(config.series)
    out_dir = Path(resolved["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "series.csv"
    write_series_csv(series, path)
    _say(
        args,
        f"wrote {path}: {len(series)} samples, "
        f"min={series.values.min():.6g} max={series.values.max():.6g}",
    )
    return 0


def cmd_train(args) -> int:
    resolved = _resolved_from_args(args)
    if args.eta is not None:
        resolved[f"eta_{args.model}"] = args.eta
    if args.epochs is not None:
        resolved["epochs"] = args.epochs
    config = build_experiment_config(resolved)
    out_dir = Path(resolved["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = Path(args.checkpoint) if args.checkpoint else out_dir / f"checkpoint_{args.model}.csv"

    if args.eval_only:
        state = load_network_csv(checkpoint)
        _, _, _, test_set = make_run_datasets(config, 0)
        _, test_mse = evaluate(state, test_set)
        _say(args, f"{args.model}: test_mse={test_mse:.17g} ({mse_to_db(test_mse):.4f} dB)")
        _write_metrics(out_dir / f"metrics_{args.model}.csv", {"test_mse": test_mse,
                                                               "test_mse_db": mse_to_db(test_mse)})
        return 0

    result, _record = train_single_model(config, args.model, run_index=0)
    save_network_csv(result.state, checkpoint)
    metrics = {
        "train_mse": result.train_mse,
        "train_mse_db": mse_to_db(result.train_mse) if np.isfinite(result.train_mse) else float("nan"),
        "test_mse": result.test_mse,
        "test_mse_db": mse_to_db(result.test_mse),
    }
    _write_metrics(out_dir / f"metrics_{args.model}.csv", metrics)
    _say(
        args,
        f"{args.model}: train_mse={result.train_mse:.17g} ({metrics['train_mse_db']:.4f} dB), "
        f"test_mse={result.test_mse:.17g} ({metrics['test_mse_db']:.4f} dB)",
    )
    _say(args, f"checkpoint written to {checkpoint}")
    return 0


def _write_metrics(path, metrics: dict) -> None:
    with open(path, "w") as fh:
        fh.write("metric,value\n")
        for key, value in metrics.items():
            fh.write(f"{key},{value:.17g}\n")


def cmd_compare(args) -> int:
    resolved = _resolved_from_args(args)
    if args.runs is not None:
        resolved["runs"] = args.runs
    if args.plot:
        resolved["plot"] = True
    config = build_experiment_config(resolved)

    out_dir = Path(resolved["out"])
    created_dir = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, writer) -> None:
        path = out_dir / name
        writer(path)
        written.append(path)

    try:
        t0 = time.monotonic()
        result = run_monte_carlo(config)
        elapsed = time.monotonic() - t0
        table = summarize(result.stats["rbf"], result.stats["strbf"])
        window = config.smoothing_window

        emit("config.txt", lambda p: write_config_echo(resolved, p))
        emit("summary.csv", lambda p: write_summary_csv(table, p))
        if result.stats["rbf"].train_curve.size:
            emit("train_curve.csv", lambda p: write_curve_csv(
                result.stats["rbf"], result.stats["strbf"], "train", window, p))
        emit("test_curve.csv", lambda p: write_curve_csv(
            result.stats["rbf"], result.stats["strbf"], "test", window, p))
        emit("predictions.csv", lambda p: write_predictions_csv(result.sample_run, p))
        emit("runs.csv", lambda p: write_runs_csv(result, p))
        if resolved["plot"]:
            from .plots import render_all

            written.extend(render_all(out_dir))
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        if created_dir:
            try:
                out_dir.rmdir()
            except OSError:
                pass
        raise

    _say(args, f"{config.runs} runs in {elapsed:.1f}s -> {out_dir}")
    if not args.quiet:
        print(f"{'phase':<12}{'rbf (dB)':>12}{'strbf (dB)':>12}{'gap (dB)':>12}")
        for phase, rbf_db, strbf_db, gap in table.rows():
            print(f"{phase:<12}{rbf_db:>12.2f}{strbf_db:>12.2f}{gap:>12.2f}")
    return 0


def cmd_plot(args) -> int:
    from .plots import render_all

    resolved = _resolved_from_args(args)
    out_dir = Path(resolved["out"])
    if not out_dir.is_dir():
        raise FileNotFoundError(f"output directory {out_dir} does not exist")
    written = render_all(out_dir)
    if not written:
        raise FileNotFoundError(f"no benchmark CSVs found in {out_dir}")
    _say(args, "rendered " + ", ".join(str(p) for p in written))
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "compare": cmd_compare,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
