"""Paired Monte-Carlo benchmark of the conventional vs spatio-temporal RBF.

Each run derives its own seed from (base_seed, run_index), draws one noisy
realization of the Mackey-Glass series, trains both network configurations
online on identical data, and evaluates them on the validation windows.
Aggregates are linear means over runs, reduced in ascending run order and
reported in dB as 10*log10(mean MSE).
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .network import NetworkState, Topology, evaluate, init_network, train_online
from .series import MackeyGlassParams, TimeSeries, add_awgn, generate_mackey_glass, make_windows

__all__ = [
    "NOISE_SCOPES",
    "ExperimentConfig",
    "ModelRunResult",
    "SingleRunRecord",
    "RunStats",
    "MonteCarloResult",
    "ComparisonTable",
    "default_config",
    "mse_to_db",
    "run_seed",
    "make_run_datasets",
    "run_single",
    "train_single_model",
    "run_monte_carlo",
    "smooth_curve",
    "summarize",
    "write_summary_csv",
    "read_summary_csv",
    "write_curve_csv",
    "write_runs_csv",
    "write_predictions_csv",
]

NOISE_SCOPES = ("train_only", "everywhere", "none")

MODEL_NAMES = ("rbf", "strbf")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full protocol description; defaults reproduce the benchmark setup."""

    series: MackeyGlassParams = MackeyGlassParams()
    snr_db: float = 30.0
    noise_scope: str = "train_only"
    train_range: tuple[int, int] = (100, 2500)
    test_range: tuple[int, int] = (2501, 3000)
    lag_count: int = 2
    rbf_topology: Topology = Topology("rbf", spatial_size=20, temporal_depth=1, input_dim=2)
    strbf_topology: Topology = Topology("strbf", spatial_size=10, temporal_depth=2, input_dim=2)
    kernel: str = "gaussian"
    eta_rbf: float = 1e-2
    eta_strbf: float = 5e-2
    spread_scale_rbf: float = 1.0
    spread_scale_strbf: float = 0.5
    weight_init_bound: float = 0.5
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6
    kmeans_init: str = "sample"
    runs: int = 100
    base_seed: int = 42
    epochs: int = 1
    smoothing_window: int = 50

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.eta_rbf < 0 or self.eta_strbf < 0:
            raise ValueError("learning rates must be non-negative")
        if self.noise_scope not in NOISE_SCOPES:
            raise ValueError(f"unknown noise_scope {self.noise_scope!r}")
        lo1, hi1 = self.train_range
        lo2, hi2 = self.test_range
        if lo1 > hi1 or lo2 > hi2:
            raise ValueError("ranges must be non-empty (lo <= hi)")
        if not (hi1 < lo2 or hi2 < lo1):
            raise ValueError("train_range and test_range must be disjoint")
        if self.lag_count < 1:
            raise ValueError("lag_count must be >= 1")
        for topo in (self.rbf_topology, self.strbf_topology):
            if topo.input_dim != self.lag_count:
                raise ValueError(
                    f"topology input_dim {topo.input_dim} != lag_count {self.lag_count}"
                )


def default_config(**overrides) -> ExperimentConfig:
    """The benchmark protocol with optional field overrides."""
    return replace(ExperimentConfig(), **overrides) if overrides else ExperimentConfig()


def mse_to_db(mse: float) -> float:
    """10*log10(mse); rejects non-positive values."""
    if not np.isfinite(mse) or mse <= 0:
        raise ValueError(f"mse must be positive and finite, got {mse!r}")
    return float(10.0 * np.log10(mse))


def run_seed(base_seed: int, run_index: int) -> int:
    """Stable per-run seed; inserting runs never perturbs existing ones."""
    return int(np.random.SeedSequence([base_seed, run_index]).generate_state(1)[0])


@lru_cache(maxsize=8)
def _clean_series(params: MackeyGlassParams) -> TimeSeries:
    # Cached across runs: the noiseless series depends only on params.
    # Treat the returned object as read-only.
    return generate_mackey_glass(params)


def _noisy_series(config: ExperimentConfig, rng: np.random.Generator) -> TimeSeries:
    clean = _clean_series(config.series)
    if config.noise_scope == "none":
        return TimeSeries(clean.values.copy(), clean.t0, clean.sample_interval)
    if config.noise_scope == "everywhere":
        return add_awgn(clean, config.snr_db, rng)
    lo, hi = config.train_range
    segment = TimeSeries(clean.values[lo : hi + 1], clean.t0 + lo, clean.sample_interval)
    noisy_segment = add_awgn(segment, config.snr_db, rng)
    values = clean.values.copy()
    values[lo : hi + 1] = noisy_segment.values
    return TimeSeries(values, clean.t0, clean.sample_interval)


@dataclass
class ModelRunResult:
    """One model's outcome within a run."""

    train_trace: np.ndarray
    train_mse: float
    test_sq_errors: np.ndarray
    test_mse: float
    predictions: np.ndarray
    state: NetworkState


@dataclass
class SingleRunRecord:
    """Both models trained and evaluated on one shared data realization."""

    run_index: int
    seed: int
    series_digest: str
    test_times: np.ndarray
    test_targets: np.ndarray
    models: dict[str, ModelRunResult] = field(default_factory=dict)


def _train_one(
    config: ExperimentConfig,
    topology: Topology,
    spread_scale: float,
    eta: float,
    train_set,
    test_set,
    rng: np.random.Generator,
) -> ModelRunResult:
    state = init_network(
        topology,
        train_set,
        kernel=config.kernel,
        spread_scale=spread_scale,
        rng=rng,
        weight_init_bound=config.weight_init_bound,
        kmeans_max_iters=config.kmeans_max_iters,
        kmeans_tol=config.kmeans_tol,
        kmeans_init=config.kmeans_init,
    )
    if config.epochs > 0:
        state, trace = train_online(state, train_set, eta, epochs=config.epochs)
    else:
        trace = np.empty(0)
    predictions, test_mse = evaluate(state, test_set)
    sq_errors = (test_set.targets - predictions) ** 2
    train_mse = float(trace.mean()) if trace.size else float("nan")
    return ModelRunResult(
        train_trace=trace,
        train_mse=train_mse,
        test_sq_errors=sq_errors,
        test_mse=test_mse,
        predictions=predictions,
        state=state,
    )


def make_run_datasets(config: ExperimentConfig, run_index: int = 0):
    """One run's seed, noisy series and train/test window sets.

    The noise realization is a pure function of (base_seed, run_index), so
    every consumer of the same run sees the same data.
    """
    seed = run_seed(config.base_seed, run_index)
    noisy = _noisy_series(config, np.random.default_rng([seed, 0]))
    train_set = make_windows(noisy, config.lag_count, config.train_range)
    test_set = make_windows(noisy, config.lag_count, config.test_range)
    return seed, noisy, train_set, test_set


def _new_record(run_index: int, seed: int, noisy: TimeSeries, test_set) -> SingleRunRecord:
    return SingleRunRecord(
        run_index=run_index,
        seed=seed,
        series_digest=hashlib.sha256(noisy.values.tobytes()).hexdigest(),
        test_times=noisy.t0 + noisy.sample_interval * test_set.source_indices,
        test_targets=test_set.targets.copy(),
    )


def run_single(config: ExperimentConfig, run_index: int) -> SingleRunRecord:
    """One paired run: shared noisy series, independent model inits."""
    seed, noisy, train_set, test_set = make_run_datasets(config, run_index)
    record = _new_record(run_index, seed, noisy, test_set)
    plans = {
        "rbf": (config.rbf_topology, config.spread_scale_rbf, config.eta_rbf, 1),
        "strbf": (config.strbf_topology, config.spread_scale_strbf, config.eta_strbf, 2),
    }
    for name, (topology, scale, eta, stream) in plans.items():
        try:
            record.models[name] = _train_one(
                config,
                topology,
                scale,
                eta,
                train_set,
                test_set,
                np.random.default_rng([seed, stream]),
            )
        except Exception as exc:
            raise RuntimeError(f"run {run_index} ({name}) failed: {exc}") from exc
    return record


def train_single_model(
    config: ExperimentConfig, model: str, run_index: int = 0
) -> tuple[ModelRunResult, SingleRunRecord]:
    """Train and evaluate one of the two configurations on one run's data.

    Consumes exactly the random streams that :func:`run_single` would use
    for the same model, so metrics agree with the paired benchmark.
    """
    if model not in MODEL_NAMES:
        raise ValueError(f"model must be one of {MODEL_NAMES}, got {model!r}")
    seed, noisy, train_set, test_set = make_run_datasets(config, run_index)
    record = _new_record(run_index, seed, noisy, test_set)
    if model == "rbf":
        topology, scale, eta, stream = (
            config.rbf_topology,
            config.spread_scale_rbf,
            config.eta_rbf,
            1,
        )
    else:
        topology, scale, eta, stream = (
            config.strbf_topology,
            config.spread_scale_strbf,
            config.eta_strbf,
            2,
        )
    result = _train_one(
        config, topology, scale, eta, train_set, test_set,
        np.random.default_rng([seed, stream]),
    )
    record.models[model] = result
    return result, record


@dataclass
class RunStats:
    """Monte-Carlo aggregate for one model configuration."""

    per_run_train_mse: np.ndarray
    per_run_test_mse: np.ndarray
    mean_train_mse_db: float
    mean_test_mse_db: float
    train_curve: np.ndarray
    test_curve: np.ndarray
    run_seeds: list[int]


@dataclass
class MonteCarloResult:
    config: ExperimentConfig
    stats: dict[str, RunStats]
    sample_run: SingleRunRecord


def _aggregate(records: list[SingleRunRecord], model: str) -> RunStats:
    records = sorted(records, key=lambda r: r.run_index)
    n = len(records)
    first = records[0].models[model]
    train_curve = np.zeros_like(first.train_trace)
    test_curve = np.zeros_like(first.test_sq_errors)
    train_mse = np.empty(n)
    test_mse = np.empty(n)
    for i, rec in enumerate(records):
        res = rec.models[model]
        train_curve += res.train_trace
        test_curve += res.test_sq_errors
        train_mse[i] = res.train_mse
        test_mse[i] = res.test_mse
    if train_curve.size:
        train_curve /= n
    test_curve /= n
    return RunStats(
        per_run_train_mse=train_mse,
        per_run_test_mse=test_mse,
        mean_train_mse_db=mse_to_db(float(train_mse.mean())) if train_curve.size else float("nan"),
        mean_test_mse_db=mse_to_db(float(test_mse.mean())),
        train_curve=train_curve,
        test_curve=test_curve,
        run_seeds=[rec.seed for rec in records],
    )


def run_monte_carlo(config: ExperimentConfig) -> MonteCarloResult:
    """All runs, aggregated in ascending run order; any failure aborts."""
    records = [run_single(config, i) for i in range(config.runs)]
    stats = {name: _aggregate(records, name) for name in MODEL_NAMES}
    return MonteCarloResult(config=config, stats=stats, sample_run=records[0])


def smooth_curve(trace, window: int) -> np.ndarray:
    """Centered moving average with edge truncation; length preserved.

    The window at index i covers [i - (window-1)//2, i + window//2],
    clipped to the trace; window = 1 is the identity.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    trace = np.asarray(trace, dtype=np.float64)
    if window == 1:
        return trace.copy()
    n = trace.size
    left = (window - 1) // 2
    right = window // 2
    out = np.empty(n)
    for i in range(n):
        out[i] = trace[max(0, i - left) : min(n, i + right + 1)].mean()
    return out


@dataclass
class ComparisonTable:
    """Two-row phase table: per-model dB plus the per-phase gap."""

    phases: list[str]
    rbf_mse_db: list[float]
    strbf_mse_db: list[float]
    gap_db: list[float]

    def rows(self):
        return list(zip(self.phases, self.rbf_mse_db, self.strbf_mse_db, self.gap_db))


def summarize(stats_rbf: RunStats, stats_strbf: RunStats) -> ComparisonTable:
    """Learning/validation dB per configuration and the gap per phase.

    The gap is rbf minus strbf, positive when the spatio-temporal variant
    achieves the lower (better) error.
    """
    phases = ["learning", "validation"]
    rbf = [stats_rbf.mean_train_mse_db, stats_rbf.mean_test_mse_db]
    strbf = [stats_strbf.mean_train_mse_db, stats_strbf.mean_test_mse_db]
    gap = [r - s for r, s in zip(rbf, strbf)]
    return ComparisonTable(phases=phases, rbf_mse_db=rbf, strbf_mse_db=strbf, gap_db=gap)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_summary_csv(table: ComparisonTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phase", "rbf_mse_db", "strbf_mse_db", "gap_db"])
        for phase, r, s, g in table.rows():
            writer.writerow([phase, _fmt(r), _fmt(s), _fmt(g)])


def read_summary_csv(path) -> ComparisonTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["phase", "rbf_mse_db", "strbf_mse_db", "gap_db"]:
            raise ValueError(f"unexpected summary header {header!r}")
        rows = list(reader)
    return ComparisonTable(
        phases=[r[0] for r in rows],
        rbf_mse_db=[float(r[1]) for r in rows],
        strbf_mse_db=[float(r[2]) for r in rows],
        gap_db=[float(r[3]) for r in rows],
    )


def write_curve_csv(stats_rbf: RunStats, stats_strbf: RunStats, phase: str, window: int, path) -> None:
    """Per-iteration aggregated curves, raw and smoothed."""
    if phase == "train":
        rbf, strbf = stats_rbf.train_curve, stats_strbf.train_curve
    elif phase == "test":
        rbf, strbf = stats_rbf.test_curve, stats_strbf.test_curve
    else:
        raise ValueError(f"unknown phase {phase!r}")
    rbf_s = smooth_curve(rbf, window)
    strbf_s = smooth_curve(strbf, window)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["iteration", "rbf_mse", "strbf_mse", "rbf_mse_smoothed", "strbf_mse_smoothed"]
        )
        for i in range(rbf.size):
            writer.writerow(
                [i, _fmt(rbf[i]), _fmt(strbf[i]), _fmt(rbf_s[i]), _fmt(strbf_s[i])]
            )


def write_runs_csv(result: MonteCarloResult, path) -> None:
    rbf, strbf = result.stats["rbf"], result.stats["strbf"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "run_index",
                "seed",
                "rbf_train_mse",
                "rbf_test_mse",
                "strbf_train_mse",
                "strbf_test_mse",
            ]
        )
        for i, seed in enumerate(rbf.run_seeds):
            writer.writerow(
                [
                    i,
                    seed,
                    _fmt(rbf.per_run_train_mse[i]),
                    _fmt(rbf.per_run_test_mse[i]),
                    _fmt(strbf.per_run_train_mse[i]),
                    _fmt(strbf.per_run_test_mse[i]),
                ]
            )


def write_predictions_csv(record: SingleRunRecord, path) -> None:
    """Actual vs predicted on the validation windows of one run."""
    rbf = record.models["rbf"].predictions
    strbf = record.models["strbf"].predictions
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "actual", "rbf_pred", "strbf_pred"])
        for t, actual, r, s in zip(record.test_times, record.test_targets, rbf, strbf):
            writer.writerow([_fmt(t), _fmt(actual), _fmt(r), _fmt(s)])
