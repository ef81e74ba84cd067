"""Flat key=value configuration with defaults matching the benchmark protocol.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment. Unknown keys are rejected. Command-line overrides take precedence
over the file, which takes precedence over the defaults below. The fully
resolved mapping can be echoed back to disk in the same format and reused
to reproduce a run bit for bit.
"""

from __future__ import annotations

from .experiment import ExperimentConfig
from .network import Topology
from .series import MackeyGlassParams

__all__ = [
    "ConfigError",
    "DEFAULTS",
    "parse_config_file",
    "resolve_config",
    "build_experiment_config",
    "write_config_echo",
]


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


# key -> (type converter, default). Numeric defaults follow the benchmark
# protocol so a bare `compare` reproduces it.
DEFAULTS: dict[str, tuple] = {
    # series generation
    "mg_a": (float, 0.2),
    "mg_b": (float, 0.1),
    "mg_delay": (float, 20.0),
    "mg_exponent": (float, 10.0),
    "mg_initial_value": (float, 1.2),
    "mg_horizon": (float, 3000.0),
    "mg_integration_step": (float, 0.1),
    "mg_sample_interval": (float, 1.0),
    # noise and windowing
    "snr_db": (float, 30.0),
    "noise_scope": (str, "train_only"),
    "train_lo": (int, 100),
    "train_hi": (int, 2500),
    "test_lo": (int, 2501),
    "test_hi": (int, 3000),
    "lag_count": (int, 2),
    # topologies
    "rbf_spatial_size": (int, 20),
    "strbf_spatial_size": (int, 10),
    "strbf_temporal_depth": (int, 2),
    "strbf_branch_input": (str, "per_lag"),
    "kernel": (str, "gaussian"),
    # learning
    "eta_rbf": (float, 1e-2),
    "eta_strbf": (float, 5e-2),
    "spread_scale_rbf": (float, 1.0),
    "spread_scale_strbf": (float, 0.5),
    "weight_init_bound": (float, 0.5),
    "epochs": (int, 1),
    # kernel initialization
    "kmeans_max_iters": (int, 100),
    "kmeans_tol": (float, 1e-6),
    "kmeans_init": (str, "sample"),
    # benchmark harness
    "runs": (int, 100),
    "base_seed": (int, 42),
    "smoothing_window": (int, 50),
    # cli output
    "out": (str, "results"),
    "plot": (_bool, False),
}


def parse_config_file(path) -> dict:
    """Read a key=value file; reject unknown keys and malformed lines."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, _, text = line.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            conv = DEFAULTS[key][0]
            try:
                values[key] = conv(text.strip())
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_config(file_values: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then file values, then explicit overrides."""
    resolved = {key: default for key, (_, default) in DEFAULTS.items()}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown key {key!r}")
            conv = DEFAULTS[key][0]
            resolved[key] = conv(value) if isinstance(value, str) else value
    return resolved


def build_experiment_config(resolved: dict) -> ExperimentConfig:
    params = MackeyGlassParams(
        a=resolved["mg_a"],
        b=resolved["mg_b"],
        delay=resolved["mg_delay"],
        exponent=resolved["mg_exponent"],
        initial_value=resolved["mg_initial_value"],
        horizon=resolved["mg_horizon"],
        integration_step=resolved["mg_integration_step"],
        sample_interval=resolved["mg_sample_interval"],
    )
    lag = resolved["lag_count"]
    rbf_topology = Topology(
        kind="rbf",
        spatial_size=resolved["rbf_spatial_size"],
        temporal_depth=1,
        input_dim=lag,
    )
    strbf_topology = Topology(
        kind="strbf",
        spatial_size=resolved["strbf_spatial_size"],
        temporal_depth=resolved["strbf_temporal_depth"],
        input_dim=lag,
        branch_input=resolved["strbf_branch_input"],
    )
    return ExperimentConfig(
        series=params,
        snr_db=resolved["snr_db"],
        noise_scope=resolved["noise_scope"],
        train_range=(resolved["train_lo"], resolved["train_hi"]),
        test_range=(resolved["test_lo"], resolved["test_hi"]),
        lag_count=lag,
        rbf_topology=rbf_topology,
        strbf_topology=strbf_topology,
        kernel=resolved["kernel"],
        eta_rbf=resolved["eta_rbf"],
        eta_strbf=resolved["eta_strbf"],
        spread_scale_rbf=resolved["spread_scale_rbf"],
        spread_scale_strbf=resolved["spread_scale_strbf"],
        weight_init_bound=resolved["weight_init_bound"],
        kmeans_max_iters=resolved["kmeans_max_iters"],
        kmeans_tol=resolved["kmeans_tol"],
        kmeans_init=resolved["kmeans_init"],
        runs=resolved["runs"],
        base_seed=resolved["base_seed"],
        epochs=resolved["epochs"],
        smoothing_window=resolved["smoothing_window"],
    )


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_config_echo(resolved: dict, path) -> None:
    """Write the resolved configuration; the file re-parses identically."""
    with open(path, "w") as fh:
        for key in sorted(resolved):
            fh.write(f"{key} = {_format_value(resolved[key])}\n")
