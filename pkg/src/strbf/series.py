"""Mackey-Glass series generation, noise injection, and supervised windowing.

The generator integrates the delay differential equation

    du/dt = a * u(t - delay) / (1 + u(t - delay)**exponent) - b * u(t)

with zero pre-history (u(s) = 0 for s < 0) and a fixed initial value at
t = 0, using classical RK4 on a uniform grid. The delayed state is read
from the accumulated history buffer; half-step stage lookups use cubic
Hermite interpolation built from stored node derivatives, and the jump of
the delayed term at t = delay is resolved with one-sided limits so the
integrator keeps its order when the delay is grid-aligned.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MackeyGlassParams",
    "TimeSeries",
    "WindowedDataset",
    "IntegrationDivergenceError",
    "generate_mackey_glass",
    "add_awgn",
    "make_windows",
    "write_series_csv",
    "read_series_csv",
]

# Relative tolerance for deciding that a time quantity is an exact
# multiple of the integration step.
_GRID_RTOL = 1e-9


class IntegrationDivergenceError(RuntimeError):
    """Integration produced a non-finite state."""

    def __init__(self, time: float):
        self.time = time
        super().__init__(f"integration diverged at t={time:g} s")


@dataclass(frozen=True)
class MackeyGlassParams:
    """Coefficients, delay and discretization settings for the generator.

    ``sample_interval`` must be a positive integer multiple of
    ``integration_step``; the returned series contains the samples
    u(0), u(sample_interval), ..., u(horizon).
    """

    a: float = 0.2
    b: float = 0.1
    delay: float = 20.0
    exponent: float = 10.0
    initial_value: float = 1.2
    horizon: float = 3000.0
    integration_step: float = 0.1
    sample_interval: float = 1.0

    def __post_init__(self):
        if self.delay <= 0:
            raise ValueError(f"delay must be positive, got {self.delay}")
        if self.horizon <= self.delay:
            raise ValueError(
                f"horizon ({self.horizon}) must exceed delay ({self.delay})"
            )
        if self.integration_step <= 0:
            raise ValueError("integration_step must be positive")
        if self.exponent < 1:
            raise ValueError(f"exponent must be >= 1, got {self.exponent}")
        ratio = self.sample_interval / self.integration_step
        if ratio < 1 - _GRID_RTOL or abs(ratio - round(ratio)) > _GRID_RTOL * max(1.0, ratio):
            raise ValueError(
                "sample_interval must be a positive integer multiple of "
                f"integration_step (got ratio {ratio!r})"
            )

    @property
    def sample_stride(self) -> int:
        return int(round(self.sample_interval / self.integration_step))


@dataclass
class TimeSeries:
    """Uniformly sampled scalar sequence."""

    values: np.ndarray
    t0: float = 0.0
    sample_interval: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values must all be finite")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.sample_interval * np.arange(self.values.size)

    def __len__(self) -> int:
        return self.values.size


@dataclass
class WindowedDataset:
    """Supervised (lag vector, next value) pairs cut from a series.

    ``inputs`` has shape (n, lag_count) with the oldest lag first;
    ``targets[i]`` is the series value one step after ``inputs[i][-1]``;
    ``source_indices[i]`` is the series index of ``targets[i]``.
    """

    inputs: np.ndarray
    targets: np.ndarray
    lag_count: int
    source_indices: np.ndarray

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        self.source_indices = np.asarray(self.source_indices, dtype=np.int64)
        if self.inputs.ndim != 2 or self.inputs.shape[1] != self.lag_count:
            raise ValueError(
                f"inputs must have shape (n, {self.lag_count}), got {self.inputs.shape}"
            )
        if len(self.inputs) != len(self.targets) or len(self.targets) != len(self.source_indices):
            raise ValueError("inputs, targets and source_indices must have equal length")

    def __len__(self) -> int:
        return len(self.targets)


def generate_mackey_glass(params: MackeyGlassParams) -> TimeSeries:
    """Integrate the Mackey-Glass equation and sample it.

    Returns the samples u(0), u(sample_interval), ..., u(horizon).
    Raises :class:`IntegrationDivergenceError` if the state leaves the
    representable range, naming the time of failure.
    """
    h = params.integration_step
    n_steps = int(round(params.horizon / h))
    stride = params.sample_stride

    a = float(params.a)
    b = float(params.b)
    n_exp = float(params.exponent)
    if n_exp == int(n_exp):
        n_exp = int(n_exp)  # keeps negative bases legal under **

    delay_steps = params.delay / h
    d_int = int(round(delay_steps))
    aligned = abs(delay_steps - d_int) <= _GRID_RTOL * max(1.0, delay_steps)
    if delay_steps < 1 - _GRID_RTOL:
        raise ValueError(
            "delay must be at least one integration_step "
            f"(delay={params.delay}, step={h})"
        )

    u = np.empty(n_steps + 1)
    du = np.empty(n_steps + 1)  # right-limit derivative at each grid node
    u[0] = params.initial_value
    du[0] = -b * u[0]  # delayed argument is negative at t=0

    def g(v: float) -> float:
        return a * v / (1.0 + v**n_exp)

    # Size of the jump in du/dt where the delayed argument crosses 0.
    jump = g(float(params.initial_value))

    def delayed_mid(j: int) -> float:
        # Delayed value at grid position j + 0.5 (aligned path). Cubic
        # Hermite over [j, j+1]; H(1/2) = (uL+uR)/2 + h*(dL-dR)/8, with the
        # right-node derivative taken as a left limit at the jump node.
        if j < 0:
            return 0.0
        d_right = du[j + 1] - (jump if j + 1 == d_int else 0.0)
        return 0.5 * (u[j] + u[j + 1]) + h * (du[j] - d_right) * 0.125

    def delayed_general(pos: float) -> float:
        if pos < 0.0:
            return 0.0
        j = int(pos)
        frac = pos - j
        if frac == 0.0:
            return u[j]
        d_right = du[j + 1] - (jump if j + 1 == d_int else 0.0)
        uL, uR = u[j], u[j + 1]
        dL, dR = du[j], d_right
        # cubic Hermite basis on the unit interval, scaled by h
        f2 = frac * frac
        f3 = f2 * frac
        return (
            (2 * f3 - 3 * f2 + 1) * uL
            + (f3 - 2 * f2 + frac) * h * dL
            + (-2 * f3 + 3 * f2) * uR
            + (f3 - f2) * h * dR
        )

    sixth = h / 6.0
    try:
        for i in range(n_steps):
            y = u[i]
            if aligned:
                j1 = i - d_int
                ud1 = u[j1] if j1 >= 0 else 0.0  # right limit at the jump
                udm = delayed_mid(i - d_int)
                j4 = i + 1 - d_int
                ud4 = u[j4] if j4 >= 1 else 0.0  # left limit at the jump
            else:
                ud1 = delayed_general(i - delay_steps)
                udm = delayed_general(i + 0.5 - delay_steps)
                ud4 = delayed_general(i + 1.0 - delay_steps)

            k1 = g(ud1) - b * y
            gm = g(udm)
            k2 = gm - b * (y + 0.5 * h * k1)
            k3 = gm - b * (y + 0.5 * h * k2)
            g4 = g(ud4)
            k4 = g4 - b * (y + h * k3)
            y_next = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.isfinite(y_next):
                raise IntegrationDivergenceError((i + 1) * h)
            u[i + 1] = y_next
            # right-limit derivative at the new node (differs from g4 only
            # when the delayed argument lands exactly on the jump)
            if aligned and i + 1 - d_int == 0:
                du[i + 1] = g(u[0]) - b * y_next
            else:
                du[i + 1] = g4 - b * y_next
    except OverflowError:
        raise IntegrationDivergenceError((i + 1) * h) from None

    return TimeSeries(
        values=u[:: stride].copy(),
        t0=0.0,
        sample_interval=params.sample_interval,
    )


def add_awgn(series: TimeSeries, snr_db: float, rng: np.random.Generator) -> TimeSeries:
    """Return a copy of the series with white Gaussian noise at ``snr_db``.

    Noise variance is mean(values**2) / 10**(snr_db/10). An infinite
    ``snr_db`` disables noise and returns an identical copy. The input is
    never modified.
    """
    if np.isnan(snr_db):
        raise ValueError("snr_db must not be NaN")
    values = series.values
    if np.isinf(snr_db) and snr_db > 0:
        return TimeSeries(values.copy(), series.t0, series.sample_interval)
    power = float(np.mean(values**2))
    if power == 0.0:
        raise ValueError("cannot scale noise for an all-zero series (zero signal power)")
    variance = power / 10.0 ** (snr_db / 10.0)
    noisy = values + rng.normal(0.0, np.sqrt(variance), size=values.shape)
    return TimeSeries(noisy, series.t0, series.sample_interval)


def make_windows(
    series: TimeSeries,
    lag_count: int,
    span: tuple[int, int] | None = None,
) -> WindowedDataset:
    """Cut overlapping (lag vector, next value) pairs with stride 1.

    ``span`` is an inclusive index interval (lo, hi); windows are fully
    contained in it: for each position k with lo + lag_count - 1 <= k < hi
    the input is values[k-lag_count+1 .. k] and the target values[k+1].
    """
    if lag_count < 1:
        raise ValueError("lag_count must be >= 1")
    n = len(series)
    lo, hi = (0, n - 1) if span is None else span
    if lo < 0 or hi >= n or lo > hi:
        raise ValueError(f"span ({lo}, {hi}) outside the series [0, {n - 1}]")
    count = hi - lo + 1 - lag_count
    if count < 1:
        raise ValueError(
            f"span of length {hi - lo + 1} too short for lag_count={lag_count}: "
            "no window fits"
        )
    values = series.values
    ks = np.arange(lo + lag_count - 1, hi)
    offsets = np.arange(-lag_count + 1, 1)
    inputs = values[ks[:, None] + offsets[None, :]]
    return WindowedDataset(
        inputs=inputs,
        targets=values[ks + 1],
        lag_count=lag_count,
        source_indices=ks + 1,
    )


def write_series_csv(series: TimeSeries, path) -> None:
    """Write the series as ``t,value`` rows at full double precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for t, v in zip(series.times, series.values):
            writer.writerow([f"{t:.17g}", f"{v:.17g}"])


def read_series_csv(path) -> TimeSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "value"]:
            raise ValueError(f"unexpected series header {header!r}")
        rows = [(float(t), float(v)) for t, v in reader]
    if len(rows) < 2:
        raise ValueError("series file must contain at least two samples")
    times = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    interval = times[1] - times[0]
    return TimeSeries(values=values, t0=times[0], sample_interval=interval)
