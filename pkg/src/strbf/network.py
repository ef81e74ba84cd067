"""Conventional and spatio-temporal RBF networks with online gradient descent.

The conventional network maps an input vector u through S radial kernels:

    y = sum_i w_i * psi_i(||u - c_i||) + p

The spatio-temporal variant arranges S x T kernels in T parallel temporal
branches and sums all of them into the same linear output:

    y = sum_i sum_t w_(i,t) * psi_(i,t)(branch_input_t, c_(i,t)) + p

Branch inputs follow one of two routings: ``per_lag`` feeds branch t the
scalar lag component u[t] (one-dimensional kernels), ``full_vector`` feeds
every branch the whole input vector. A conventional network is the T = 1,
full-vector special case.

Training adapts only the link weights and the bias, by stochastic gradient
descent on the squared prediction error: with e = d - y,

    w_(i,t) <- w_(i,t) + eta * psi_(i,t) * e
    p       <- p + eta * e

Centers and spreads stay frozen after initialization.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .kernels import KERNEL_KINDS, KernelSpec, init_kernels, kernel_of_distance

__all__ = [
    "BRANCH_INPUT_MODES",
    "Topology",
    "NetworkState",
    "StepResult",
    "DivergenceError",
    "activation_grid",
    "forward",
    "forward_rbf",
    "forward_strbf",
    "sgd_step",
    "train_online",
    "evaluate",
    "init_network",
    "save_network_csv",
    "load_network_csv",
]

BRANCH_INPUT_MODES = ("per_lag", "full_vector")

# Abort threshold for the online error; runs this far gone never recover.
ERROR_ABORT = 1e6


class DivergenceError(RuntimeError):
    """Online training produced a non-finite or runaway error."""

    def __init__(self, message: str, iteration: int | None = None):
        self.iteration = iteration
        super().__init__(message)


@dataclass(frozen=True)
class Topology:
    """Shape of a network: S kernels per branch, T branches, input width."""

    kind: str
    spatial_size: int
    temporal_depth: int
    input_dim: int
    branch_input: str | None = None

    def __post_init__(self):
        if self.kind not in ("rbf", "strbf"):
            raise ValueError(f"kind must be 'rbf' or 'strbf', got {self.kind!r}")
        if self.spatial_size < 1 or self.temporal_depth < 1 or self.input_dim < 1:
            raise ValueError("spatial_size, temporal_depth and input_dim must be >= 1")
        if self.branch_input is None:
            object.__setattr__(
                self, "branch_input", "full_vector" if self.kind == "rbf" else "per_lag"
            )
        if self.branch_input not in BRANCH_INPUT_MODES:
            raise ValueError(f"unknown branch_input {self.branch_input!r}")
        if self.kind == "rbf":
            if self.temporal_depth != 1:
                raise ValueError("a conventional rbf network has temporal_depth 1")
            if self.branch_input != "full_vector":
                raise ValueError("a conventional rbf network consumes the full input vector")
        if self.kind == "strbf" and self.branch_input == "per_lag":
            if self.temporal_depth != self.input_dim:
                raise ValueError(
                    "per-lag routing needs one temporal branch per lag "
                    f"(temporal_depth={self.temporal_depth}, input_dim={self.input_dim})"
                )

    @property
    def branch_dim(self) -> int:
        return 1 if self.branch_input == "per_lag" else self.input_dim

    @property
    def n_weights(self) -> int:
        return self.spatial_size * self.temporal_depth


@dataclass
class NetworkState:
    """Kernels (frozen) plus the adaptive weights and bias.

    ``centers`` has shape (S, T, branch_dim), ``spreads`` and ``weights``
    shape (S, T); the kernel kind is shared across the grid.
    """

    topology: Topology
    kernel: str
    centers: np.ndarray
    spreads: np.ndarray
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        s, t = self.topology.spatial_size, self.topology.temporal_depth
        self.centers = np.asarray(self.centers, dtype=np.float64)
        self.spreads = np.asarray(self.spreads, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.kernel not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kernel!r}")
        if self.centers.shape != (s, t, self.topology.branch_dim):
            raise ValueError(
                f"centers shape {self.centers.shape} != "
                f"{(s, t, self.topology.branch_dim)}"
            )
        if self.spreads.shape != (s, t) or self.weights.shape != (s, t):
            raise ValueError("spreads and weights must have shape (spatial, temporal)")
        if not np.all(self.spreads > 0):
            raise ValueError("all spreads must be positive")
        if not (np.all(np.isfinite(self.weights)) and np.isfinite(self.bias)):
            raise ValueError("weights and bias must be finite")

    def copy(self) -> "NetworkState":
        return NetworkState(
            topology=self.topology,
            kernel=self.kernel,
            centers=self.centers.copy(),
            spreads=self.spreads.copy(),
            weights=self.weights.copy(),
            bias=self.bias,
        )

    def kernel_grid(self) -> list[list[KernelSpec]]:
        """Materialize the S x T grid as individual kernel specs."""
        return [
            [
                KernelSpec(self.kernel, self.centers[i, t].copy(), float(self.spreads[i, t]))
                for t in range(self.topology.temporal_depth)
            ]
            for i in range(self.topology.spatial_size)
        ]


@dataclass
class StepResult:
    """One forward (and optionally update) step: prediction, error, activations."""

    prediction: float
    activations: np.ndarray
    error: float | None = None


def _branch_inputs(topology: Topology, inputs: np.ndarray) -> np.ndarray:
    """Map (n, input_dim) inputs to (n, T, branch_dim) branch inputs."""
    n = inputs.shape[0]
    if topology.branch_input == "per_lag":
        return inputs[:, :, None]
    return np.broadcast_to(
        inputs[:, None, :], (n, topology.temporal_depth, topology.input_dim)
    )


def activation_grid(state: NetworkState, inputs) -> np.ndarray:
    """Kernel activations for a batch of inputs, shape (n, S, T).

    Centers and spreads are frozen during training, so activations for a
    whole dataset can be computed once and reused across epochs.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    squeeze = inputs.ndim == 1
    if squeeze:
        inputs = inputs[None, :]
    if inputs.shape[1] != state.topology.input_dim:
        raise ValueError(
            f"input dimension {inputs.shape[1]} != topology input_dim "
            f"{state.topology.input_dim}"
        )
    branch = _branch_inputs(state.topology, inputs)  # (n, T, branch_dim)
    diff = branch[:, None, :, :] - state.centers[None, :, :, :]  # (n, S, T, branch_dim)
    d2 = (diff**2).sum(axis=3)
    psi = kernel_of_distance(state.kernel, d2, state.spreads[None, :, :])
    return psi[0] if squeeze else psi


def forward(state: NetworkState, u) -> StepResult:
    """Single forward pass; works for both topologies."""
    psi = activation_grid(state, u)
    y = float(np.dot(state.weights.ravel(), psi.ravel()) + state.bias)
    return StepResult(prediction=y, activations=psi)


def forward_rbf(state: NetworkState, u) -> StepResult:
    if state.topology.kind != "rbf":
        raise ValueError("forward_rbf requires an rbf topology")
    return forward(state, u)


def forward_strbf(state: NetworkState, u) -> StepResult:
    if state.topology.kind != "strbf":
        raise ValueError("forward_strbf requires an strbf topology")
    return forward(state, u)


def sgd_step(
    state: NetworkState, u, d: float, eta: float
) -> tuple[NetworkState, StepResult]:
    """One online update of weights and bias; mutates and returns ``state``.

    The error e = d - y scales the cached activations: each weight moves
    by eta * psi * e and the bias by eta * e.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    res = forward(state, u)
    e = float(d) - res.prediction
    if not np.isfinite(e) or abs(e) > ERROR_ABORT:
        raise DivergenceError(f"online error diverged (e={e!r})")
    state.weights += (eta * e) * res.activations
    state.bias += eta * e
    res.error = e
    return state, res


def train_online(
    state: NetworkState,
    dataset,
    eta: float,
    epochs: int = 1,
) -> tuple[NetworkState, np.ndarray]:
    """Sequential pass(es) over the dataset; returns the squared-error trace.

    Windows are visited in temporal order within each epoch. The trace
    holds e**2 for every update, epochs * len(dataset) entries in all.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    n = len(dataset)
    if n == 0:
        raise ValueError("dataset is empty")
    acts = activation_grid(state, dataset.inputs).reshape(n, -1)
    targets = dataset.targets
    w = state.weights.ravel()  # copy-free for the C-contiguous grid
    bias = state.bias
    trace = np.empty(epochs * n)
    k = 0
    for _ in range(epochs):
        for row, d in zip(acts, targets):
            e = d - float(np.dot(w, row) + bias)
            if not np.isfinite(e) or abs(e) > ERROR_ABORT:
                raise DivergenceError(
                    f"online error diverged at iteration {k} (e={e!r})", iteration=k
                )
            step = eta * e
            w += step * row
            bias += step
            trace[k] = e * e
            k += 1
    state.weights = w.reshape(state.weights.shape)
    state.bias = bias
    return state, trace


def evaluate(state: NetworkState, dataset) -> tuple[np.ndarray, float]:
    """Pure forward passes over a dataset: (predictions, mean squared error)."""
    n = len(dataset)
    if n == 0:
        raise ValueError("dataset is empty")
    acts = activation_grid(state, dataset.inputs).reshape(n, -1)
    w = state.weights.ravel()
    bias = state.bias
    predictions = np.empty(n)
    for i in range(n):
        predictions[i] = np.dot(w, acts[i]) + bias
    mse = float(np.mean((dataset.targets - predictions) ** 2))
    return predictions, mse


def init_network(
    topology: Topology,
    dataset,
    kernel: str = "gaussian",
    spread_scale: float = 1.0,
    rng: np.random.Generator | None = None,
    weight_init_bound: float = 0.5,
    kmeans_max_iters: int = 100,
    kmeans_tol: float = 1e-6,
    kmeans_init: str = "sample",
) -> NetworkState:
    """K-means kernels plus uniformly random weights and bias.

    A conventional network gets one K-means fit over the full lag vectors
    (k = spatial_size). A spatio-temporal network gets an independent fit
    per temporal branch: over that branch's scalar lag column for per-lag
    routing, over the full vectors otherwise. Weights and bias are drawn
    uniformly from [-weight_init_bound, weight_init_bound].
    """
    if rng is None:
        rng = np.random.default_rng()
    s, t = topology.spatial_size, topology.temporal_depth
    centers = np.empty((s, t, topology.branch_dim))
    spreads = np.empty((s, t))
    for branch in range(t):
        lag = branch if topology.branch_input == "per_lag" else None
        specs = init_kernels(
            dataset,
            s,
            kind=kernel,
            spread_scale=spread_scale,
            rng=rng,
            lag=lag,
            max_iters=kmeans_max_iters,
            tol=kmeans_tol,
            init=kmeans_init,
        )
        for i, spec in enumerate(specs):
            centers[i, branch] = spec.center
            spreads[i, branch] = spec.spread
    weights = rng.uniform(-weight_init_bound, weight_init_bound, size=(s, t))
    bias = float(rng.uniform(-weight_init_bound, weight_init_bound))
    return NetworkState(
        topology=topology,
        kernel=kernel,
        centers=centers,
        spreads=spreads,
        weights=weights,
        bias=bias,
    )


def save_network_csv(state: NetworkState, path) -> None:
    """Checkpoint to a flat CSV; round-trips at full double precision."""
    topo = state.topology
    dim = topo.branch_dim
    with open(path, "w", newline="") as fh:
        fh.write(f"# kind={topo.kind}\n")
        fh.write(f"# branch_input={topo.branch_input}\n")
        fh.write(f"# kernel={state.kernel}\n")
        fh.write(f"# input_dim={topo.input_dim}\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["branch", "neuron"]
            + [f"center_{d}" for d in range(dim)]
            + ["spread", "weight"]
        )
        for t in range(topo.temporal_depth):
            for i in range(topo.spatial_size):
                writer.writerow(
                    [t, i]
                    + [f"{c:.17g}" for c in state.centers[i, t]]
                    + [f"{state.spreads[i, t]:.17g}", f"{state.weights[i, t]:.17g}"]
                )
        writer.writerow(["bias", ""] + [""] * dim + ["", f"{state.bias:.17g}"])


def load_network_csv(path) -> NetworkState:
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            elif line:
                rows.append(next(csv.reader([line])))
    header, body = rows[0], rows[1:]
    if header[:2] != ["branch", "neuron"] or header[-2:] != ["spread", "weight"]:
        raise ValueError(f"unexpected checkpoint header {header!r}")
    dim = len(header) - 4

    bias = None
    entries = []
    for row in body:
        if row[0] == "bias":
            bias = float(row[-1])
        else:
            entries.append(
                (
                    int(row[0]),
                    int(row[1]),
                    [float(c) for c in row[2 : 2 + dim]],
                    float(row[-2]),
                    float(row[-1]),
                )
            )
    if bias is None:
        raise ValueError("checkpoint is missing the bias row")

    t_depth = max(e[0] for e in entries) + 1
    s_size = max(e[1] for e in entries) + 1
    topology = Topology(
        kind=meta["kind"],
        spatial_size=s_size,
        temporal_depth=t_depth,
        input_dim=int(meta["input_dim"]),
        branch_input=meta["branch_input"],
    )
    centers = np.empty((s_size, t_depth, dim))
    spreads = np.empty((s_size, t_depth))
    weights = np.empty((s_size, t_depth))
    for t, i, center, spread, weight in entries:
        centers[i, t] = center
        spreads[i, t] = spread
        weights[i, t] = weight
    return NetworkState(
        topology=topology,
        kernel=meta["kernel"],
        centers=centers,
        spreads=spreads,
        weights=weights,
        bias=bias,
    )
