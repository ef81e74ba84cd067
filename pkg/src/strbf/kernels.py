"""Radial basis kernels and the K-means procedure that supplies them.

Three radially symmetric kernels are provided:

    gaussian               exp(-||u - c||**2 / spread**2)
    multiquadric           (||u - c||**2 + spread**2)**0.5
    inverse_multiquadric   (||u - c||**2 + spread**2)**-0.5

Note the Gaussian denominator is the squared spread with no factor 2.
Centers and spreads come from Lloyd's K-means over the training inputs;
per-cluster spreads are the RMS member-to-centroid distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KERNEL_KINDS",
    "SPREAD_MIN",
    "KernelSpec",
    "ClusterModel",
    "eval_kernel",
    "kernel_of_distance",
    "kmeans_fit",
    "init_kernels",
]

KERNEL_KINDS = ("gaussian", "multiquadric", "inverse_multiquadric")

# Lower bound on any spread handed out; keeps singleton clusters from
# producing zero-width kernels.
SPREAD_MIN = 1e-3


@dataclass(frozen=True)
class KernelSpec:
    """One kernel: kind, center vector, positive spread."""

    kind: str
    center: np.ndarray
    spread: float

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=np.float64)))
        if self.spread <= 0:
            raise ValueError(f"spread must be positive, got {self.spread}")


@dataclass
class ClusterModel:
    """Result of a K-means fit.

    ``spreads[j]`` is the RMS distance of cluster j's members to its
    centroid, floored at :data:`SPREAD_MIN`. ``inertia_history`` holds the
    total within-cluster squared distance at the end of every Lloyd
    iteration; ``initial_centroids`` records the seeding so a fit can be
    replayed from the same start.
    """

    centroids: np.ndarray
    spreads: np.ndarray
    assignments: np.ndarray
    inertia: float
    n_iters: int
    inertia_history: np.ndarray
    initial_centroids: np.ndarray = field(repr=False, default=None)


def kernel_of_distance(kind: str, distance_sq, spread) -> np.ndarray:
    """Kernel response as a function of squared distance (vectorized)."""
    d2 = np.asarray(distance_sq, dtype=np.float64)
    s2 = np.asarray(spread, dtype=np.float64) ** 2
    if kind == "gaussian":
        return np.exp(-d2 / s2)
    if kind == "multiquadric":
        return np.sqrt(d2 + s2)
    if kind == "inverse_multiquadric":
        return 1.0 / np.sqrt(d2 + s2)
    raise ValueError(f"unknown kernel kind {kind!r}")


def eval_kernel(spec: KernelSpec, u) -> float:
    """Evaluate one kernel at the input vector ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if u.shape != spec.center.shape:
        raise ValueError(
            f"input dimension {u.shape} does not match center {spec.center.shape}"
        )
    d2 = float(np.sum((u - spec.center) ** 2))
    return float(kernel_of_distance(spec.kind, d2, spec.spread))


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assign = d2.argmin(axis=1)
    return assign, d2[np.arange(len(points)), assign]


def kmeans_fit(
    points,
    k: int,
    max_iters: int = 100,
    tol: float = 1e-6,
    rng: np.random.Generator | None = None,
    init: str = "sample",
) -> ClusterModel:
    """Lloyd's K-means with deterministic seeding and empty-cluster repair.

    Centroids start at ``k`` distinct data points drawn with ``rng``
    (``init="sample"``) or via k-means++ (``init="kmeans++"``). Iterations
    stop when the largest centroid displacement drops below ``tol``. An
    empty cluster is repaired by stealing the point currently farthest
    from its assigned centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    if rng is None:
        rng = np.random.default_rng()

    if init == "sample":
        centroids = points[rng.choice(n, size=k, replace=False)].copy()
    elif init == "kmeans++":
        centroids = np.empty((k, points.shape[1]))
        centroids[0] = points[rng.integers(n)]
        closest = ((points - centroids[0]) ** 2).sum(axis=1)
        for j in range(1, k):
            total = closest.sum()
            if total == 0.0:
                centroids[j] = points[rng.integers(n)]
            else:
                centroids[j] = points[rng.choice(n, p=closest / total)]
            closest = np.minimum(closest, ((points - centroids[j]) ** 2).sum(axis=1))
    else:
        raise ValueError(f"unknown init {init!r}")
    initial = centroids.copy()

    history = []
    n_iters = 0
    for _ in range(max_iters):
        n_iters += 1
        assign, dist_sq = _assign(points, centroids)
        counts = np.bincount(assign, minlength=k)
        for j in np.flatnonzero(counts == 0):
            # donate the globally farthest point whose cluster keeps >= 1 member
            order = np.argsort(-dist_sq)
            for cand in order:
                if counts[assign[cand]] > 1:
                    counts[assign[cand]] -= 1
                    assign[cand] = j
                    counts[j] = 1
                    dist_sq[cand] = 0.0
                    break
        new_centroids = np.empty_like(centroids)
        for j in range(k):
            new_centroids[j] = points[assign == j].mean(axis=0)
        shift = np.abs(new_centroids - centroids).max()
        centroids = new_centroids
        _, dist_sq = _assign(points, centroids)
        history.append(float(dist_sq.sum()))
        if shift < tol:
            break

    assign, dist_sq = _assign(points, centroids)
    spreads = np.empty(k)
    for j in range(k):
        member = dist_sq[assign == j]
        spreads[j] = np.sqrt(member.mean()) if member.size else 0.0
    spreads = np.maximum(spreads, SPREAD_MIN)

    return ClusterModel(
        centroids=centroids,
        spreads=spreads,
        assignments=assign,
        inertia=float(dist_sq.sum()),
        n_iters=n_iters,
        inertia_history=np.asarray(history),
        initial_centroids=initial,
    )


def init_kernels(
    dataset,
    k: int,
    kind: str = "gaussian",
    spread_scale: float = 1.0,
    rng: np.random.Generator | None = None,
    lag: int | None = None,
    max_iters: int = 100,
    tol: float = 1e-6,
    init: str = "sample",
) -> list[KernelSpec]:
    """Fit K-means to a windowed dataset and return kernel specs.

    By default the fit runs over the full lag vectors; with ``lag`` given
    it runs over that single scalar lag column (used by the per-lag
    temporal branches). Spreads are the cluster spreads times
    ``spread_scale``, floored at :data:`SPREAD_MIN`.
    """
    points = dataset.inputs if lag is None else dataset.inputs[:, lag : lag + 1]
    model = kmeans_fit(points, k, max_iters=max_iters, tol=tol, rng=rng, init=init)
    spreads = np.maximum(model.spreads * spread_scale, SPREAD_MIN)
    return [
        KernelSpec(kind=kind, center=model.centroids[j].copy(), spread=float(spreads[j]))
        for j in range(k)
    ]
