"""Soft-DTW k-means: alternate nearest-barycenter assignment and barycenter
refitting, over several seeded restarts, keeping the lowest-inertia model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _dp
from .barycenter import soft_dtw_barycenter
from .core import Dataset, TimeSeries, as_values
from .model import ClusterModel, normalization_diagnostics, repair_empty_clusters


@dataclass(frozen=True)
class KMeansConfig:
    """Settings for one soft-DTW k-means fit.

    ``n_init`` restarts run with sub-seeds spawned from ``seed``; the model
    with the lowest inertia wins. ``tol`` is the relative inertia-improvement
    stopping threshold. The barycenter caps keep each refit bounded; refits
    warm-start from the current center, so looser caps only trade time for
    tighter centers, never break descent.
    """

    k: int
    gamma: float = 0.1
    n_init: int = 16
    max_iter: int = 50
    tol: float = 1e-6
    seed: int = 0
    barycenter_max_iter: int = 15
    barycenter_tol: float = 1e-4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.n_init < 1:
            raise ValueError(f"n_init must be >= 1, got {self.n_init}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


def assign(series, centers, gamma: float) -> tuple[int, float]:
    """Nearest center by soft-DTW; ties go to the lowest index."""
    if len(centers) == 0:
        raise ValueError("center list must be nonempty")
    sv = as_values(series)
    best = 0
    best_dist = np.inf
    for idx, center in enumerate(centers):
        d = _dp.softdtw_value(sv, as_values(center), gamma)
        if d < best_dist:
            best_dist = d
            best = idx
    return best, float(best_dist)


def inertia(dataset: Dataset, labels, centers, gamma: float) -> float:
    """Sum over series of the soft-DTW distance to the assigned center."""
    center_vals = [as_values(c) for c in centers]
    labels = list(labels)
    if len(labels) != dataset.n:
        raise ValueError("labels must match the dataset size")
    terms = []
    for ts, lab in zip(dataset.series, labels):
        if not 0 <= lab < len(center_vals):
            raise ValueError(f"label {lab} out of range [0, {len(center_vals)})")
        terms.append(_dp.softdtw_value(ts.values, center_vals[lab], gamma))
    return math.fsum(terms)


def _assign_all(values, centers, gamma):
    n = len(values)
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n)
    for i, v in enumerate(values):
        best = 0
        best_dist = np.inf
        for idx, c in enumerate(centers):
            d = _dp.softdtw_value(v, c, gamma)
            if d < best_dist:
                best_dist = d
                best = idx
        labels[i] = best
        dists[i] = best_dist
    return labels, dists


def _fit_single(values, config: KMeansConfig, rng: np.random.Generator):
    n = len(values)
    init_idx = rng.choice(n, size=config.k, replace=False)
    centers = [values[i].copy() for i in init_idx]

    def self_dist(v):
        return _dp.softdtw_value(v, v, config.gamma)

    prev_labels = None
    prev_inertia = np.inf
    trace = []
    converged = False
    rounds = 0
    for _ in range(config.max_iter):
        rounds += 1
        labels, dists = _assign_all(values, centers, config.gamma)
        repair_empty_clusters(labels, dists, centers, values, self_dist)
        if prev_labels is not None and np.array_equal(labels, prev_labels):
            converged = True
            break
        prev_labels = labels.copy()

        for j in range(config.k):
            members = [values[i] for i in range(n) if labels[i] == j]
            result = soft_dtw_barycenter(
                members,
                config.gamma,
                max_iter=config.barycenter_max_iter,
                tol=config.barycenter_tol,
                init=centers[j],
            )
            centers[j] = result.center.values
        cur = math.fsum(
            _dp.softdtw_value(values[i], centers[labels[i]], config.gamma)
            for i in range(n)
        )
        trace.append(cur)
        if prev_inertia - cur < config.tol * max(1.0, abs(prev_inertia)):
            converged = True
            break
        prev_inertia = cur

    labels, dists = _assign_all(values, centers, config.gamma)
    repair_empty_clusters(labels, dists, centers, values, self_dist)
    final_inertia = math.fsum(dists)
    trace.append(final_inertia)
    return labels, centers, final_inertia, rounds, converged, trace


def fit_soft_dtw_kmeans(dataset: Dataset, config: KMeansConfig) -> ClusterModel:
    """Fit soft-DTW k-means with restarts.

    The caller is expected to hand in z-normalised series; if not, a warning
    diagnostic is attached to the model. Restarts draw k distinct dataset
    members as initial centers from sub-seeds spawned deterministically from
    ``config.seed``, so identical inputs give identical models.
    """
    if config.k > dataset.n:
        raise ValueError(f"k={config.k} exceeds the {dataset.n} series available")
    diagnostics = normalization_diagnostics(dataset)
    values = [ts.values for ts in dataset.series]

    children = np.random.SeedSequence(config.seed).spawn(config.n_init)
    best = None
    for child in children:
        rng = np.random.default_rng(child)
        labels, centers, run_inertia, rounds, converged, trace = _fit_single(
            values, config, rng
        )
        if best is None or run_inertia < best[2]:
            best = (labels, centers, run_inertia, rounds, converged, trace)

    labels, centers, run_inertia, rounds, converged, trace = best
    center_series = tuple(
        TimeSeries(f"kmeans-center-{j}", centers[j]) for j in range(config.k)
    )
    return ClusterModel(
        algorithm="soft-dtw-kmeans",
        k=config.k,
        labels=tuple(int(v) for v in labels),
        centers=center_series,
        inertia=run_inertia,
        iterations=rounds,
        converged=converged,
        seed=config.seed,
        inertia_trace=tuple(trace),
        diagnostics=diagnostics,
    )
