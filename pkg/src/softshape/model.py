"""Fitted clustering result shared by both algorithms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, TimeSeries

NORMALIZATION_ATOL = 1e-6


@dataclass(frozen=True)
class ClusterModel:
    """Assignments, per-cluster centers, and fit diagnostics.

    ``labels[i]`` is the cluster of the i-th dataset series; every cluster
    owns at least one series. ``inertia`` is the sum over series of the
    algorithm's distance to the assigned center (soft-DTW values may be
    negative, so it is compared by value, never by magnitude).
    """

    algorithm: str
    k: int
    labels: tuple[int, ...]
    centers: tuple[TimeSeries, ...]
    inertia: float
    iterations: int
    converged: bool
    seed: int
    inertia_trace: tuple[float, ...] = ()
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.centers) != self.k:
            raise ValueError(f"expected {self.k} centers, got {len(self.centers)}")
        counts = [0] * self.k
        for lab in self.labels:
            if not 0 <= lab < self.k:
                raise ValueError(f"label {lab} out of range [0, {self.k})")
            counts[lab] += 1
        if any(c == 0 for c in counts):
            raise ValueError("returned model must not contain empty clusters")


def normalization_diagnostics(dataset: Dataset) -> tuple[str, ...]:
    """Warnings for series that are not z-normalised (all-zero ones pass)."""
    offenders = []
    for ts in dataset.series:
        mean = float(ts.values.mean())
        std = float(ts.values.std())
        if std == 0.0 and np.all(ts.values == 0.0):
            continue  # degenerate normal form of a constant series
        if abs(mean) > NORMALIZATION_ATOL or abs(std - 1.0) > NORMALIZATION_ATOL:
            offenders.append(ts.id)
    if not offenders:
        return ()
    head = ", ".join(offenders[:5])
    more = "" if len(offenders) <= 5 else f" (+{len(offenders) - 5} more)"
    return (f"{len(offenders)} series are not z-normalised: {head}{more}",)


def repair_empty_clusters(
    labels: np.ndarray,
    dists: np.ndarray,
    centers: list[np.ndarray],
    member_values: list[np.ndarray],
    self_distance,
) -> bool:
    """Turn each empty cluster into a singleton holding the worst-fit series.

    The series farthest from its current center (ties broken by lowest
    index, never taken from a cluster that would become empty itself)
    becomes the empty cluster's new center. Mutates labels, dists, and
    centers in place; returns True if anything changed.
    """
    k = len(centers)
    changed = False
    counts = np.bincount(labels, minlength=k)
    for j in range(k):
        if counts[j] > 0:
            continue
        worst = -1
        worst_dist = -np.inf
        for i in range(labels.size):
            if counts[labels[i]] < 2:
                continue
            if dists[i] > worst_dist:
                worst_dist = dists[i]
                worst = i
        if worst < 0:
            raise ValueError("cannot repair empty cluster: no donor series")
        counts[labels[worst]] -= 1
        counts[j] += 1
        labels[worst] = j
        centers[j] = member_values[worst].copy()
        dists[worst] = self_distance(member_values[worst])
        changed = True
    return changed
