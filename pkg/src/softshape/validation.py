"""Internal validity indices and inter-classifier agreement measures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset


@dataclass(frozen=True)
class ValidityReport:
    """Internal validity indices for one fitted model under one distance basis.

    ``silhouette_basis`` records which pairwise distance produced the
    silhouette ("soft-dtw", "sbd", or "euclidean"); the variance-ratio score
    is only defined in a vector space and always uses flattened Euclidean
    geometry. Values are None when the index is undefined (k < 2).
    """

    silhouette: float | None
    calinski_harabasz: float | None
    silhouette_basis: str


@dataclass(frozen=True)
class AgreementReport:
    """Cross-classifier contingency, chance-corrected agreement, and the
    greedy consensus-cell matching between two labelings of the same ids."""

    contingency: np.ndarray
    ari: float
    consensus: tuple[tuple[int, int], ...]
    shares: tuple[float, ...]
    outliers: tuple[str, ...]
    ids: tuple[str, ...]
    labels_a: tuple[int, ...]
    labels_b: tuple[int, ...]


def _cluster_indices(labels, n) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    if len(labels) != n:
        raise ValueError("labels must match the dataset size")
    return groups


def silhouette(dataset: Dataset, labels, distance) -> float:
    """Mean silhouette score under an arbitrary symmetric pairwise distance.

    Per point: (b - a) / max(a, b) with a the mean distance to the rest of
    its own cluster and b the smallest mean distance to another cluster.
    Singletons score 0, as does a point with a = b = 0. ``distance`` is a
    callable on two value arrays, or a precomputed symmetric (n, n) matrix;
    self-pairs are always excluded from the intra-cluster mean.

    The usual [-1, 1] range is a theorem about nonnegative distances: raw
    soft-DTW can be negative, so use its self-normalised divergence here.
    """
    groups = _cluster_indices(labels, dataset.n)
    if len(groups) < 2:
        raise ValueError("silhouette needs at least two clusters")
    if dataset.n < 2:
        raise ValueError("silhouette needs at least two series")
    n = dataset.n
    if callable(distance):
        values = [ts.values for ts in dataset.series]
        dmat = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d = float(distance(values[i], values[j]))
                dmat[i, j] = d
                dmat[j, i] = d
    else:
        dmat = np.asarray(distance, dtype=np.float64)
        if dmat.shape != (n, n):
            raise ValueError(f"precomputed matrix must be ({n}, {n}), got {dmat.shape}")

    scores = []
    for i in range(n):
        own = groups[int(labels[i])]
        if len(own) == 1:
            scores.append(0.0)
            continue
        a = math.fsum(dmat[i, j] for j in own if j != i) / (len(own) - 1)
        b = min(
            math.fsum(dmat[i, j] for j in members) / len(members)
            for lab, members in groups.items()
            if lab != int(labels[i])
        )
        denom = max(a, b)
        scores.append(0.0 if denom == 0 else (b - a) / denom)
    return math.fsum(scores) / n


def calinski_harabasz(dataset: Dataset, labels) -> float:
    """Variance-ratio criterion on series flattened to m-vectors.

    (between-cluster dispersion / (k - 1)) / (within-cluster dispersion /
    (n - k)); zero within-dispersion yields +inf. Requires 2 <= k < n.
    """
    groups = _cluster_indices(labels, dataset.n)
    k = len(groups)
    n = dataset.n
    if k < 2 or k >= n:
        raise ValueError(f"variance ratio needs 2 <= k < n, got k={k}, n={n}")
    mat = dataset.values_matrix()
    overall = mat.mean(axis=0)
    between = 0.0
    within = 0.0
    for members in groups.values():
        sub = mat[members]
        center = sub.mean(axis=0)
        between += len(members) * float(np.dot(center - overall, center - overall))
        within += float(((sub - center) ** 2).sum())
    if within == 0.0:
        return math.inf
    return (between / (k - 1)) / (within / (n - k))


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def _contingency(labels_a, labels_b) -> np.ndarray:
    a = np.asarray(labels_a, dtype=np.int64)
    b = np.asarray(labels_b, dtype=np.int64)
    if a.size != b.size:
        raise ValueError(f"label lengths differ: {a.size} != {b.size}")
    if a.size and (a.min() < 0 or b.min() < 0):
        raise ValueError("labels must be nonnegative integers")
    table = np.zeros((int(a.max()) + 1, int(b.max()) + 1), dtype=np.int64)
    for x, y in zip(a, b):
        table[x, y] += 1
    return table


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected pair-counting agreement between two labelings.

    Symmetric in its arguments, 1 for partitions equal up to label
    permutation; the degenerate case (both partitions trivial, so the
    correction denominator vanishes) is defined as 1.0.
    """
    table = _contingency(labels_a, labels_b)
    n = int(table.sum())
    if n < 2:
        raise ValueError("adjusted Rand index needs at least two items")
    index = sum(_comb2(int(v)) for v in table.ravel())
    sum_a = sum(_comb2(int(v)) for v in table.sum(axis=1))
    sum_b = sum(_comb2(int(v)) for v in table.sum(axis=0))
    pairs = _comb2(n)
    # exact integer form of (index - E) / (max - E); one float division only
    numerator = 2 * (index * pairs - sum_a * sum_b)
    denominator = pairs * (sum_a + sum_b) - 2 * sum_a * sum_b
    if denominator == 0:
        return 1.0
    return numerator / denominator


def agreement_matrix(labels_a, labels_b, ids) -> AgreementReport:
    """Contingency counts plus greedy maximum-cell consensus matching.

    Cells are matched largest first (ties by lowest label pair), each row
    and column at most once; series outside matched cells are the outliers.
    """
    ids = tuple(str(i) for i in ids)
    table = _contingency(labels_a, labels_b)
    if len(ids) != int(table.sum()):
        raise ValueError("ids must match the label length")
    n = len(ids)

    matched: list[tuple[int, int]] = []
    used_a: set[int] = set()
    used_b: set[int] = set()
    while True:
        best_count = 0
        best_cell = None
        for x in range(table.shape[0]):
            if x in used_a:
                continue
            for y in range(table.shape[1]):
                if y in used_b:
                    continue
                if table[x, y] > best_count:
                    best_count = int(table[x, y])
                    best_cell = (x, y)
        if best_cell is None:
            break
        matched.append(best_cell)
        used_a.add(best_cell[0])
        used_b.add(best_cell[1])

    matched_set = set(matched)
    outliers = sorted(
        sid
        for sid, x, y in zip(ids, labels_a, labels_b)
        if (int(x), int(y)) not in matched_set
    )
    shares = tuple(int(table[x, y]) / n for x, y in matched)
    return AgreementReport(
        contingency=table,
        ari=adjusted_rand_index(labels_a, labels_b),
        consensus=tuple(matched),
        shares=shares,
        outliers=tuple(outliers),
        ids=ids,
        labels_a=tuple(int(v) for v in labels_a),
        labels_b=tuple(int(v) for v in labels_b),
    )


def consensus_groups(report: AgreementReport):
    """Matched cells ordered by descending size, members alphabetical.

    Returns a list of (label_a, label_b, member ids) triples; empty cells
    are never emitted.
    """
    groups = []
    for x, y in report.consensus:
        members = sorted(
            sid
            for sid, a, b in zip(report.ids, report.labels_a, report.labels_b)
            if a == x and b == y
        )
        if members:
            groups.append((x, y, tuple(members)))
    groups.sort(key=lambda g: (-len(g[2]), g[0], g[1]))
    return groups
