"""Ground-cost matrices, classical DTW, soft-DTW, its gradient, and the
global alignment kernel.

An alignment is a binary t_x-by-t_y matrix marking one monotone path from the
top-left to the bottom-right corner with unit steps right, down, or diagonal.
DTW minimises the inner product of an alignment with the squared-Euclidean
cost matrix; soft-DTW replaces the hard minimum over alignments with a
log-sum-exp soft minimum with smoothing gamma, which makes the objective
differentiable (and possibly negative).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _dp
from .core import as_values

ENUMERATION_CAP = 8


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise ground costs between two series, entry (i, j) = (x_i - y_j)^2."""

    entries: np.ndarray
    metric: str = "squared-euclidean"


@dataclass(frozen=True)
class SoftDtwEvaluation:
    """Soft-DTW value plus the forward table kept for the backward pass."""

    value: float
    gamma: float
    forward: np.ndarray


def _sq_cost(xv: np.ndarray, yv: np.ndarray) -> np.ndarray:
    return (xv[:, None] - yv[None, :]) ** 2


def cost_matrix(x, y) -> CostMatrix:
    """Squared-Euclidean ground-cost matrix of shape (len(x), len(y))."""
    return CostMatrix(_sq_cost(as_values(x), as_values(y)))


def soft_min(values, gamma: float) -> float:
    """Smoothed minimum of a nonempty collection of finite reals.

    gamma = 0 gives the exact minimum; gamma > 0 gives
    -gamma * log(sum_i exp(-a_i / gamma)), evaluated with a max-shifted
    log-sum-exp so large inputs do not overflow.
    """
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        raise ValueError("soft_min of an empty collection")
    if not np.all(np.isfinite(a)):
        raise ValueError("soft_min inputs must be finite")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    lo = float(a.min())
    if gamma == 0:
        return lo
    return lo - gamma * float(np.log(np.exp((lo - a) / gamma).sum()))


def dtw(x, y) -> tuple[float, np.ndarray]:
    """Classical DTW value and one optimal alignment matrix.

    Ties during backtracking prefer the diagonal step, then the vertical
    one, so the returned path is deterministic.
    """
    xv = as_values(x)
    yv = as_values(y)
    cost = _sq_cost(xv, yv)
    acc = _dp.dtw_forward(cost)
    n, m = cost.shape
    path = np.zeros((n, m), dtype=np.uint8)
    i, j = n, m
    path[i - 1, j - 1] = 1
    while (i, j) != (1, 1):
        # the +inf boundary rows exclude invalid predecessors on their own
        best = np.inf
        step = (i - 1, j - 1)
        for ii, jj in ((i - 1, j - 1), (i - 1, j), (i, j - 1)):
            if acc[ii, jj] < best:
                best = acc[ii, jj]
                step = (ii, jj)
        i, j = step
        path[i - 1, j - 1] = 1
    return float(acc[n, m]), path


def soft_dtw(x, y, gamma: float) -> SoftDtwEvaluation:
    """Soft-DTW between two series.

    gamma = 0 routes to the exact DTW recursion (no log-sum-exp), so the
    value equals the classical optimum; gamma > 0 yields the soft minimum
    over all alignment costs, which is strictly below the optimum whenever
    several alignments exist.
    """
    xv = as_values(x)
    yv = as_values(y)
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    cost = _sq_cost(xv, yv)
    if gamma == 0:
        acc = _dp.dtw_forward(cost)
    else:
        acc = _dp.softdtw_forward(cost, gamma)
    return SoftDtwEvaluation(float(acc[-1, -1]), gamma, acc)


def gak(x, y, gamma: float) -> float:
    """Global alignment kernel: sum over alignments of exp(-cost / gamma).

    Computed through the soft-DTW identity gak = exp(-soft_dtw / gamma);
    gamma must be positive (the sum degenerates at 0).
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return float(np.exp(-soft_dtw(x, y, gamma).value / gamma))


def soft_dtw_grad(x, y, gamma: float) -> np.ndarray:
    """Gradient of soft_dtw(x, y, gamma) with respect to x.

    Runs the backward recursion over the retained forward table to obtain
    the Boltzmann-average alignment matrix, then applies the chain rule of
    the squared-Euclidean ground cost. The gradient with respect to y is
    soft_dtw_grad(y, x, gamma), by symmetry of the ground cost.
    """
    xv = as_values(x)
    yv = as_values(y)
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    _, grad = _dp.softdtw_value_and_grad(xv, yv, gamma)
    return grad


def soft_dtw_divergence(x, y, gamma: float) -> float:
    """Self-normalised soft-DTW: sdtw(x, y) - (sdtw(x, x) + sdtw(y, y)) / 2.

    Zero for x = y and nonnegative in practice, which makes it suitable
    where an index assumes nonnegative dissimilarities (raw soft-DTW can be
    negative).
    """
    xv = as_values(x)
    yv = as_values(y)
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    return float(
        _dp.softdtw_value(xv, yv, gamma)
        - 0.5 * (_dp.softdtw_value(xv, xv, gamma) + _dp.softdtw_value(yv, yv, gamma))
    )


def average_alignment(x, y, gamma: float) -> np.ndarray:
    """Boltzmann-average alignment matrix (marginal cell occupancies)."""
    xv = as_values(x)
    yv = as_values(y)
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    cost = _sq_cost(xv, yv)
    acc = _dp.softdtw_forward(cost, gamma)
    return _dp.softdtw_backward(cost, acc, gamma)


def enumerate_alignments(t_x: int, t_y: int) -> list[np.ndarray]:
    """Every monotone alignment matrix for a t_x-by-t_y grid, exactly once.

    Sizes are capped at ENUMERATION_CAP because the count grows like the
    Delannoy numbers; this is a brute-force oracle, not a production path.
    """
    if not (1 <= t_x <= ENUMERATION_CAP and 1 <= t_y <= ENUMERATION_CAP):
        raise ValueError(
            f"enumeration sizes must be in [1, {ENUMERATION_CAP}], got ({t_x}, {t_y})"
        )
    out: list[np.ndarray] = []
    cells = [(0, 0)]

    def extend(i: int, j: int) -> None:
        if i == t_x - 1 and j == t_y - 1:
            mat = np.zeros((t_x, t_y), dtype=np.uint8)
            for a, b in cells:
                mat[a, b] = 1
            out.append(mat)
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < t_x and nj < t_y:
                cells.append((ni, nj))
                extend(ni, nj)
                cells.pop()

    extend(0, 0)
    return out


def pairwise_soft_dtw(rows, cols=None, gamma: float = 0.1) -> np.ndarray:
    """Soft-DTW distance matrix between two collections of series.

    With cols=None computes the symmetric matrix of ``rows`` against itself
    (the true self-distances sit on the diagonal). Pairs are independent, so
    the result does not depend on evaluation order.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    row_vals = [as_values(r) for r in rows]
    if cols is None:
        n = len(row_vals)
        out = np.empty((n, n))
        for i in range(n):
            out[i, i] = _dp.softdtw_value(row_vals[i], row_vals[i], gamma)
            for j in range(i + 1, n):
                v = _dp.softdtw_value(row_vals[i], row_vals[j], gamma)
                out[i, j] = v
                out[j, i] = v
        return out
    col_vals = [as_values(c) for c in cols]
    out = np.empty((len(row_vals), len(col_vals)))
    for i, rv in enumerate(row_vals):
        for j, cv in enumerate(col_vals):
            out[i, j] = _dp.softdtw_value(rv, cv, gamma)
    return out
