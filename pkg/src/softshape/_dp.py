"""Compiled dynamic-programming kernels for the alignment distances.

Each kernel is sequential and self-contained: callers may evaluate
independent pairs concurrently and results do not depend on evaluation
order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def softdtw_forward(cost: np.ndarray, gamma: float) -> np.ndarray:
    """Accumulated soft-min table, shape (t_x + 1, t_y + 1).

    Row/column 0 is the +inf boundary (R[0, 0] = 0); entry (i, j) holds the
    smoothed minimum over all alignment prefixes ending at cell (i-1, j-1).
    """
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), INF)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            r0 = acc[i - 1, j - 1]
            r1 = acc[i - 1, j]
            r2 = acc[i, j - 1]
            lo = min(r0, min(r1, r2))
            if lo == INF:
                smin = INF
            else:
                # max-shifted log-sum-exp keeps the boundary sentinel inert
                s = (
                    np.exp((lo - r0) / gamma)
                    + np.exp((lo - r1) / gamma)
                    + np.exp((lo - r2) / gamma)
                )
                smin = lo - gamma * np.log(s)
            acc[i, j] = cost[i - 1, j - 1] + smin
    return acc


@njit(cache=True)
def softdtw_backward(cost: np.ndarray, acc: np.ndarray, gamma: float) -> np.ndarray:
    """Expected alignment-matrix occupancy under the Boltzmann path weights.

    ``acc`` is the table from softdtw_forward. Returns the (t_x, t_y) matrix
    of marginal cell probabilities, i.e. the average alignment matrix.
    """
    n, m = cost.shape
    r = np.full((n + 2, m + 2), -INF)
    d = np.zeros((n + 2, m + 2))
    e = np.zeros((n + 2, m + 2))
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            r[i, j] = acc[i, j]
            d[i, j] = cost[i - 1, j - 1]
    r[n + 1, m + 1] = acc[n, m]
    e[n + 1, m + 1] = 1.0
    for j in range(m, 0, -1):
        for i in range(n, 0, -1):
            a = np.exp((r[i + 1, j] - r[i, j] - d[i + 1, j]) / gamma)
            b = np.exp((r[i, j + 1] - r[i, j] - d[i, j + 1]) / gamma)
            c = np.exp((r[i + 1, j + 1] - r[i, j] - d[i + 1, j + 1]) / gamma)
            e[i, j] = a * e[i + 1, j] + b * e[i, j + 1] + c * e[i + 1, j + 1]
    return e[1 : n + 1, 1 : m + 1]


@njit(cache=True)
def dtw_forward(cost: np.ndarray) -> np.ndarray:
    """Classical hard-min accumulated table, shape (t_x + 1, t_y + 1)."""
    n, m = cost.shape
    acc = np.full((n + 1, m + 1), INF)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(
                acc[i - 1, j - 1], min(acc[i - 1, j], acc[i, j - 1])
            )
    return acc


@njit(cache=True)
def softdtw_value(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """Soft-DTW value without materialising the cost matrix in Python."""
    n = x.shape[0]
    m = y.shape[0]
    cost = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            diff = x[i] - y[j]
            cost[i, j] = diff * diff
    acc = softdtw_forward(cost, gamma)
    return acc[n, m]


@njit(cache=True)
def softdtw_value_and_grad(x: np.ndarray, y: np.ndarray, gamma: float):
    """Soft-DTW value and its gradient with respect to x, in one pass."""
    n = x.shape[0]
    m = y.shape[0]
    cost = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            diff = x[i] - y[j]
            cost[i, j] = diff * diff
    acc = softdtw_forward(cost, gamma)
    occ = softdtw_backward(cost, acc, gamma)
    grad = np.zeros(n)
    for i in range(n):
        g = 0.0
        for j in range(m):
            g += 2.0 * (x[i] - y[j]) * occ[i, j]
        grad[i] = g
    return acc[n, m], grad
