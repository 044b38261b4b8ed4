"""Shared fixtures-by-function for the test suite: the planted three-regime
panel, CSV writers, and independent brute-force oracles."""

from __future__ import annotations

import csv
import math
from datetime import date, timedelta

import numpy as np

from softshape import TimeSeries, znormalize


def planted_panel(n=48, m=180, noise=0.1, seed=7):
    """Synthetic panel with three planted regimes.

    Group 0 rises late and keeps rising (logistic ramp), group 1 peaks early
    and tapers, group 2 is bimodal; all carry a weekly ripple, per-series
    time/width jitter, and Gaussian noise added after z-normalisation.

    Returns (list of (id, values), planted labels).
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, m)
    day = np.arange(m)
    series = []
    labels = []
    for i in range(n):
        group = i % 3
        shift = rng.uniform(-0.04, 0.04)
        width = rng.uniform(0.9, 1.1)
        if group == 0:
            base = 1.0 / (1.0 + np.exp(-(t - (0.80 + shift)) / (0.05 * width)))
        elif group == 1:
            base = np.exp(-0.5 * ((t - (0.22 + shift)) / (0.06 * width)) ** 2)
        else:
            base = 0.75 * np.exp(
                -0.5 * ((t - (0.25 + shift)) / (0.07 * width)) ** 2
            ) + np.exp(-0.5 * ((t - (0.78 + shift)) / (0.09 * width)) ** 2)
        base = base * (1.0 + 0.05 * np.sin(2 * np.pi * day / 7.0))
        scaled, _ = znormalize(TimeSeries(f"S{i:02d}", base))
        series.append((f"S{i:02d}", scaled.values + noise * rng.normal(size=m)))
        labels.append(group)
    return series, labels


def write_cases_csv(path, series, start=date(2020, 3, 1), case_type=None):
    """Write (id, values) pairs as a long-format daily cases CSV."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        header = ["id", "date", "value"]
        if case_type is not None:
            header.append("case_type")
        writer.writerow(header)
        for sid, values in series:
            for step, value in enumerate(values):
                row = [sid, (start + timedelta(days=step)).isoformat(), repr(float(value))]
                if case_type is not None:
                    row.append(case_type)
                writer.writerow(row)


def alignment_cost(matrix, cost):
    """Inner product of one alignment with a cost matrix, accumulated in
    path order (same association as the DP, so hard-min comparisons are
    exact)."""
    total = 0.0
    for i, j in sorted(zip(*np.nonzero(matrix))):
        total += cost[i, j]
    return total


def is_valid_alignment(matrix) -> bool:
    """Corner-to-corner monotone path with steps right, down, or diagonal."""
    cells = sorted(zip(*np.nonzero(matrix)))
    if not cells:
        return False
    t_x, t_y = matrix.shape
    if cells[0] != (0, 0) or cells[-1] != (t_x - 1, t_y - 1):
        return False
    for (i0, j0), (i1, j1) in zip(cells, cells[1:]):
        if (i1 - i0, j1 - j0) not in ((0, 1), (1, 0), (1, 1)):
            return False
    return True


def brute_force_ari(labels_a, labels_b) -> float:
    """Pair-counting ARI: classify every unordered pair and apply the
    pair-confusion formula."""
    labels_a = list(labels_a)
    labels_b = list(labels_b)
    n = len(labels_a)
    together_both = together_a = together_b = apart_both = 0
    for i in range(n):
        for j in range(i + 1, n):
            same_a = labels_a[i] == labels_a[j]
            same_b = labels_b[i] == labels_b[j]
            if same_a and same_b:
                together_both += 1
            elif same_a:
                together_a += 1
            elif same_b:
                together_b += 1
            else:
                apart_both += 1
    a, b, c, d = together_both, together_a, together_b, apart_both
    denominator = (a + b) * (b + d) + (a + c) * (c + d)
    if denominator == 0:
        return 1.0
    return 2.0 * (a * d - b * c) / denominator


def sbd_brute_force(xv, yv):
    """Maximise the normalised cross-correlation by explicit shifting,
    with the smallest-|shift|, negative-first tie rule."""
    xv = np.asarray(xv, dtype=float)
    yv = np.asarray(yv, dtype=float)
    m = xv.size
    denom = math.sqrt(float(np.dot(xv, xv)) * float(np.dot(yv, yv)))
    best_shift = 0
    best = -np.inf
    order = [0]
    for a in range(1, m):
        order.extend([-a, a])
    for s in order:
        padded = np.zeros(m)
        if s >= 0:
            padded[: m - s] = yv[s:]
        else:
            padded[-s:] = yv[: m + s]
        ncc = float(np.dot(xv, padded)) / denom
        if ncc > best:
            best = ncc
            best_shift = s
    return 1.0 - min(max(best, -1.0), 1.0), best_shift
