"""Fréchet means (barycenters) of a set of series under soft-DTW.

The barycenter minimises the Fréchet variance, here the order-1 sum of
soft-DTW divergences to the members, by gradient descent with a
backtracking (Armijo) line search. Member contributions are combined with
exact compensated summation so the result is invariant to member order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _dp
from .core import TimeSeries, as_values

ARMIJO_C = 1e-4
MIN_STEP = 1e-16


@dataclass(frozen=True)
class BarycenterResult:
    """Fitted barycenter with its descent history."""

    center: TimeSeries
    variance: float
    iterations: int
    converged: bool
    variance_trace: tuple[float, ...]


def _member_values(members) -> list[np.ndarray]:
    vals = [as_values(ts) for ts in members]
    if not vals:
        raise ValueError("member list must be nonempty")
    m = vals[0].size
    for v in vals[1:]:
        if v.size != m:
            raise ValueError("members must share one length")
    return vals


def frechet_variance(candidate, members, gamma: float) -> float:
    """Sum of soft-DTW divergences from the candidate to every member."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    cv = as_values(candidate)
    vals = _member_values(members)
    if vals[0].size != cv.size:
        raise ValueError("candidate length must match member length")
    return math.fsum(_dp.softdtw_value(cv, v, gamma) for v in vals)


def _objective(center: np.ndarray, vals: list[np.ndarray], gamma: float) -> float:
    return math.fsum(_dp.softdtw_value(center, v, gamma) for v in vals)


def _objective_and_grad(center, vals, gamma) -> tuple[float, np.ndarray]:
    terms = []
    grads = []
    for v in vals:
        value, grad = _dp.softdtw_value_and_grad(center, v, gamma)
        terms.append(value)
        grads.append(grad)
    stacked = np.stack(grads)
    # per-coordinate fsum: member order must not leak into the result
    total_grad = np.array([math.fsum(stacked[:, i]) for i in range(center.size)])
    return math.fsum(terms), total_grad


def soft_dtw_barycenter(
    members,
    gamma: float,
    max_iter: int = 100,
    tol: float = 1e-5,
    init=None,
) -> BarycenterResult:
    """Minimise the Fréchet variance over length-m series.

    Parameters
    ----------
    members : sequence of TimeSeries or array-likes, all the same length.
    gamma : soft-DTW smoothing, > 0.
    max_iter : maximum accepted gradient steps.
    tol : stop once the gradient infinity-norm falls below this.
    init : optional starting series; defaults to the elementwise mean of
        the members. Clustering passes the current cluster center here so
        refits can only improve the objective.

    The line search halves the step until the Armijo condition holds, so
    the variance trace is non-increasing; identical members short-circuit
    to that series.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    vals = _member_values(members)
    if all(np.array_equal(v, vals[0]) for v in vals[1:]):
        center = vals[0].copy()
        variance = _objective(center, vals, gamma)
        return BarycenterResult(
            TimeSeries("barycenter", center), variance, 0, True, (variance,)
        )

    if init is None:
        stacked = np.stack(vals)
        # compensated mean, so member order cannot leak into the start point
        center = np.array(
            [math.fsum(stacked[:, i]) for i in range(stacked.shape[1])]
        ) / len(vals)
    else:
        center = as_values(init).copy()
        if center.size != vals[0].size:
            raise ValueError("init length must match member length")

    variance, grad = _objective_and_grad(center, vals, gamma)
    trace = [variance]
    step = 1.0 / (1.0 + float(np.abs(grad).max()))
    converged = False
    iterations = 0
    for _ in range(max_iter):
        gnorm = float(np.abs(grad).max())
        if gnorm < tol:
            converged = True
            break
        gsq = float(np.dot(grad, grad))
        t = step * 2.0  # start above the last accepted step
        accepted = False
        while t > MIN_STEP:
            candidate = center - t * grad
            value = _objective(candidate, vals, gamma)
            if value <= variance - ARMIJO_C * t * gsq:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        step = t
        center = candidate
        iterations += 1
        variance, grad = _objective_and_grad(center, vals, gamma)
        trace.append(variance)
    else:
        converged = float(np.abs(grad).max()) < tol

    return BarycenterResult(
        TimeSeries("barycenter", center), variance, iterations, converged, tuple(trace)
    )
