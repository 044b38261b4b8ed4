"""Shape-based distance (normalised cross-correlation over all shifts) and
k-shape clustering.

The cross-correlation sequence between two equal-length series holds, for
every shift s in [-(m-1), m-1], the inner product of the series after the
second one is slid by s with zero padding; positive s means the second
series' features occur later and are pulled earlier to align. SBD is one
minus the maximum of the sequence normalised by the geometric mean of the
zero-shift autocorrelations, giving a shift- and scale-invariant distance
in [0, 2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, TimeSeries, as_values, znormalize
from .model import ClusterModel, normalization_diagnostics, repair_empty_clusters

# below this norm a series is treated as all-zero (degenerate after scaling)
ZERO_NORM_ATOL = 1e-12

EIGH_MAX_LENGTH = 512
POWER_ITER_TOL = 1e-9
POWER_ITER_MAX = 1000


@dataclass(frozen=True)
class CrossCorrelationSequence:
    """Shift-indexed cross-correlation values, length 2m - 1.

    Entry w (1-based, w in 1..2m-1) corresponds to shift s = w - m.
    """

    values: np.ndarray

    @property
    def m(self) -> int:
        return (self.values.size + 1) // 2

    def at_shift(self, s: int) -> float:
        if not -(self.m - 1) <= s <= self.m - 1:
            raise ValueError(f"shift {s} out of range for m={self.m}")
        return float(self.values[s + self.m - 1])


@dataclass(frozen=True)
class SbdResult:
    """Shape-based distance, the maximising shift, and the aligned copy of y."""

    distance: float
    shift: int
    aligned: np.ndarray


@dataclass(frozen=True)
class KShapeConfig:
    """Settings for one k-shape fit (defaults follow the clustering loop's
    usual 16 restarts and 1e-6 convergence tolerance)."""

    k: int
    n_init: int = 16
    max_iter: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.n_init < 1:
            raise ValueError(f"n_init must be >= 1, got {self.n_init}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


def _check_equal_length(xv: np.ndarray, yv: np.ndarray) -> int:
    if xv.size != yv.size:
        raise ValueError(f"length mismatch: {xv.size} != {yv.size}")
    return xv.size


def cross_correlation_naive(x, y) -> CrossCorrelationSequence:
    """Direct O(m^2) evaluation of the cross-correlation sequence."""
    xv = as_values(x)
    yv = as_values(y)
    m = _check_equal_length(xv, yv)
    out = np.empty(2 * m - 1)
    for s in range(-(m - 1), m):
        if s >= 0:
            out[s + m - 1] = float(np.dot(xv[: m - s], yv[s:]))
        else:
            out[s + m - 1] = float(np.dot(xv[-s:], yv[: m + s]))
    return CrossCorrelationSequence(out)


def _cc_values_fft(xv: np.ndarray, yv: np.ndarray) -> np.ndarray:
    m = xv.size
    length = 1
    while length < 2 * m - 1:
        length *= 2
    spec = np.fft.rfft(yv, length) * np.conj(np.fft.rfft(xv, length))
    cc = np.fft.irfft(spec, length)
    # unwrap circular indices: negative shifts wrap to the tail
    return np.concatenate((cc[length - (m - 1) : length], cc[:m]))


def cross_correlation_fft(x, y) -> CrossCorrelationSequence:
    """Cross-correlation via forward transforms of zero-padded inputs,
    conjugate multiplication, and the inverse transform.

    The pad length is the smallest power of two >= 2m - 1, so the circular
    correlation never wraps; agrees with the naive path to ~1e-10.
    """
    xv = as_values(x)
    yv = as_values(y)
    _check_equal_length(xv, yv)
    return CrossCorrelationSequence(_cc_values_fft(xv, yv))


def _best_shift(ncc: np.ndarray, m: int) -> tuple[int, float]:
    # scan shifts by the tie-break priority: smallest |s|, negative first
    best_s = 0
    best_v = ncc[m - 1]
    for a in range(1, m):
        for s in (-a, a):
            v = ncc[s + m - 1]
            if v > best_v:
                best_v = v
                best_s = s
    return best_s, float(best_v)


def _shift_with_padding(yv: np.ndarray, s: int) -> np.ndarray:
    out = np.zeros_like(yv)
    m = yv.size
    if s >= 0:
        out[: m - s] = yv[s:]
    else:
        out[-s:] = yv[: m + s]
    return out


def sbd(x, y) -> SbdResult:
    """Shape-based distance between two equal-length series.

    distance = 1 - max over shifts of the normalised cross-correlation;
    the maximising coefficient is clamped into [-1, 1] before subtracting
    (anything outside is floating-point noise past the Cauchy-Schwarz
    bound). Ties on the shift go to the smallest magnitude, negative
    before positive. The aligned copy of y is y slid by the optimal shift
    with zero padding.
    """
    xv = as_values(x)
    yv = as_values(y)
    m = _check_equal_length(xv, yv)
    nx = float(np.dot(xv, xv))
    ny = float(np.dot(yv, yv))
    if nx < ZERO_NORM_ATOL**2 or ny < ZERO_NORM_ATOL**2:
        raise ValueError("shape-based distance is undefined for all-zero series")
    ncc = _cc_values_fft(xv, yv) / math.sqrt(nx * ny)
    shift, coeff = _best_shift(ncc, m)
    coeff = min(max(coeff, -1.0), 1.0)
    return SbdResult(1.0 - coeff, shift, _shift_with_padding(yv, shift))


def _sbd_distance(xv: np.ndarray, yv: np.ndarray) -> float:
    nx = float(np.dot(xv, xv))
    ny = float(np.dot(yv, yv))
    if nx < ZERO_NORM_ATOL**2 or ny < ZERO_NORM_ATOL**2:
        return 1.0
    ncc_max = float(_cc_values_fft(xv, yv).max()) / math.sqrt(nx * ny)
    return 1.0 - min(max(ncc_max, -1.0), 1.0)


def sbd_distance(x, y) -> float:
    """SBD value only, with the all-zero convention used inside fits:
    a degenerate series sits at distance 1 from everything (including
    another degenerate series)."""
    xv = as_values(x)
    yv = as_values(y)
    _check_equal_length(xv, yv)
    return _sbd_distance(xv, yv)


def _principal_direction(mat: np.ndarray) -> np.ndarray:
    """Leading eigenvector of the centered Gram matrix of aligned members.

    mat has aligned members as rows. For short series a dense symmetric
    eigendecomposition is used; longer ones switch to power iteration on
    the implicit operator.
    """
    m = mat.shape[1]
    centered = mat - mat.mean(axis=1, keepdims=True)
    if m <= EIGH_MAX_LENGTH:
        gram = centered.T @ centered
        _, vecs = np.linalg.eigh(gram)
        return vecs[:, -1]
    start = centered.mean(axis=0)
    norm = float(np.linalg.norm(start))
    v = start / norm if norm > ZERO_NORM_ATOL else np.full(m, 1.0 / math.sqrt(m))
    for _ in range(POWER_ITER_MAX):
        w = centered.T @ (centered @ v)
        w -= w.mean()  # stay in the centered subspace
        norm = float(np.linalg.norm(w))
        if norm <= ZERO_NORM_ATOL:
            return v
        w /= norm
        if float(np.abs(w - v).max()) < POWER_ITER_TOL:
            return w
        v = w
    return v


def shape_extraction(members, reference) -> TimeSeries:
    """Extract the cluster shape: align members to the reference by their
    optimal SBD shift, then take the z-normalised direction maximising the
    summed squared correlation to the aligned members.

    The direction's sign is fixed by positive correlation with the
    elementwise mean of the aligned members. An all-zero reference (fresh
    cluster) leaves members unshifted.
    """
    vals = [as_values(ts) for ts in members]
    if not vals:
        raise ValueError("member list must be nonempty")
    m = vals[0].size
    for v in vals[1:]:
        if v.size != m:
            raise ValueError("members must share one length")
    ref = as_values(reference)
    if ref.size != m:
        raise ValueError("reference length must match member length")

    ref_zero = float(np.dot(ref, ref)) < ZERO_NORM_ATOL**2
    aligned = []
    for v in vals:
        if ref_zero or float(np.dot(v, v)) < ZERO_NORM_ATOL**2:
            aligned.append(v.copy())
        else:
            aligned.append(sbd(ref, v).aligned)
    mat = np.stack(aligned)

    direction = _principal_direction(mat)
    if float(np.dot(direction, mat.mean(axis=0))) < 0:
        direction = -direction
    scaled, _ = znormalize(TimeSeries("shape", direction))
    return scaled


def _extract_centers(values, labels, centers, k):
    new_centers = []
    for j in range(k):
        members = [values[i] for i in range(len(values)) if labels[i] == j]
        new_centers.append(shape_extraction(members, centers[j]).values)
    return new_centers


def _assign_all_sbd(values, centers):
    n = len(values)
    labels = np.empty(n, dtype=np.int64)
    dists = np.empty(n)
    for i, v in enumerate(values):
        best = 0
        best_dist = np.inf
        for idx, c in enumerate(centers):
            d = _sbd_distance(v, c)
            if d < best_dist:
                best_dist = d
                best = idx
        labels[i] = best
        dists[i] = best_dist
    return labels, dists


def _random_full_labels(n, k, rng) -> np.ndarray:
    """Random label init with empties filled from the largest clusters."""
    labels = rng.integers(0, k, size=n).astype(np.int64)
    counts = np.bincount(labels, minlength=k)
    for j in range(k):
        if counts[j] > 0:
            continue
        donor = int(np.argmax(counts))
        i = int(np.flatnonzero(labels == donor)[0])
        labels[i] = j
        counts[donor] -= 1
        counts[j] += 1
    return labels


def _fit_single_kshape(values, config: KShapeConfig, rng: np.random.Generator):
    n = len(values)
    m = values[0].size
    labels = _random_full_labels(n, config.k, rng)
    centers = [np.zeros(m) for _ in range(config.k)]

    def self_dist(v):
        return _sbd_distance(v, v)

    prev_inertia = np.inf
    trace = []
    converged = False
    rounds = 0
    for _ in range(config.max_iter):
        rounds += 1
        old_centers = centers
        centers = _extract_centers(values, labels, old_centers, config.k)
        new_labels, dists = _assign_all_sbd(values, centers)
        repair_empty_clusters(new_labels, dists, centers, values, self_dist)
        cur = math.fsum(dists)
        if cur > prev_inertia + 1e-12:
            # an eigenvector update is not guaranteed to descend; drop the
            # worse round and keep the previous state
            centers = old_centers
            converged = True
            break
        labels = new_labels
        trace.append(cur)
        # stable labels alone are not convergence: centroids keep refining
        # on re-aligned members until the inertia improvement stalls
        if prev_inertia - cur < config.tol:
            prev_inertia = cur
            converged = True
            break
        prev_inertia = cur

    final_labels, dists = _assign_all_sbd(values, centers)
    repair_empty_clusters(final_labels, dists, centers, values, self_dist)
    final_inertia = math.fsum(dists)
    trace.append(final_inertia)
    return final_labels, centers, final_inertia, rounds, converged, trace


def fit_kshape(dataset: Dataset, config: KShapeConfig) -> ClusterModel:
    """Fit k-shape with restarts: random seeded label initialisation,
    alternating shape extraction and SBD assignment until the inertia
    improvement drops below ``tol`` (a worsening round is dropped and the
    previous state kept); the lowest-inertia restart wins.

    Series should be z-normalised (the distance assumes it); otherwise a
    warning diagnostic is attached. Degenerate all-zero series are allowed
    and sit at distance 1 from every center.
    """
    if config.k > dataset.n:
        raise ValueError(f"k={config.k} exceeds the {dataset.n} series available")
    diagnostics = list(normalization_diagnostics(dataset))
    degenerate = [ts.id for ts in dataset.series if float(np.dot(ts.values, ts.values)) < ZERO_NORM_ATOL**2]
    if degenerate:
        diagnostics.append(
            "all-zero series assigned by the distance-1 convention: "
            + ", ".join(degenerate)
        )
    values = [ts.values for ts in dataset.series]

    children = np.random.SeedSequence(config.seed).spawn(config.n_init)
    best = None
    for child in children:
        rng = np.random.default_rng(child)
        result = _fit_single_kshape(values, config, rng)
        if best is None or result[2] < best[2]:
            best = result

    labels, centers, run_inertia, rounds, converged, trace = best
    center_series = tuple(
        TimeSeries(f"kshape-center-{j}", centers[j]) for j in range(config.k)
    )
    return ClusterModel(
        algorithm="k-shape",
        k=config.k,
        labels=tuple(int(v) for v in labels),
        centers=center_series,
        inertia=run_inertia,
        iterations=rounds,
        converged=converged,
        seed=config.seed,
        inertia_trace=tuple(trace),
        diagnostics=tuple(diagnostics),
    )


def pairwise_sbd(rows, cols=None) -> np.ndarray:
    """SBD distance matrix; with cols=None the symmetric self-matrix.

    Uses the fitting convention for degenerate series (distance 1), so it
    is total on any input.
    """
    row_vals = [as_values(r) for r in rows]
    if cols is None:
        n = len(row_vals)
        out = np.zeros((n, n))
        for i in range(n):
            out[i, i] = _sbd_distance(row_vals[i], row_vals[i])
            for j in range(i + 1, n):
                v = _sbd_distance(row_vals[i], row_vals[j])
                out[i, j] = v
                out[j, i] = v
        return out
    col_vals = [as_values(c) for c in cols]
    out = np.empty((len(row_vals), len(col_vals)))
    for i, rv in enumerate(row_vals):
        for j, cv in enumerate(col_vals):
            out[i, j] = _sbd_distance(rv, cv)
    return out
