"""Core series/dataset types, validation, and z-normalisation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# A series counts as constant (degenerate) when its population standard
# deviation is below this tolerance, relative to the magnitude of its mean.
DEGENERACY_RTOL = 1e-12


class DatasetValidationError(ValueError):
    """Raw input cannot form a valid dataset. Carries every violation found."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class TimeSeries:
    """One labelled, uniformly sampled sequence of finite real values.

    The time axis is implied by position (uniform steps). Values are stored
    as a read-only float64 array of length >= 2.
    """

    id: str
    values: np.ndarray

    def __post_init__(self):
        try:
            values = np.asarray(self.values, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"series {self.id!r}: values are not numeric") from exc
        if values.ndim != 1:
            raise ValueError(f"series {self.id!r}: values must be one-dimensional")
        if values.size < 2:
            raise ValueError(
                f"series {self.id!r}: length must be >= 2, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            bad = np.flatnonzero(~np.isfinite(values)).tolist()
            raise ValueError(
                f"series {self.id!r}: non-finite values at positions {bad}"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of equal-length series with pairwise distinct ids."""

    series: tuple[TimeSeries, ...]

    def __post_init__(self):
        series = tuple(self.series)
        if not series:
            raise ValueError("dataset must contain at least one series")
        m = len(series[0])
        for ts in series[1:]:
            if len(ts) != m:
                raise ValueError(
                    f"series {ts.id!r}: length {len(ts)} != expected {m}"
                )
        ids = [ts.id for ts in series]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate series ids: {dupes}")
        object.__setattr__(self, "series", series)

    @property
    def n(self) -> int:
        return len(self.series)

    @property
    def length(self) -> int:
        """Shared series length m."""
        return len(self.series[0])

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(ts.id for ts in self.series)

    def values_matrix(self) -> np.ndarray:
        """All series stacked into an (n, m) array (a writable copy)."""
        return np.stack([ts.values for ts in self.series]).copy()


@dataclass(frozen=True)
class ScalingReport:
    """Provenance of one series' z-normalisation."""

    original_mean: float
    original_std: float
    degenerate: bool


def as_values(x) -> np.ndarray:
    """Coerce a TimeSeries or array-like to a 1-D finite float64 array.

    Distance operations accept plain sequences as well as TimeSeries, and
    unlike TimeSeries itself allow length-1 inputs (a single-sample pair has
    exactly one alignment).
    """
    if isinstance(x, TimeSeries):
        return x.values
    values = np.asarray(x, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    if values.size == 0:
        raise ValueError("expected a nonempty sequence")
    if not np.all(np.isfinite(values)):
        raise ValueError("sequence contains non-finite values")
    return values


def znormalize(series: TimeSeries) -> tuple[TimeSeries, ScalingReport]:
    """Scale a series to mean 0 and population standard deviation 1.

    Constant (zero-variance) series map to all zeros and are flagged as
    degenerate in the report rather than raising: a flat series is
    legitimate data and downstream distances stay well-defined.

    Returns
    -------
    (TimeSeries, ScalingReport)
        The scaled series (same id) and the scaling provenance.
    """
    v = series.values
    mean = float(v.mean())
    std = float(v.std())  # population (divide-by-m) convention
    degenerate = std < DEGENERACY_RTOL * max(1.0, abs(mean))
    if degenerate:
        out = np.zeros_like(v)
    else:
        out = (v - mean) / std
    return TimeSeries(series.id, out), ScalingReport(mean, std, degenerate)


def normalize_dataset(dataset: Dataset) -> tuple[Dataset, list[ScalingReport]]:
    """Z-normalise every series independently, preserving order and ids."""
    scaled = []
    reports = []
    for ts in dataset.series:
        try:
            out, report = znormalize(ts)
        except ValueError as exc:
            raise ValueError(f"series {ts.id!r}: {exc}") from exc
        scaled.append(out)
        reports.append(report)
    return Dataset(tuple(scaled)), reports


def validate_dataset(raw) -> Dataset:
    """Build a Dataset from (id, values) pairs, or fail listing every violation.

    Checks emptiness, id uniqueness, equal lengths against the first series,
    minimum length, and value finiteness, and reports all problems at once in
    a DatasetValidationError.
    """
    pairs = list(raw)
    violations: list[str] = []
    if not pairs:
        raise DatasetValidationError(["no series provided"])

    seen: set[str] = set()
    parsed: list[tuple[str, np.ndarray | None]] = []
    for sid, values in pairs:
        sid = str(sid)
        if sid in seen:
            violations.append(f"duplicate id {sid!r}")
        seen.add(sid)
        try:
            arr = np.asarray(values, dtype=np.float64)
        except (TypeError, ValueError):
            violations.append(f"series {sid!r}: values are not numeric")
            parsed.append((sid, None))
            continue
        if arr.ndim != 1:
            violations.append(f"series {sid!r}: values must be one-dimensional")
            parsed.append((sid, None))
            continue
        parsed.append((sid, arr))

    expected_m: int | None = None
    for sid, arr in parsed:
        if arr is None:
            continue
        if expected_m is None:
            expected_m = arr.size
        if arr.size != expected_m:
            violations.append(
                f"series {sid!r}: length {arr.size} != expected {expected_m}"
            )
        if arr.size < 2:
            violations.append(f"series {sid!r}: length must be >= 2, got {arr.size}")
        bad = np.flatnonzero(~np.isfinite(arr)).tolist()
        if bad:
            violations.append(f"series {sid!r}: non-finite values at positions {bad}")

    if violations:
        raise DatasetValidationError(violations)
    return Dataset(tuple(TimeSeries(sid, arr) for sid, arr in parsed))
