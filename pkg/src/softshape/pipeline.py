"""End-to-end pipeline: CSV ingestion, dual clustering, validity and
agreement reports, and artifact emission."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, asdict, replace
from datetime import date
from pathlib import Path

import numpy as np

from . import svgplot
from .core import Dataset, ScalingReport, normalize_dataset, validate_dataset
from .kmeans import KMeansConfig, fit_soft_dtw_kmeans
from .kshape import KShapeConfig, fit_kshape, pairwise_sbd
from .model import ClusterModel
from .softdtw import pairwise_soft_dtw
from .validation import (
    AgreementReport,
    ValidityReport,
    agreement_matrix,
    calinski_harabasz,
    consensus_groups,
    silhouette,
)

OUTPUT_DIR_ENV = "SOFTSHAPE_OUTDIR"

TRANSFORMS = ("cumulative", "daily")
SILHOUETTE_BASES = ("native", "euclidean")


class PipelineError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one `cluster` run needs.

    ``transform`` selects cumulative (as-ingested) or daily-differenced
    values. ``seed`` is the master seed: k-means runs with it directly and
    k-shape with seed + 1, both echoed into the metrics output.
    """

    input_path: str
    id_column: str = "id"
    date_column: str = "date"
    value_column: str = "value"
    case_type_column: str = "case_type"
    case_type: str | None = None
    transform: str = "cumulative"
    k: int = 3
    gamma: float = 0.1
    n_init: int = 16
    max_iter: int = 50
    tol: float = 1e-6
    barycenter_max_iter: int = 15
    seed: int = 0
    output_dir: str = field(
        default_factory=lambda: os.environ.get(OUTPUT_DIR_ENV, "softshape-out")
    )
    silhouette_basis: str = "native"

    def __post_init__(self):
        if not self.input_path:
            raise ValueError("input_path must be nonempty")
        if not self.output_dir:
            raise ValueError("output_dir must be nonempty")
        if self.transform not in TRANSFORMS:
            raise ValueError(
                f"transform must be one of {TRANSFORMS}, got {self.transform!r}"
            )
        if self.silhouette_basis not in SILHOUETTE_BASES:
            raise ValueError(
                f"silhouette_basis must be one of {SILHOUETTE_BASES}, "
                f"got {self.silhouette_basis!r}"
            )
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class IngestReport:
    """What ingestion did: the retained date axis, how many negative daily
    differences were clamped to zero, and per-series scaling provenance."""

    dates: tuple[str, ...]
    clamp_count: int
    scaling: tuple[ScalingReport, ...]


@dataclass(frozen=True)
class RunReport:
    """Everything a finished run produced, including the file manifest."""

    config: PipelineConfig
    dataset: Dataset
    dates: tuple[str, ...]
    kmeans_model: ClusterModel
    kshape_model: ClusterModel
    kmeans_validity: tuple[ValidityReport, ...]
    kshape_validity: tuple[ValidityReport, ...]
    agreement: AgreementReport
    clamp_count: int
    manifest: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.dataset.n

    @property
    def m(self) -> int:
        return self.dataset.length


def _parse_float(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ValueError(f"{where}: cannot parse value {text!r}") from exc


def _read_rows(config: PipelineConfig):
    path = Path(config.input_path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        needed = [config.id_column, config.date_column, config.value_column]
        if config.case_type is not None:
            needed.append(config.case_type_column)
        missing = [c for c in needed if c not in header]
        if missing:
            raise ValueError(f"missing columns {missing}; header has {header}")
        for line_no, row in enumerate(reader, start=2):
            if config.case_type is not None:
                if row[config.case_type_column] != config.case_type:
                    continue
            sid = row[config.id_column]
            try:
                day = date.fromisoformat(row[config.date_column])
            except ValueError as exc:
                raise ValueError(f"line {line_no}: {exc}") from exc
            value = _parse_float(row[config.value_column], f"line {line_no}")
            yield sid, day, value


def ingest_cases(config: PipelineConfig) -> tuple[Dataset, IngestReport]:
    """Read, filter, pivot, gap-fill, optionally difference, and z-normalise.

    Rows are filtered by case type when configured and pivoted to one series
    per id. The time axis is the union of observed dates inside the common
    range (latest start to earliest end); per-id gaps are filled by carrying
    the last value forward (cumulative semantics). Daily differencing clamps
    negative steps to zero and counts the clamps. Multiple rows for one
    (id, date) are summed, so finer-grained rows aggregate naturally.
    """
    per_id: dict[str, dict[date, float]] = {}
    for sid, day, value in _read_rows(config):
        by_date = per_id.setdefault(sid, {})
        by_date[day] = by_date.get(day, 0.0) + value
    if not per_id:
        raise ValueError("no rows left after filtering")

    starts = {sid: min(d) for sid, d in per_id.items()}
    ends = {sid: max(d) for sid, d in per_id.items()}
    start = max(starts.values())
    end = min(ends.values())
    if start > end:
        late = max(starts, key=lambda s: starts[s])
        early = min(ends, key=lambda s: ends[s])
        raise ValueError(
            f"ids have no overlapping date range: {late!r} starts {starts[late]}, "
            f"{early!r} ends {ends[early]}"
        )
    axis = sorted({d for dates in per_id.values() for d in dates if start <= d <= end})

    series = []
    for sid, by_date in per_id.items():
        observed = sorted(by_date)
        filled = np.empty(len(axis))
        pos = 0
        carry = math.nan
        for i, day in enumerate(axis):
            while pos < len(observed) and observed[pos] <= day:
                carry = by_date[observed[pos]]
                pos += 1
            filled[i] = carry
        series.append((sid, filled))

    clamp_count = 0
    dates = [d.isoformat() for d in axis]
    if config.transform == "daily":
        diffed = []
        for sid, values in series:
            delta = np.diff(values)
            clamp_count += int((delta < 0).sum())
            diffed.append((sid, np.maximum(delta, 0.0)))
        series = diffed
        dates = dates[1:]

    dataset = validate_dataset(series)
    dataset, scaling = normalize_dataset(dataset)
    return dataset, IngestReport(tuple(dates), clamp_count, tuple(scaling))


def silhouette_matrix(dataset: Dataset, basis: str, gamma: float = 0.1) -> np.ndarray:
    """Pairwise distances for silhouette under one basis.

    "softdtw" uses the self-normalised soft-DTW divergence (raw soft-DTW
    can be negative, which would break the silhouette range), "sbd" the
    shape-based distance with the degenerate-series convention, and
    "euclidean" the flattened norm.
    """
    values = [ts.values for ts in dataset.series]
    if basis == "softdtw":
        raw = pairwise_soft_dtw(values, gamma=gamma)
        self_costs = np.diag(raw)
        return raw - 0.5 * (self_costs[:, None] + self_costs[None, :])
    if basis == "sbd":
        return pairwise_sbd(values)
    if basis == "euclidean":
        mat = np.stack(values)
        sq = (mat**2).sum(axis=1)
        gram = mat @ mat.T
        return np.sqrt(np.maximum(sq[:, None] + sq[None, :] - 2 * gram, 0.0))
    raise ValueError(f"unknown silhouette basis {basis!r}")


def _validity_reports(dataset: Dataset, model: ClusterModel, native_basis, gamma):
    """Silhouette under the native and Euclidean bases plus the flattened
    variance ratio (which is only defined in a vector space)."""
    k = len(set(model.labels))
    n = dataset.n
    ch = calinski_harabasz(dataset, model.labels) if 2 <= k < n else None
    reports = []
    for name in (native_basis, "euclidean"):
        if k >= 2:
            sil = silhouette(dataset, model.labels, silhouette_matrix(dataset, name, gamma))
        else:
            sil = None
        label = "soft-dtw" if name == "softdtw" else name
        reports.append(ValidityReport(sil, ch, label))
    return tuple(reports)


def run_pipeline(config: PipelineConfig) -> RunReport:
    """Ingest, fit both models, score them, compare them, emit artifacts.

    Any failure is re-raised as PipelineError naming the stage.
    """
    stage = "ingest"
    try:
        dataset, ingest_report = ingest_cases(config)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    stage = "fit-kmeans"
    try:
        km_config = KMeansConfig(
            k=config.k,
            gamma=config.gamma,
            n_init=config.n_init,
            max_iter=config.max_iter,
            tol=config.tol,
            seed=config.seed,
            barycenter_max_iter=config.barycenter_max_iter,
        )
        kmeans_model = fit_soft_dtw_kmeans(dataset, km_config)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    stage = "fit-kshape"
    try:
        ks_config = KShapeConfig(
            k=config.k,
            n_init=config.n_init,
            max_iter=config.max_iter,
            tol=config.tol,
            seed=config.seed + 1,
        )
        kshape_model = fit_kshape(dataset, ks_config)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    stage = "validity"
    try:
        kmeans_validity = _validity_reports(dataset, kmeans_model, "softdtw", config.gamma)
        kshape_validity = _validity_reports(dataset, kshape_model, "sbd", config.gamma)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    stage = "agreement"
    try:
        agreement = agreement_matrix(
            kmeans_model.labels, kshape_model.labels, dataset.ids
        )
    except Exception as exc:
        raise PipelineError(stage, exc) from exc

    report = RunReport(
        config=config,
        dataset=dataset,
        dates=ingest_report.dates,
        kmeans_model=kmeans_model,
        kshape_model=kshape_model,
        kmeans_validity=kmeans_validity,
        kshape_validity=kshape_validity,
        agreement=agreement,
        clamp_count=ingest_report.clamp_count,
        manifest=(),
    )

    stage = "emit"
    try:
        manifest = emit_outputs(report, Path(config.output_dir))
    except Exception as exc:
        raise PipelineError(stage, exc) from exc
    return replace(report, manifest=manifest)


def _consensus_column(report: RunReport) -> dict[str, str]:
    matched = set(report.agreement.consensus)
    out = {}
    for sid, a, b in zip(
        report.agreement.ids, report.agreement.labels_a, report.agreement.labels_b
    ):
        out[sid] = f"{a}:{b}" if (a, b) in matched else ""
    return out


def _metrics_payload(report: RunReport) -> dict:
    def model_block(model: ClusterModel, validity):
        return {
            "inertia": model.inertia,
            "iterations": model.iterations,
            "converged": model.converged,
            "seed": model.seed,
            "diagnostics": list(model.diagnostics),
            "silhouette": {
                r.silhouette_basis: r.silhouette for r in validity
            },
            "calinski_harabasz": validity[0].calinski_harabasz,
        }

    groups = consensus_groups(report.agreement)
    n = report.n
    return {
        "dataset": {
            "n": report.n,
            "m": report.m,
            "date_start": report.dates[0],
            "date_end": report.dates[-1],
            "clamped_negative_diffs": report.clamp_count,
        },
        "config": asdict(report.config),
        "models": {
            "kmeans": model_block(report.kmeans_model, report.kmeans_validity),
            "kshape": model_block(report.kshape_model, report.kshape_validity),
        },
        "ari": report.agreement.ari,
        "contingency": report.agreement.contingency.tolist(),
        "consensus": [
            {
                "kmeans_label": a,
                "kshape_label": b,
                "size": len(members),
                "share": len(members) / n,
                "members": list(members),
            }
            for a, b, members in groups
        ],
        "outliers": list(report.agreement.outliers),
    }


def emit_outputs(report: RunReport, outdir) -> tuple[str, ...]:
    """Write assignments CSV, centers CSV, metrics JSON, and the SVG plots.

    Returns the manifest of written paths. Output is byte-deterministic for
    identical inputs (stable JSON key order, repr-based float formatting,
    no timestamps).
    """
    dataset = report.dataset
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = []

    consensus = _consensus_column(report)
    path = outdir / "assignments.csv"
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "kmeans_label", "kshape_label", "consensus_group"])
        for sid, a, b in zip(
            report.agreement.ids, report.agreement.labels_a, report.agreement.labels_b
        ):
            writer.writerow([sid, a, b, consensus[sid]])
    manifest.append(str(path))

    path = outdir / "centers.csv"
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["algorithm", "cluster", "t", "value"])
        for model in (report.kmeans_model, report.kshape_model):
            for j, center in enumerate(model.centers):
                for t, value in enumerate(center.values):
                    writer.writerow([model.algorithm, j, t, repr(float(value))])
    manifest.append(str(path))

    path = outdir / "metrics.json"
    with path.open("w", encoding="utf-8") as handle:
        json.dump(_metrics_payload(report), handle, indent=2, sort_keys=True)
        handle.write("\n")
    manifest.append(str(path))

    values = dataset.values_matrix()
    for model, name in (
        (report.kmeans_model, "kmeans_clusters.svg"),
        (report.kshape_model, "kshape_clusters.svg"),
    ):
        clusters = []
        for j in range(model.k):
            members = [values[i] for i in range(dataset.n) if model.labels[i] == j]
            clusters.append((j, members, model.centers[j].values))
        path = outdir / name
        path.write_text(
            svgplot.cluster_small_multiples(model.algorithm, clusters),
            encoding="utf-8",
        )
        manifest.append(str(path))

    path = outdir / "agreement_matrix.svg"
    path.write_text(
        svgplot.agreement_heatmap(report.agreement.contingency, "kmeans", "kshape"),
        encoding="utf-8",
    )
    manifest.append(str(path))
    return tuple(manifest)
