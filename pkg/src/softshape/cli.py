"""Command-line interface: `cluster` runs the full pipeline, `metrics`
scores a precomputed labeling, `compare` measures agreement between two
labelings, and `distance` evaluates one pair of series (a debugging aid).

Flags mirror the pipeline configuration; a `key = value` config file can
supply any of them, with explicit flags taking precedence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .core import TimeSeries, znormalize
from .kshape import sbd
from .pipeline import (
    OUTPUT_DIR_ENV,
    PipelineConfig,
    PipelineError,
    ingest_cases,
    run_pipeline,
    silhouette_matrix,
)
from .softdtw import dtw, gak, soft_dtw
from .validation import (
    agreement_matrix,
    calinski_harabasz,
    consensus_groups,
    silhouette,
)


def _read_config_file(path: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_INGEST_DEFAULTS = {
    "id_column": "id",
    "date_column": "date",
    "value_column": "value",
    "case_type_column": "case_type",
    "transform": "cumulative",
}


def _add_ingest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="input CSV (header row, ISO-8601 dates)")
    parser.add_argument("--id-column")
    parser.add_argument("--date-column")
    parser.add_argument("--value-column")
    parser.add_argument("--case-type-column")
    parser.add_argument("--case-type", help="keep only rows with this case type")
    parser.add_argument(
        "--transform",
        choices=["cumulative", "daily"],
        help="cluster values as ingested, or daily-differenced",
    )


def _merged(args, file_config: dict[str, str], key: str, cast, fallback):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_config:
        return cast(file_config[key])
    return fallback


def _pipeline_config(args) -> PipelineConfig:
    file_config = _read_config_file(args.config) if args.config else {}

    def get(key, cast, fallback):
        return _merged(args, file_config, key, cast, fallback)

    input_path = get("input", str, None)
    if not input_path:
        raise ValueError("an input CSV is required (--input or config file)")
    kwargs = dict(
        input_path=input_path,
        case_type=get("case_type", str, None),
        k=get("k", int, 3),
        gamma=get("gamma", float, 0.1),
        n_init=get("n_init", int, 16),
        max_iter=get("max_iter", int, 50),
        tol=get("tol", float, 1e-6),
        barycenter_max_iter=get("barycenter_max_iter", int, 15),
        seed=get("seed", int, 0),
        silhouette_basis=get("silhouette_basis", str, "native"),
    )
    for key, fallback in _INGEST_DEFAULTS.items():
        kwargs[key] = get(key, str, fallback)
    outdir = get("output_dir", str, None)
    if outdir is not None:
        kwargs["output_dir"] = outdir
    return PipelineConfig(**kwargs)


def _read_labels_csv(path: str, id_column: str, label_column: str):
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in (id_column, label_column):
            if column not in header:
                raise ValueError(f"{path}: missing column {column!r} in {header}")
        pairs = [(row[id_column], int(row[label_column])) for row in reader]
    if not pairs:
        raise ValueError(f"{path}: no label rows")
    return dict(pairs)


def _read_series_column(path: str, column: str) -> np.ndarray:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if column not in (reader.fieldnames or []):
            raise ValueError(f"{path}: missing column {column!r}")
        values = [float(row[column]) for row in reader if row[column] != ""]
    if not values:
        raise ValueError(f"{path}: column {column!r} has no values")
    return np.asarray(values)


def _cmd_cluster(args) -> int:
    config = _pipeline_config(args)
    report = run_pipeline(config)
    basis = 0 if config.silhouette_basis == "native" else 1
    print(f"n={report.n} m={report.m} dates {report.dates[0]}..{report.dates[-1]}")
    for name, model, validity in (
        ("kmeans", report.kmeans_model, report.kmeans_validity),
        ("kshape", report.kshape_model, report.kshape_validity),
    ):
        chosen = validity[basis]
        sil = "n/a" if chosen.silhouette is None else f"{chosen.silhouette:.4f}"
        ch = (
            "n/a"
            if chosen.calinski_harabasz is None
            else f"{chosen.calinski_harabasz:.4f}"
        )
        print(
            f"{name}: inertia={model.inertia:.6f} "
            f"silhouette[{chosen.silhouette_basis}]={sil} "
            f"calinski_harabasz={ch} converged={model.converged}"
        )
    print(f"ari={report.agreement.ari:.6f} outliers={len(report.agreement.outliers)}")
    for path in report.manifest:
        print(f"wrote {path}")
    return 0


def _cmd_metrics(args) -> int:
    config = _pipeline_config(args)
    dataset, _ = ingest_cases(config)
    labels_by_id = _read_labels_csv(args.labels, args.labels_id_column, args.label_column)
    missing = [sid for sid in dataset.ids if sid not in labels_by_id]
    if missing:
        raise ValueError(f"labels file lacks ids: {missing[:5]}")
    labels = [labels_by_id[sid] for sid in dataset.ids]

    k = len(set(labels))
    sil = None
    if k >= 2:
        dmat = silhouette_matrix(dataset, args.basis, config.gamma)
        sil = silhouette(dataset, labels, dmat)
    payload = {
        "n": dataset.n,
        "k": k,
        "basis": args.basis,
        "silhouette": sil,
        "calinski_harabasz": (
            calinski_harabasz(dataset, labels) if 2 <= k < dataset.n else None
        ),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_compare(args) -> int:
    a = _read_labels_csv(args.labels_a, args.id_column, args.label_column)
    b = _read_labels_csv(args.labels_b, args.id_column, args.label_column)
    if set(a) != set(b):
        only_a = sorted(set(a) - set(b))[:5]
        only_b = sorted(set(b) - set(a))[:5]
        raise ValueError(f"id sets differ (only in A: {only_a}, only in B: {only_b})")
    ids = sorted(a)
    labels_a = [a[i] for i in ids]
    labels_b = [b[i] for i in ids]
    report = agreement_matrix(labels_a, labels_b, ids)
    payload = {
        "ari": report.ari,
        "contingency": report.contingency.tolist(),
        "consensus": [
            {"label_a": x, "label_b": y, "size": len(members), "members": list(members)}
            for x, y, members in consensus_groups(report)
        ],
        "outliers": list(report.outliers),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_distance(args) -> int:
    x = _read_series_column(args.input, args.x_column)
    y = _read_series_column(args.input, args.y_column)
    if args.znormalize:
        x = znormalize(TimeSeries("x", x))[0].values
        y = znormalize(TimeSeries("y", y))[0].values
    payload: dict[str, object] = {"metric": args.metric}
    if args.metric == "softdtw":
        payload["value"] = soft_dtw(x, y, args.gamma).value
        payload["gamma"] = args.gamma
    elif args.metric == "dtw":
        payload["value"] = dtw(x, y)[0]
    elif args.metric == "gak":
        payload["value"] = gak(x, y, args.gamma)
        payload["gamma"] = args.gamma
    else:
        result = sbd(x, y)
        payload["value"] = result.distance
        payload["shift"] = result.shift
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softshape",
        description="Cluster equal-length time series with soft-DTW k-means "
        "and k-shape, then compare the two partitions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cluster = sub.add_parser("cluster", help="run the full pipeline")
    _add_ingest_flags(cluster)
    cluster.add_argument("--config", help="key = value file supplying any flag")
    cluster.add_argument("-k", "--clusters", dest="k", type=int)
    cluster.add_argument("--gamma", type=float)
    cluster.add_argument("--n-init", type=int)
    cluster.add_argument("--max-iter", type=int)
    cluster.add_argument("--tol", type=float)
    cluster.add_argument("--barycenter-max-iter", type=int)
    cluster.add_argument("--seed", type=int)
    cluster.add_argument(
        "-o",
        "--output-dir",
        help=f"artifact directory (default from ${OUTPUT_DIR_ENV} or ./softshape-out)",
    )
    cluster.add_argument("--silhouette-basis", choices=["native", "euclidean"])
    cluster.set_defaults(func=_cmd_cluster)

    metrics = sub.add_parser("metrics", help="validity indices for given labels")
    _add_ingest_flags(metrics)
    metrics.add_argument("--config")
    metrics.add_argument("--labels", required=True, help="CSV with id + label columns")
    metrics.add_argument("--labels-id-column", default="id")
    metrics.add_argument("--label-column", default="label")
    metrics.add_argument(
        "--basis", choices=["euclidean", "softdtw", "sbd"], default="euclidean"
    )
    metrics.add_argument("--gamma", type=float)
    metrics.set_defaults(func=_cmd_metrics)

    compare = sub.add_parser("compare", help="agreement between two labelings")
    compare.add_argument("--labels-a", required=True)
    compare.add_argument("--labels-b", required=True)
    compare.add_argument("--id-column", default="id")
    compare.add_argument("--label-column", default="label")
    compare.set_defaults(func=_cmd_compare)

    distance = sub.add_parser("distance", help="one distance evaluation")
    distance.add_argument("--input", required=True, help="CSV holding both columns")
    distance.add_argument("--x-column", required=True)
    distance.add_argument("--y-column", required=True)
    distance.add_argument(
        "--metric", choices=["softdtw", "dtw", "sbd", "gak"], default="softdtw"
    )
    distance.add_argument("--gamma", type=float, default=0.1)
    distance.add_argument("--znormalize", action="store_true")
    distance.set_defaults(func=_cmd_distance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
