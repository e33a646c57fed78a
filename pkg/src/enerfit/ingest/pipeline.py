"""Ingestion pipeline: fetch -> clean -> split -> fit scalers -> transform.

Produces the three on-disk artifacts (train.csv, test.csv, scalers.json)
plus ingest_meta.json. Scalers are fitted on the training partition only,
so artifact determinism and the no-leakage fingerprint both hold.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..domain import ColumnKind, DatasetSchema, Task, parse_energy_class
from ..errors import EnerfitError
from ..rng import SplitMix64
from .scalers import (
    ScalerBundle,
    ScalerSet,
    UnseenCategoryError,
    fit_scalers,
    table_fingerprint,
    transform,
)
from .sources import ConnectorConfig, RawTable, fetch, validate_source

INGEST_META_VERSION = 1
ARTIFACT_NAMES = ("train.csv", "test.csv", "scalers.json")


class SchemaMismatchError(EnerfitError):
    code = "SchemaMismatch"

    def __init__(self, missing: list[str]):
        super().__init__(f"header is missing schema columns: {', '.join(missing)}")
        self.missing = missing


class BadRatioError(EnerfitError):
    code = "BadRatio"


class TooFewRowsError(EnerfitError):
    code = "TooFewRows"


class StepError(EnerfitError):
    """Wraps a failure with the name of the pipeline step that raised it."""

    code = "StepFailed"

    def __init__(self, step: str, cause: Exception):
        super().__init__(f"{step}: {cause}")
        self.step = step
        self.cause = cause
        if isinstance(cause, EnerfitError):
            self.code = cause.code
            self.field = cause.field

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["step"] = self.step
        return out


@dataclass
class CleanReport:
    rows_in: int
    rows_kept: int
    dropped: list[dict] = field(default_factory=list)


def _coerce_cell(cell: str, kind: ColumnKind):
    text = cell.strip()
    if kind is ColumnKind.CONTINUOUS:
        return float(text)
    if kind is ColumnKind.ORDINAL_CLASS:
        return parse_energy_class(text).label
    if kind is ColumnKind.BOOLEAN:
        lowered = text.lower()
        if lowered in ("1", "true"):
            return True
        if lowered in ("0", "false"):
            return False
        raise ValueError(f"not a boolean: {cell!r}")
    if not text:
        raise ValueError("empty categorical cell")
    return text


def clean(raw: RawTable, schema: DatasetSchema) -> tuple[list[dict], CleanReport]:
    """Coerce raw CSV rows to typed records, dropping unusable rows.

    Rows lacking any target are dropped; missing optional features stay None
    for later imputation; a coercion failure drops the row with a reason.
    """
    all_cols = list(schema.feature_cols) + list(schema.target_cols)
    missing = [c.name for c in all_cols if c.name not in raw.header]
    if missing:
        raise SchemaMismatchError(missing)
    index = {name: raw.header.index(name) for name in (c.name for c in all_cols)}
    rows: list[dict] = []
    report = CleanReport(rows_in=len(raw.rows), rows_kept=0)
    for row_no, record in enumerate(raw.rows, start=1):
        typed: dict = {}
        reason = None
        for col in all_cols:
            cell = record[index[col.name]].strip()
            is_target = col.name in schema.target_names
            if cell == "":
                if is_target:
                    reason = f"missing target {col.name!r}"
                    break
                if col.optional:
                    typed[col.name] = None
                    continue
                reason = f"missing required feature {col.name!r}"
                break
            try:
                typed[col.name] = _coerce_cell(cell, col.kind)
            except (ValueError, EnerfitError):
                reason = f"coercion failure in {col.name!r}: {cell!r}"
                break
        if reason is not None:
            report.dropped.append({"row": row_no, "reason": reason})
            continue
        rows.append(typed)
    report.rows_kept = len(rows)
    return rows, report


@dataclass
class RowSplit:
    train: list[dict]
    test: list[dict]
    split_ratio: float
    seed: int


def split(rows: list[dict], ratio: float, seed: int) -> RowSplit:
    """Deterministic shuffle-and-cut partition.

    Fisher-Yates driven by a splitmix64 stream; the first round(ratio*N)
    shuffled rows form the training partition. Both partitions stay
    non-empty.
    """
    if not 0 < ratio < 1:
        raise BadRatioError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(rows)
    if n < 2:
        raise TooFewRowsError(f"need at least 2 rows to split, got {n}")
    order = list(range(n))
    SplitMix64(seed).shuffle(order)
    n_train = int(ratio * n + 0.5)
    n_train = min(max(n_train, 1), n - 1)
    train = [rows[i] for i in order[:n_train]]
    test = [rows[i] for i in order[n_train:]]
    return RowSplit(train=train, test=test, split_ratio=ratio, seed=seed)


@dataclass
class SplitDataset:
    """Scaled numeric matrices ready for training."""

    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    feature_names: list[str]
    target_names: list[str]
    split_ratio: float
    seed: int


@dataclass
class IngestConfig:
    source: str
    schema: DatasetSchema
    connector: ConnectorConfig | None = None
    split_ratio: float = 0.8
    seed: int = 42


@dataclass
class IngestArtifacts:
    directory: Path
    train_path: Path
    test_path: Path
    scalers_path: Path
    meta_path: Path


def _encode_rows(
    rows: list[dict], features: ScalerSet, targets: ScalerSet
) -> tuple[list[list[float]], list[list[float]], dict[str, int], list[tuple[int, str]]]:
    xs: list[list[float]] = []
    ys: list[list[float]] = []
    imputed_counts: dict[str, int] = {}
    skipped: list[tuple[int, str]] = []
    for i, row in enumerate(rows):
        try:
            x, imputed = transform(features, row)
            y, _ = transform(targets, row)
        except UnseenCategoryError as exc:
            skipped.append((i, f"unseen category in {exc.column!r}: {exc.value!r}"))
            continue
        for name in imputed:
            imputed_counts[name] = imputed_counts.get(name, 0) + 1
        xs.append(x)
        ys.append(y)
    return xs, ys, imputed_counts, skipped


def _write_matrix_csv(path: Path, header: list[str], x_rows: list[list[float]], y_rows: list[list[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for x, y in zip(x_rows, y_rows):
            writer.writerow([repr(v) for v in x] + [repr(v) for v in y])


def run_ingestion(config: IngestConfig, dest: Path | str) -> IngestArtifacts:
    """Execute the full ingestion step into ``dest``.

    Any failure is re-raised as a StepError naming the internal step. A lock
    file guards the directory against concurrent ingestion runs.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    lock_path = dest / ".lock"
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise StepError("lock", EnerfitError(f"another ingestion run holds {lock_path}"))
    try:
        return _run_ingestion_locked(config, dest)
    finally:
        os.close(lock_fd)
        lock_path.unlink(missing_ok=True)


def _run_ingestion_locked(config: IngestConfig, dest: Path) -> IngestArtifacts:
    try:
        source = validate_source(config.source)
    except EnerfitError as exc:
        raise StepError("validate_source", exc)
    try:
        raw = fetch(source, config.connector)
    except EnerfitError as exc:
        raise StepError("fetch", exc)
    try:
        rows, report = clean(raw, config.schema)
    except EnerfitError as exc:
        raise StepError("clean", exc)
    try:
        row_split = split(rows, config.split_ratio, config.seed)
    except EnerfitError as exc:
        raise StepError("split", exc)

    schema = config.schema
    all_names = list(schema.feature_names) + list(schema.target_names)
    fingerprint = table_fingerprint(row_split.train, all_names)
    try:
        features = fit_scalers(row_split.train, list(schema.feature_cols), fingerprint)
        targets = fit_scalers(row_split.train, list(schema.target_cols), fingerprint)
    except EnerfitError as exc:
        raise StepError("fit_scalers", exc)
    bundle = ScalerBundle(
        features=features, targets=targets, targets_scaled=schema.task is Task.REGRESSOR
    )

    try:
        train_x, train_y, imputed_train, skipped_train = _encode_rows(row_split.train, features, targets)
        test_x, test_y, imputed_test, skipped_test = _encode_rows(row_split.test, features, targets)
    except EnerfitError as exc:
        raise StepError("transform", exc)

    header = features.encoded_names() + targets.encoded_names()
    train_path = dest / "train.csv"
    test_path = dest / "test.csv"
    scalers_path = dest / "scalers.json"
    meta_path = dest / "ingest_meta.json"
    try:
        _write_matrix_csv(train_path, header, train_x, train_y)
        _write_matrix_csv(test_path, header, test_x, test_y)
        scalers_path.write_text(bundle.to_json(), encoding="utf-8")
        meta = {
            "format_version": INGEST_META_VERSION,
            "source_kind": source.kind,
            "rows_in": report.rows_in,
            "rows_kept": report.rows_kept,
            "dropped": report.dropped,
            "train_rows": len(train_x),
            "test_rows": len(test_x),
            "split_ratio": config.split_ratio,
            "seed": config.seed,
            "fingerprint": fingerprint,
            "imputed_cells": {
                name: imputed_train.get(name, 0) + imputed_test.get(name, 0)
                for name in sorted(set(imputed_train) | set(imputed_test))
            },
            "skipped_unseen": [
                {"partition": part, "row": i, "reason": reason}
                for part, entries in (("train", skipped_train), ("test", skipped_test))
                for i, reason in entries
            ],
        }
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise StepError("persist", EnerfitError(str(exc)))
    return IngestArtifacts(
        directory=dest,
        train_path=train_path,
        test_path=test_path,
        scalers_path=scalers_path,
        meta_path=meta_path,
    )


def load_split(directory: Path | str) -> tuple[SplitDataset, ScalerBundle]:
    """Reload the ingestion artifacts into matrices for training/evaluation."""
    directory = Path(directory)
    bundle = ScalerBundle.from_json((directory / "scalers.json").read_text(encoding="utf-8"))
    meta = json.loads((directory / "ingest_meta.json").read_text(encoding="utf-8"))
    n_features = bundle.features.width

    def read_matrix(path: Path) -> tuple[np.ndarray, np.ndarray]:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = [[float(cell) for cell in row] for row in reader]
        matrix = np.array(data, dtype=np.float64).reshape(len(data), len(header))
        return matrix[:, :n_features], matrix[:, n_features:]

    train_x, train_y = read_matrix(directory / "train.csv")
    test_x, test_y = read_matrix(directory / "test.csv")
    dataset = SplitDataset(
        train_x=train_x,
        train_y=train_y,
        test_x=test_x,
        test_y=test_y,
        feature_names=bundle.features.encoded_names(),
        target_names=bundle.targets.encoded_names(),
        split_ratio=meta["split_ratio"],
        seed=meta["seed"],
    )
    return dataset, bundle
