"""Per-column preprocessing transforms fitted on training data.

Continuous columns map to [0,1] by min-max (linear extrapolation outside the
fitted range keeps the transform invertible), energy classes map to
ordinal/7, categoricals one-hot over the fitted vocabulary, booleans pass
through as 0/1. The fitted set serializes to scalers.json and travels with
every checkpoint so inference applies identical preprocessing.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from ..domain import ENERGY_CLASS_LABELS, ColumnKind, ColumnSpec
from ..errors import EnerfitError

SCALERS_FORMAT_VERSION = 1


class UnseenCategoryError(EnerfitError):
    code = "UnseenCategory"

    def __init__(self, column: str, value):
        super().__init__(f"value {value!r} for column {column!r} not in fitted vocabulary", field=column)
        self.column = column
        self.value = value


class EmptyTableError(EnerfitError):
    code = "EmptyTable"


@dataclass
class MinMax:
    min: float
    max: float
    degenerate: bool = False
    mean: float | None = None  # imputation value for optional columns

    def transform(self, value: float) -> float:
        if self.degenerate:
            return 0.0
        return (value - self.min) / (self.max - self.min)

    def inverse(self, value: float) -> float:
        if self.degenerate:
            return self.min
        return self.min + value * (self.max - self.min)


@dataclass
class Ordinal:
    vocab: list[str]

    def transform(self, label: str) -> float:
        if label not in self.vocab:
            raise UnseenCategoryError("<ordinal>", label)
        return (self.vocab.index(label) + 1) / len(self.vocab)

    def inverse(self, value: float) -> str:
        idx = int(round(value * len(self.vocab))) - 1
        idx = min(max(idx, 0), len(self.vocab) - 1)
        return self.vocab[idx]


@dataclass
class OneHot:
    vocab: list[str]

    def transform(self, value: str) -> list[float]:
        if value not in self.vocab:
            raise UnseenCategoryError("<onehot>", value)
        return [1.0 if v == value else 0.0 for v in self.vocab]

    def inverse(self, block: list[float]) -> str:
        best = max(range(len(block)), key=lambda i: block[i])
        return self.vocab[best]


@dataclass
class Passthrough:
    def transform(self, value) -> float:
        return 1.0 if value else 0.0

    def inverse(self, value: float) -> bool:
        return value >= 0.5


@dataclass
class ColumnScaler:
    spec: ColumnSpec
    transform: MinMax | Ordinal | OneHot | Passthrough

    @property
    def width(self) -> int:
        if isinstance(self.transform, OneHot):
            return len(self.transform.vocab)
        return 1

    def encoded_names(self) -> list[str]:
        if isinstance(self.transform, OneHot):
            return [f"{self.spec.name}={v}" for v in self.transform.vocab]
        return [self.spec.name]


@dataclass
class ScalerSet:
    """Ordered column transforms plus the fingerprint of the rows they were fitted on."""

    columns: list[ColumnScaler]
    fitted_on: str = ""

    @property
    def width(self) -> int:
        return sum(c.width for c in self.columns)

    def encoded_names(self) -> list[str]:
        names: list[str] = []
        for col in self.columns:
            names.extend(col.encoded_names())
        return names

    def column_names(self) -> list[str]:
        return [c.spec.name for c in self.columns]


def table_fingerprint(rows: list[dict], column_names: list[str]) -> str:
    """Content hash of a table in canonical form: header line then one line
    per row with repr-formatted cells in column order."""
    h = hashlib.sha256()
    h.update(",".join(column_names).encode("utf-8"))
    h.update(b"\n")
    for row in rows:
        cells = []
        for name in column_names:
            value = row.get(name)
            if value is None:
                cells.append("")
            elif isinstance(value, bool):
                cells.append("1" if value else "0")
            elif isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        h.update(",".join(cells).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def fit_scalers(rows: list[dict], cols: list[ColumnSpec], fingerprint: str = "") -> ScalerSet:
    """Fit one transform per column over the given rows (training rows only;
    letting test rows in here would leak into min/max and vocabularies)."""
    if not rows:
        raise EmptyTableError("cannot fit scalers on an empty table")
    scalers: list[ColumnScaler] = []
    for spec in cols:
        if spec.kind is ColumnKind.CONTINUOUS:
            values = [row[spec.name] for row in rows if row.get(spec.name) is not None]
            if not values:
                raise EmptyTableError(f"column {spec.name!r} has no observed values")
            lo, hi = min(values), max(values)
            mean = sum(values) / len(values) if spec.optional else None
            scalers.append(
                ColumnScaler(spec, MinMax(min=lo, max=hi, degenerate=(lo == hi), mean=mean))
            )
        elif spec.kind is ColumnKind.ORDINAL_CLASS:
            scalers.append(ColumnScaler(spec, Ordinal(vocab=list(ENERGY_CLASS_LABELS))))
        elif spec.kind is ColumnKind.CATEGORICAL:
            vocab = sorted({row[spec.name] for row in rows if row.get(spec.name) is not None})
            if not vocab:
                raise EmptyTableError(f"column {spec.name!r} has no observed values")
            scalers.append(ColumnScaler(spec, OneHot(vocab=vocab)))
        elif spec.kind is ColumnKind.BOOLEAN:
            scalers.append(ColumnScaler(spec, Passthrough()))
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unhandled column kind {spec.kind}")
    return ScalerSet(columns=scalers, fitted_on=fingerprint)


def transform(scalers: ScalerSet, row: dict) -> tuple[list[float], list[str]]:
    """Encode one row to a numeric vector. Returns (vector, imputed column names).

    Optional continuous columns missing from the row are imputed with the
    fitted mean; a missing required value or an unseen category is an error.
    """
    vector: list[float] = []
    imputed: list[str] = []
    for col in scalers.columns:
        value = row.get(col.spec.name)
        tf = col.transform
        if isinstance(tf, MinMax):
            if value is None:
                if not col.spec.optional or tf.mean is None:
                    raise EnerfitError(f"missing value for column {col.spec.name!r}", field=col.spec.name)
                value = tf.mean
                imputed.append(col.spec.name)
            vector.append(tf.transform(float(value)))
        elif isinstance(tf, Ordinal):
            try:
                vector.append(tf.transform(value))
            except UnseenCategoryError:
                raise UnseenCategoryError(col.spec.name, value)
        elif isinstance(tf, OneHot):
            try:
                vector.extend(tf.transform(value))
            except UnseenCategoryError:
                raise UnseenCategoryError(col.spec.name, value)
        else:
            vector.append(tf.transform(value))
    return vector, imputed


def inverse_transform(scalers: ScalerSet, vector: list[float]) -> dict:
    """Decode a numeric vector back to a column->value row."""
    if len(vector) != scalers.width:
        raise EnerfitError(f"vector width {len(vector)} != scaler width {scalers.width}")
    row: dict = {}
    offset = 0
    for col in scalers.columns:
        tf = col.transform
        if isinstance(tf, OneHot):
            row[col.spec.name] = tf.inverse(list(vector[offset : offset + col.width]))
        else:
            row[col.spec.name] = tf.inverse(float(vector[offset]))
        offset += col.width
    return row


def _transform_to_dict(tf) -> dict:
    if isinstance(tf, MinMax):
        out = {"type": "minmax", "min": tf.min, "max": tf.max, "degenerate": tf.degenerate}
        if tf.mean is not None:
            out["mean"] = tf.mean
        return out
    if isinstance(tf, Ordinal):
        return {"type": "ordinal", "vocab": tf.vocab}
    if isinstance(tf, OneHot):
        return {"type": "onehot", "vocab": tf.vocab}
    return {"type": "passthrough"}


def _transform_from_dict(data: dict):
    kind = data["type"]
    if kind == "minmax":
        return MinMax(
            min=data["min"], max=data["max"], degenerate=data["degenerate"], mean=data.get("mean")
        )
    if kind == "ordinal":
        return Ordinal(vocab=list(data["vocab"]))
    if kind == "onehot":
        return OneHot(vocab=list(data["vocab"]))
    if kind == "passthrough":
        return Passthrough()
    raise EnerfitError(f"unknown transform type {kind!r}")


def scaler_set_to_dict(scalers: ScalerSet) -> dict:
    return {
        "fitted_on": scalers.fitted_on,
        "columns": [
            {
                "name": col.spec.name,
                "kind": col.spec.kind.value,
                "optional": col.spec.optional,
                "transform": _transform_to_dict(col.transform),
            }
            for col in scalers.columns
        ],
    }


def scaler_set_from_dict(data: dict) -> ScalerSet:
    columns = [
        ColumnScaler(
            spec=ColumnSpec(
                name=entry["name"], kind=ColumnKind(entry["kind"]), optional=entry["optional"]
            ),
            transform=_transform_from_dict(entry["transform"]),
        )
        for entry in data["columns"]
    ]
    return ScalerSet(columns=columns, fitted_on=data["fitted_on"])


@dataclass
class ScalerBundle:
    """Feature scalers plus (for regressors) target scalers, as persisted in
    scalers.json. Classifier targets stay raw 0/1, recorded via targets_scaled."""

    features: ScalerSet
    targets: ScalerSet
    targets_scaled: bool

    def to_json(self) -> str:
        payload = {
            "format_version": SCALERS_FORMAT_VERSION,
            "targets_scaled": self.targets_scaled,
            "features": scaler_set_to_dict(self.features),
            "targets": scaler_set_to_dict(self.targets),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScalerBundle":
        payload = json.loads(text)
        if payload.get("format_version") != SCALERS_FORMAT_VERSION:
            raise EnerfitError(f"unsupported scalers format version {payload.get('format_version')}")
        return cls(
            features=scaler_set_from_dict(payload["features"]),
            targets=scaler_set_from_dict(payload["targets"]),
            targets_scaled=payload["targets_scaled"],
        )

    @property
    def fingerprint(self) -> str:
        return self.features.fitted_on
