"""Run configuration: the launch schema accepted by the CLI and the API.

Keys follow the training-playground dashboard schema verbatim (`l_rate`,
`mlClass`, ...). Unknown keys are rejected so typos fail loudly; defaults
fill everything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from ..domain import COLUMN_CATALOG, ColumnKind, DatasetSchema, Task
from ..errors import EnerfitError
from ..ingest.sources import ConnectorConfig
from ..tune import SearchSpace


class MissingFieldError(EnerfitError):
    code = "MissingField"


class UnknownFieldError(EnerfitError):
    code = "UnknownField"


class InconsistentError(EnerfitError):
    code = "Inconsistent"


class BadValueError(EnerfitError):
    code = "OutOfRange"


@dataclass(frozen=True)
class RunConfig:
    input_filepath: str
    feature_cols: tuple[str, ...]
    target_cols: tuple[str, ...]
    ml_class: Task
    activation: str = "ReLU"
    optimizer_name: str = "Adam"
    batch_size: tuple[int, ...] = (256, 512, 1024)
    l_rate: tuple[float, float] = (1e-4, 1e-3)
    layer_sizes: tuple[int, ...] = (128, 256, 512, 1024, 2048)
    n_layers: tuple[int, int] = (2, 6)
    max_epochs: int = 10
    n_trials: int = 3
    num_workers: int = 2  # accepted for schema fidelity; ingestion is sequential
    seed: int = 42
    split_ratio: float = 0.8
    authorization: str = ""
    consumer_agent_id: str = ""
    provider_agent_id: str = ""
    ml_path: str = ""
    scalers_path: str = ""
    optuna_viz: str = ""
    from_run: str | None = None

    def to_dict(self) -> dict:
        return {
            "input_filepath": self.input_filepath,
            "feature_cols": list(self.feature_cols),
            "target_cols": list(self.target_cols),
            "mlClass": self.ml_class.value,
            "activation": self.activation,
            "optimizer_name": self.optimizer_name,
            "batch_size": list(self.batch_size),
            "l_rate": list(self.l_rate),
            "layer_sizes": list(self.layer_sizes),
            "n_layers": list(self.n_layers),
            "max_epochs": self.max_epochs,
            "n_trials": self.n_trials,
            "num_workers": self.num_workers,
            "seed": self.seed,
            "split_ratio": self.split_ratio,
            "authorization": self.authorization,
            "consumer_agent_id": self.consumer_agent_id,
            "provider_agent_id": self.provider_agent_id,
            "ml_path": self.ml_path,
            "scalers_path": self.scalers_path,
            "optuna_viz": self.optuna_viz,
            "from_run": self.from_run,
        }

    def connector(self) -> ConnectorConfig | None:
        values = (self.authorization, self.consumer_agent_id, self.provider_agent_id)
        if all(values):
            return ConnectorConfig(*values)
        return None

    def dataset_schema(self) -> DatasetSchema:
        return DatasetSchema(
            feature_cols=tuple(COLUMN_CATALOG[name] for name in self.feature_cols),
            target_cols=tuple(COLUMN_CATALOG[name] for name in self.target_cols),
            task=self.ml_class,
        )

    def search_space(self) -> SearchSpace:
        return SearchSpace(
            batch_sizes=self.batch_size,
            l_rate_low=self.l_rate[0],
            l_rate_high=self.l_rate[1],
            n_layers_low=self.n_layers[0],
            n_layers_high=self.n_layers[1],
            layer_size_choices=self.layer_sizes,
            max_epochs=self.max_epochs,
            n_trials=self.n_trials,
            seed=self.seed,
        )


_REQUIRED_KEYS = ("input_filepath", "feature_cols", "target_cols", "mlClass")
_KNOWN_KEYS = set(_REQUIRED_KEYS) | {
    "activation",
    "optimizer_name",
    "batch_size",
    "l_rate",
    "layer_sizes",
    "n_layers",
    "max_epochs",
    "n_trials",
    "num_workers",
    "seed",
    "split_ratio",
    "authorization",
    "consumer_agent_id",
    "provider_agent_id",
    "ml_path",
    "scalers_path",
    "optuna_viz",
    "from_run",
}


def _int_value(raw, key: str, minimum: int) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise BadValueError(f"{key} must be an integer", field=key)
    if raw < minimum:
        raise BadValueError(f"{key} must be >= {minimum}", field=key)
    return raw


def _int_choices(raw, key: str) -> tuple[int, ...]:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise BadValueError(f"{key} must be a non-empty list of integers", field=key)
    values = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise BadValueError(f"{key} entries must be positive integers", field=key)
        values.append(v)
    return tuple(values)


def _pair(raw, key: str) -> tuple:
    if not isinstance(raw, (list, tuple)) or not 1 <= len(raw) <= 2:
        raise BadValueError(f"{key} must be [low, high] (or a single value)", field=key)
    return (raw[0], raw[-1])


def _columns(raw, key: str) -> tuple[str, ...]:
    if not isinstance(raw, (list, tuple)) or not raw:
        raise BadValueError(f"{key} must be a non-empty list of column names", field=key)
    names = []
    for name in raw:
        if name not in COLUMN_CATALOG:
            raise BadValueError(f"{key} references unknown column {name!r}", field=key)
        names.append(name)
    if len(set(names)) != len(names):
        raise BadValueError(f"{key} contains duplicate columns", field=key)
    return tuple(names)


def validate_run_config(raw: dict) -> RunConfig:
    """Validate a raw config mapping, apply defaults, and cross-check the
    ML class against the target column kinds."""
    if not isinstance(raw, dict):
        raise BadValueError("run config must be a mapping")
    for key in raw:
        if key not in _KNOWN_KEYS:
            raise UnknownFieldError(f"unknown config key {key!r}", field=key)
    for key in _REQUIRED_KEYS:
        if key not in raw or raw[key] in (None, "", []):
            raise MissingFieldError(f"missing config key {key!r}", field=key)

    ml_class_raw = raw["mlClass"]
    try:
        ml_class = Task(ml_class_raw)
    except ValueError:
        raise BadValueError(
            f"mlClass must be 'Classifier' or 'Regressor', got {ml_class_raw!r}", field="mlClass"
        )

    feature_cols = _columns(raw["feature_cols"], "feature_cols")
    target_cols = _columns(raw["target_cols"], "target_cols")
    target_kinds = {COLUMN_CATALOG[name].kind for name in target_cols}
    if ml_class is Task.CLASSIFIER and target_kinds != {ColumnKind.BOOLEAN}:
        raise InconsistentError(
            "mlClass Classifier requires boolean target columns", field="target_cols"
        )
    if ml_class is Task.REGRESSOR and target_kinds != {ColumnKind.CONTINUOUS}:
        raise InconsistentError(
            "mlClass Regressor requires continuous target columns", field="target_cols"
        )

    activation = raw.get("activation", "ReLU")
    if activation != "ReLU":
        raise BadValueError(f"activation must be 'ReLU', got {activation!r}", field="activation")
    optimizer_name = raw.get("optimizer_name", "Adam")
    if optimizer_name != "Adam":
        raise BadValueError(
            f"optimizer_name must be 'Adam', got {optimizer_name!r}", field="optimizer_name"
        )

    l_rate_pair = _pair(raw.get("l_rate", [1e-4, 1e-3]), "l_rate")
    try:
        l_rate = (float(l_rate_pair[0]), float(l_rate_pair[1]))
    except (TypeError, ValueError):
        raise BadValueError("l_rate values must be numbers", field="l_rate")
    if not 0 < l_rate[0] <= l_rate[1]:
        raise BadValueError("l_rate must satisfy 0 < low <= high", field="l_rate")

    n_layers_pair = _pair(raw.get("n_layers", [2, 6]), "n_layers")
    if any(isinstance(v, bool) or not isinstance(v, int) for v in n_layers_pair):
        raise BadValueError("n_layers values must be integers", field="n_layers")
    if not 1 <= n_layers_pair[0] <= n_layers_pair[1]:
        raise BadValueError("n_layers must satisfy 1 <= low <= high", field="n_layers")

    split_ratio = raw.get("split_ratio", 0.8)
    if not isinstance(split_ratio, (int, float)) or not 0 < float(split_ratio) < 1:
        raise BadValueError("split_ratio must be in (0, 1)", field="split_ratio")

    from_run = raw.get("from_run")
    if from_run is not None and (not isinstance(from_run, str) or not from_run):
        raise BadValueError("from_run must be a run id string", field="from_run")

    suffix = "Classifier" if ml_class is Task.CLASSIFIER else "Regressor"
    default_viz = "optuna_viz/" + ("classifier" if ml_class is Task.CLASSIFIER else "regressor")
    return RunConfig(
        input_filepath=str(raw["input_filepath"]),
        feature_cols=feature_cols,
        target_cols=target_cols,
        ml_class=ml_class,
        activation=activation,
        optimizer_name=optimizer_name,
        batch_size=_int_choices(raw.get("batch_size", [256, 512, 1024]), "batch_size"),
        l_rate=l_rate,
        layer_sizes=_int_choices(raw.get("layer_sizes", [128, 256, 512, 1024, 2048]), "layer_sizes"),
        n_layers=(n_layers_pair[0], n_layers_pair[1]),
        max_epochs=_int_value(raw.get("max_epochs", 10), "max_epochs", 1),
        n_trials=_int_value(raw.get("n_trials", 3), "n_trials", 1),
        num_workers=_int_value(raw.get("num_workers", 2), "num_workers", 0),
        seed=_int_value(raw.get("seed", 42), "seed", 0),
        split_ratio=float(split_ratio),
        authorization=str(raw.get("authorization") or ""),
        consumer_agent_id=str(raw.get("consumer_agent_id") or ""),
        provider_agent_id=str(raw.get("provider_agent_id") or ""),
        ml_path=str(raw.get("ml_path") or f"models-scalers/best_MLP{suffix}.ckpt"),
        scalers_path=str(raw.get("scalers_path") or f"models-scalers/MLP{suffix}_scalers.json"),
        optuna_viz=str(raw.get("optuna_viz") or default_viz),
        from_run=from_run,
    )


def load_config_file(path: Path | str) -> dict:
    """Read a YAML or JSON run config document."""
    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise BadValueError(f"config file {path} must contain a mapping")
    return data
