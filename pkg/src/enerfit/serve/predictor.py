"""Model-backed prediction for the two services, independent of the HTTP
layer so the CLI can reuse it for one-shot predictions."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..domain import (
    PV_TARGET_NAMES,
    RETROFIT_TARGET_NAMES,
    pv_feature_row,
    retrofit_feature_row,
    validate_pv_features,
    validate_retrofit_features,
)
from ..errors import EnerfitError
from ..ingest.scalers import ScalerBundle, inverse_transform, transform
from ..neural import forward, load_checkpoint
from ..orchestrate.store import ArtifactStore


class NoModelDeployedError(EnerfitError):
    code = "NoModelDeployed"


@dataclass
class LoadedModel:
    service: str
    version: str
    model: object
    manifest: dict
    bundle: ScalerBundle


class ModelCache:
    """Loads deployed checkpoints once per version; lookups bind the active
    version at call time, so an in-flight request never sees a swap."""

    def __init__(self, store: ArtifactStore):
        self.store = store
        self._cache: dict[tuple[str, str], LoadedModel] = {}
        self._lock = threading.Lock()

    def active(self, service: str) -> LoadedModel:
        entry = self.store.active_checkpoint(service)
        if entry is None:
            raise NoModelDeployedError(f"no model deployed for service {service!r}")
        version, path = entry
        key = (service, version)
        with self._lock:
            loaded = self._cache.get(key)
        if loaded is not None:
            return loaded
        loaded = load_model(service, version, path)
        with self._lock:
            self._cache[key] = loaded
        return loaded


def load_model(service: str, version: str, checkpoint_dir: Path) -> LoadedModel:
    checkpoint = load_checkpoint(checkpoint_dir)
    scalers_path = checkpoint_dir / "scalers.json"
    if not scalers_path.is_file():
        raise EnerfitError(f"checkpoint {checkpoint_dir} has no scalers.json alongside the weights")
    bundle = ScalerBundle.from_json(scalers_path.read_text(encoding="utf-8"))
    return LoadedModel(
        service=service,
        version=version,
        model=checkpoint.model,
        manifest=checkpoint.manifest,
        bundle=bundle,
    )


def _prediction_id(service: str, version: str, inputs: dict) -> str:
    canonical = json.dumps(inputs, sort_keys=True)
    digest = hashlib.sha256(f"{service}|{version}|{canonical}".encode("utf-8")).hexdigest()
    return digest[:20]


def predict_retrofit(loaded: LoadedModel, body: dict, threshold: float = 0.5) -> dict:
    """Validate, scale, forward, and threshold; returns the response payload
    with the four recommendation booleans plus their probabilities."""
    features = validate_retrofit_features(body)
    row = retrofit_feature_row(features)
    vector, _ = transform(loaded.bundle.features, row)
    probs = forward(loaded.model, np.array([vector]))[0]
    outputs = {name: bool(probs[i] >= threshold) for i, name in enumerate(RETROFIT_TARGET_NAMES)}
    probabilities = {name: float(probs[i]) for i, name in enumerate(RETROFIT_TARGET_NAMES)}
    inputs = dict(row)
    return {
        "prediction_id": _prediction_id("retrofit", loaded.version, inputs),
        "service": "retrofit",
        "model_version": loaded.version,
        "inputs": inputs,
        "outputs": outputs,
        "probabilities": probabilities,
        "imputed_fields": [],
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
    }


def predict_pv(loaded: LoadedModel, body: dict) -> dict:
    """Validate, impute a blank generation value from the training mean,
    forward, and inverse-transform the seven estimates back to raw units."""
    features = validate_pv_features(body)
    row = pv_feature_row(features)
    vector, imputed = transform(loaded.bundle.features, row)
    scaled = forward(loaded.model, np.array([vector]))[0]
    raw = inverse_transform(loaded.bundle.targets, list(scaled))
    outputs = {name: float(raw[name]) for name in PV_TARGET_NAMES}
    inputs = dict(row)
    return {
        "prediction_id": _prediction_id("pv", loaded.version, inputs),
        "service": "pv",
        "model_version": loaded.version,
        "inputs": inputs,
        "outputs": outputs,
        "probabilities": None,
        "imputed_fields": imputed,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
    }


def predict(service: str, loaded: LoadedModel, body: dict) -> dict:
    if service == "retrofit":
        return predict_retrofit(loaded, body)
    if service == "pv":
        return predict_pv(loaded, body)
    raise EnerfitError(f"unknown service {service!r}")


def render_report_csv(prediction: dict) -> str:
    """CSV export of a stored prediction: inputs section, then recommended
    measures (retrofit) or predicted savings (PV). RFC-4180, one header row
    per section."""
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(["input", "value"])
    for name, value in prediction["inputs"].items():
        writer.writerow([name, "" if value is None else value])
    writer.writerow([])
    if prediction["service"] == "retrofit":
        writer.writerow(["measure", "recommended", "probability"])
        for name in RETROFIT_TARGET_NAMES:
            writer.writerow(
                [
                    name,
                    "true" if prediction["outputs"][name] else "false",
                    prediction["probabilities"][name],
                ]
            )
    else:
        writer.writerow(["target", "value"])
        for name in PV_TARGET_NAMES:
            writer.writerow([name, prediction["outputs"][name]])
    return buffer.getvalue()
