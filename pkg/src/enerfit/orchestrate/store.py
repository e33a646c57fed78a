"""Artifact store: per-run directories plus the deployed-checkpoint registry.

Layout under the root:
    runs/<run_id>/{config.json, run_record.json, ingest/, train/, eval/}
    registry/{registry.json, <service>/<version>/...}

Registry updates are write-to-temp + atomic rename, so readers never see a
partially written checkpoint or registry file.
"""

from __future__ import annotations

import json
import os
import shutil
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from ..domain import PV_TARGET_NAMES, RETROFIT_TARGET_NAMES, Task
from ..errors import EnerfitError
from ..neural import load_checkpoint

SERVICES = ("retrofit", "pv")
SERVICE_TASKS = {"retrofit": Task.CLASSIFIER, "pv": Task.REGRESSOR}
SERVICE_TARGETS = {"retrofit": RETROFIT_TARGET_NAMES, "pv": PV_TARGET_NAMES}

_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


class TaskMismatchError(EnerfitError):
    code = "TaskMismatch"


class NotFoundError(EnerfitError):
    code = "NotFound"


def new_ulid(timestamp_ms: int | None = None) -> str:
    """Sortable 26-char ULID: 48-bit millisecond timestamp + 80 random bits."""
    ts = int(time.time() * 1000) if timestamp_ms is None else timestamp_ms
    value = (ts & ((1 << 48) - 1)) << 80 | int.from_bytes(os.urandom(10), "big")
    chars = []
    for shift in range(125, -1, -5):
        chars.append(_CROCKFORD[(value >> shift) & 0x1F])
    return "".join(chars)


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class ModelVersion:
    service: str
    version: str
    path: str
    deployed_at: str
    objective: float | None
    active: bool

    def to_dict(self) -> dict:
        return {
            "service": self.service,
            "version": self.version,
            "path": self.path,
            "deployed_at": self.deployed_at,
            "objective": self.objective,
            "active": self.active,
        }


class ArtifactStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.registry_dir = self.root / "registry"
        self.runs_dir.mkdir(parents=True, exist_ok=True)
        self.registry_dir.mkdir(parents=True, exist_ok=True)
        self._registry_lock = threading.Lock()

    # ---- run directories -------------------------------------------------

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    def step_dir(self, run_id: str, step: str) -> Path:
        return self.run_dir(run_id) / step.lower()

    def write_run_record(self, record: dict) -> None:
        run_dir = self.run_dir(record["run_id"])
        run_dir.mkdir(parents=True, exist_ok=True)
        path = run_dir / "run_record.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, path)

    def read_run_record(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "run_record.json"
        if not path.is_file():
            raise NotFoundError(f"unknown run {run_id!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    # ---- model registry ---------------------------------------------------

    @property
    def _registry_path(self) -> Path:
        return self.registry_dir / "registry.json"

    def _read_registry(self) -> dict:
        if not self._registry_path.is_file():
            return {service: {"active": None, "versions": []} for service in SERVICES}
        return json.loads(self._registry_path.read_text(encoding="utf-8"))

    def _write_registry(self, registry: dict) -> None:
        tmp = self._registry_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(registry, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, self._registry_path)

    def deploy(self, service: str, checkpoint_path: Path | str) -> ModelVersion:
        """Validate and copy a checkpoint into the registry, then atomically
        mark it active. Previous versions stay listed."""
        if service not in SERVICES:
            raise NotFoundError(f"unknown service {service!r}")
        checkpoint = load_checkpoint(checkpoint_path)  # raises on corrupt weights
        task = checkpoint.manifest.get("task")
        expected = SERVICE_TASKS[service]
        if task != expected.value:
            raise TaskMismatchError(
                f"service {service!r} needs a {expected.value} checkpoint, got {task!r}"
            )
        targets = tuple(checkpoint.manifest.get("target_cols") or ())
        if targets != SERVICE_TARGETS[service]:
            raise TaskMismatchError(
                f"checkpoint targets {list(targets)} do not match service {service!r}"
            )
        with self._registry_lock:
            registry = self._read_registry()
            entry = registry.setdefault(service, {"active": None, "versions": []})
            version = f"v{len(entry['versions']) + 1}"
            final_dir = self.registry_dir / service / version
            final_dir.parent.mkdir(parents=True, exist_ok=True)
            tmp_dir = final_dir.with_name(final_dir.name + ".tmp")
            if tmp_dir.exists():
                shutil.rmtree(tmp_dir)
            shutil.copytree(checkpoint_path, tmp_dir)
            os.replace(tmp_dir, final_dir)
            info = ModelVersion(
                service=service,
                version=version,
                path=str(final_dir),
                deployed_at=utc_now(),
                objective=checkpoint.manifest.get("objective"),
                active=True,
            )
            for existing in entry["versions"]:
                existing["active"] = False
            entry["versions"].append(info.to_dict())
            entry["active"] = version
            self._write_registry(registry)
        return info

    def list_models(self) -> dict:
        with self._registry_lock:
            return self._read_registry()

    def active_checkpoint(self, service: str) -> tuple[str, Path] | None:
        """(version, checkpoint directory) of the active model, if any."""
        registry = self.list_models()
        entry = registry.get(service)
        if not entry or not entry.get("active"):
            return None
        version = entry["active"]
        for info in entry["versions"]:
            if info["version"] == version:
                return version, Path(info["path"])
        return None
