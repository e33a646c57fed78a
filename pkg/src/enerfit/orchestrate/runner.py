"""Pipeline executor: ingestion -> training -> evaluation as independently
runnable steps over the artifact store.

Launches enqueue onto a single FIFO worker so prune decisions and artifact
bytes stay reproducible; `launch` returns immediately with the run id.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import shutil
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..errors import EnerfitError
from ..evaluate import EvalReports, HpoReport, classifier_report, regression_report, write_reports
from ..domain import Task
from ..ingest.pipeline import IngestConfig, load_split, run_ingestion
from ..ingest.scalers import inverse_transform
from ..neural import forward, load_checkpoint
from ..tune import Study, run_study
from .config import RunConfig
from .store import ArtifactStore, ModelVersion, NotFoundError, new_ulid, utc_now

logger = logging.getLogger(__name__)

STEP_INGESTION = "Ingestion"
STEP_TRAINING = "Training"
STEP_EVALUATION = "Evaluation"
ALL_STEPS = (STEP_INGESTION, STEP_TRAINING, STEP_EVALUATION)

QUEUED = "Queued"
RUNNING = "Running"
SUCCEEDED = "Succeeded"
FAILED = "Failed"


class MissingArtifactError(EnerfitError):
    code = "MissingArtifact"

    def __init__(self, step: str, dependency: str):
        super().__init__(f"step {step} requires missing artifact {dependency!r}")
        self.step = step
        self.dependency = dependency


class BadStepsError(EnerfitError):
    code = "BadSteps"


@dataclass
class StepStatus:
    status: str = QUEUED
    artifacts: list[str] = field(default_factory=list)
    started_at: str | None = None
    finished_at: str | None = None
    error: dict | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "artifacts": self.artifacts,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "error": self.error,
        }


@dataclass
class RunRecord:
    run_id: str
    requested_steps: list[str]
    status: str = QUEUED
    steps: dict[str, StepStatus] = field(default_factory=dict)
    created_at: str = ""
    started_at: str | None = None
    finished_at: str | None = None
    error: dict | None = None
    trials: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "requested_steps": self.requested_steps,
            "status": self.status,
            "steps": {name: step.to_dict() for name, step in self.steps.items()},
            "created_at": self.created_at,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "error": self.error,
            "trials": self.trials,
        }


def _ingest_artifacts_present(directory: Path) -> bool:
    return all((directory / name).is_file() for name in ("train.csv", "test.csv", "scalers.json"))


class Orchestrator:
    """Single-worker run executor plus a thin facade over the registry."""

    def __init__(self, store: ArtifactStore):
        self.store = store
        self._queue: queue.Queue = queue.Queue()
        self._records: dict[str, RunRecord] = {}
        self._configs: dict[str, RunConfig] = {}
        self._events: dict[str, threading.Event] = {}
        self._lock = threading.Lock()
        self._worker = threading.Thread(target=self._work, daemon=True, name="enerfit-runner")
        self._worker.start()

    # ---- public API --------------------------------------------------------

    def launch(self, config: RunConfig, steps: list[str] | tuple[str, ...]) -> str:
        """Validate dependencies, enqueue the run, and return its id."""
        requested = [s for s in ALL_STEPS if s in steps]
        unknown = [s for s in steps if s not in ALL_STEPS]
        if unknown or not requested:
            raise BadStepsError(f"steps must be a non-empty subset of {ALL_STEPS}, got {list(steps)}")
        self._check_dependencies(config, requested)
        run_id = new_ulid()
        record = RunRecord(
            run_id=run_id,
            requested_steps=requested,
            created_at=utc_now(),
            steps={name: StepStatus() for name in requested},
        )
        with self._lock:
            self._records[run_id] = record
            self._configs[run_id] = config
            self._events[run_id] = threading.Event()
        run_dir = self.store.run_dir(run_id)
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "config.json").write_text(
            json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        self._persist(record)
        self._queue.put(run_id)
        return run_id

    def run_status(self, run_id: str) -> RunRecord:
        with self._lock:
            record = self._records.get(run_id)
            if record is not None:
                return record
        # Fall back to records persisted by an earlier process.
        data = self.store.read_run_record(run_id)
        record = RunRecord(
            run_id=data["run_id"],
            requested_steps=data["requested_steps"],
            status=data["status"],
            created_at=data["created_at"],
            started_at=data.get("started_at"),
            finished_at=data.get("finished_at"),
            error=data.get("error"),
            trials=data.get("trials", []),
        )
        for name, step in data.get("steps", {}).items():
            record.steps[name] = StepStatus(
                status=step["status"],
                artifacts=step.get("artifacts", []),
                started_at=step.get("started_at"),
                finished_at=step.get("finished_at"),
                error=step.get("error"),
            )
        return record

    def wait(self, run_id: str, timeout: float | None = None) -> RunRecord:
        with self._lock:
            event = self._events.get(run_id)
        if event is None:
            raise NotFoundError(f"unknown run {run_id!r}")
        event.wait(timeout)
        return self.run_status(run_id)

    def deploy(self, service: str, checkpoint_path: Path | str) -> ModelVersion:
        return self.store.deploy(service, checkpoint_path)

    # ---- dependency validation ----------------------------------------------

    def _check_dependencies(self, config: RunConfig, requested: list[str]) -> None:
        from_dir = self.store.run_dir(config.from_run) if config.from_run else None
        if STEP_TRAINING in requested and STEP_INGESTION not in requested:
            if from_dir is None or not _ingest_artifacts_present(from_dir / "ingest"):
                raise MissingArtifactError(STEP_TRAINING, "train-data")
        if STEP_EVALUATION in requested:
            if STEP_TRAINING not in requested:
                if from_dir is None or not (from_dir / "train" / "checkpoint" / "weights.bin").is_file():
                    raise MissingArtifactError(STEP_EVALUATION, "checkpoint")
            if STEP_INGESTION not in requested:
                if from_dir is None or not _ingest_artifacts_present(from_dir / "ingest"):
                    raise MissingArtifactError(STEP_EVALUATION, "test-data")

    # ---- execution -----------------------------------------------------------

    def _work(self) -> None:
        while True:
            run_id = self._queue.get()
            try:
                self._execute(run_id)
            except Exception:  # pragma: no cover - worker must never die
                logger.exception("run %s crashed the worker", run_id)
            finally:
                with self._lock:
                    event = self._events.get(run_id)
                if event is not None:
                    event.set()
                self._queue.task_done()

    def _execute(self, run_id: str) -> None:
        with self._lock:
            record = self._records[run_id]
            config = self._configs[run_id]
        record.status = RUNNING
        record.started_at = utc_now()
        self._persist(record)
        run_dir = self.store.run_dir(run_id)
        executors = {
            STEP_INGESTION: self._exec_ingestion,
            STEP_TRAINING: self._exec_training,
            STEP_EVALUATION: self._exec_evaluation,
        }
        for step_name in record.requested_steps:
            step = record.steps[step_name]
            step.status = RUNNING
            step.started_at = utc_now()
            self._persist(record)
            try:
                artifacts = executors[step_name](config, run_dir, record)
                step.artifacts = artifacts
                step.status = SUCCEEDED
            except EnerfitError as exc:
                step.status = FAILED
                step.error = exc.to_dict()
                record.status = FAILED
                record.error = {**exc.to_dict(), "step": step_name}
            except Exception as exc:  # unexpected bug: fail the run, keep serving
                logger.exception("step %s of run %s failed unexpectedly", step_name, run_id)
                step.status = FAILED
                step.error = {"code": "Internal", "message": f"{type(exc).__name__}: {exc}"}
                record.status = FAILED
                record.error = {"step": step_name, **step.error}
            finally:
                step.finished_at = utc_now()
                self._persist(record)
            if record.status == FAILED:
                break
        if record.status != FAILED:
            record.status = SUCCEEDED
        record.finished_at = utc_now()
        self._persist(record)

    def _persist(self, record: RunRecord) -> None:
        self.store.write_run_record(record.to_dict())

    def _resolve_dir(self, config: RunConfig, record: RunRecord, step_name: str, sub: str) -> Path:
        if step_name in record.requested_steps and record.steps[step_name].status == SUCCEEDED:
            return self.store.run_dir(record.run_id) / sub
        return self.store.run_dir(config.from_run or "") / sub

    def _exec_ingestion(self, config: RunConfig, run_dir: Path, record: RunRecord) -> list[str]:
        ingest_config = IngestConfig(
            source=config.input_filepath,
            schema=config.dataset_schema(),
            connector=config.connector(),
            split_ratio=config.split_ratio,
            seed=config.seed,
        )
        artifacts = run_ingestion(ingest_config, run_dir / "ingest")
        return [
            f"ingest/{artifacts.train_path.name}",
            f"ingest/{artifacts.test_path.name}",
            f"ingest/{artifacts.scalers_path.name}",
            f"ingest/{artifacts.meta_path.name}",
        ]

    def _exec_training(self, config: RunConfig, run_dir: Path, record: RunRecord) -> list[str]:
        ingest_dir = self._resolve_dir(config, record, STEP_INGESTION, "ingest")
        dataset, bundle = load_split(ingest_dir)
        result = run_study(
            space=config.search_space(),
            dataset=dataset,
            task=config.ml_class,
            artifact_dir=run_dir / "train",
            scalers_fingerprint=bundle.fingerprint,
        )
        # Preprocessing travels with the model so a deploy is self-contained.
        scalers_copy = result.checkpoint_path / "scalers.json"
        scalers_copy.write_bytes((ingest_dir / "scalers.json").read_bytes())
        record.trials = [
            {
                "number": t.number,
                "state": t.state,
                "started_at": datetime.fromtimestamp(t.start, tz=timezone.utc).isoformat(
                    timespec="milliseconds"
                ),
                "finished_at": datetime.fromtimestamp(t.end, tz=timezone.utc).isoformat(
                    timespec="milliseconds"
                ),
                "duration_s": round(t.duration, 3),
            }
            for t in result.study.trials
        ]
        self._export(result.checkpoint_path, config.ml_path)
        self._export_file(ingest_dir / "scalers.json", config.scalers_path)
        return ["train/study.json", "train/checkpoint", "train/trials"]

    def _exec_evaluation(self, config: RunConfig, run_dir: Path, record: RunRecord) -> list[str]:
        train_dir = self._resolve_dir(config, record, STEP_TRAINING, "train")
        ingest_dir = self._resolve_dir(config, record, STEP_INGESTION, "ingest")
        dataset, bundle = load_split(ingest_dir)
        checkpoint = load_checkpoint(train_dir / "checkpoint")
        study = Study.from_json((train_dir / "study.json").read_text(encoding="utf-8"))
        outputs = forward(checkpoint.model, dataset.test_x)
        hpo = HpoReport.from_study(study)
        if config.ml_class is Task.CLASSIFIER:
            reports = EvalReports(
                task=config.ml_class.value,
                hpo=hpo,
                classification=classifier_report(outputs, dataset.test_y, dataset.target_names),
            )
        else:
            names = bundle.targets.column_names()
            preds_raw = np.array(
                [[inverse_transform(bundle.targets, row)[n] for n in names] for row in outputs]
            )
            truth_raw = np.array(
                [[inverse_transform(bundle.targets, row)[n] for n in names] for row in dataset.test_y]
            )
            reports = EvalReports(
                task=config.ml_class.value,
                hpo=hpo,
                regression=regression_report(preds_raw, truth_raw, names),
            )
        written = write_reports(reports, run_dir / "eval")
        if config.optuna_viz:
            viz_dir = self._resolve_export(config.optuna_viz)
            viz_dir.mkdir(parents=True, exist_ok=True)
            for name in ("optimization_history.csv", "param_importance.csv"):
                (viz_dir / name).write_bytes((run_dir / "eval" / name).read_bytes())
        return [f"eval/{path.name}" for path in written]

    # ---- shared-storage exports ----------------------------------------------

    def _resolve_export(self, path_text: str) -> Path:
        path = Path(path_text)
        return path if path.is_absolute() else self.store.root / path

    def _export(self, checkpoint_dir: Path, dest_text: str) -> None:
        if not dest_text:
            return
        dest = self._resolve_export(dest_text)
        dest.parent.mkdir(parents=True, exist_ok=True)
        tmp = dest.with_name(dest.name + ".tmp")
        if tmp.exists():
            shutil.rmtree(tmp)
        shutil.copytree(checkpoint_dir, tmp)
        if dest.exists():
            shutil.rmtree(dest)
        os.replace(tmp, dest)

    def _export_file(self, source: Path, dest_text: str) -> None:
        if not dest_text:
            return
        dest = self._resolve_export(dest_text)
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(source.read_bytes())
