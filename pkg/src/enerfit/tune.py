"""Hyperparameter search: random sampling, median-rule pruning, early
stopping, and best-model selection.

Trials run sequentially, each on its own splitmix64 stream derived from the
study seed, so the whole study (including prune decisions) is reproducible
byte-for-byte. Wall-clock trial times are kept on the records for run
reporting but stay out of study.json to preserve that determinism.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from .domain import Task
from .errors import EnerfitError
from .ingest.pipeline import SplitDataset
from .neural import AdamState, MlpConfig, forward, init_model, loss, save_checkpoint, train_epoch
from .rng import SplitMix64, derive_seed

logger = logging.getLogger(__name__)

STUDY_FORMAT_VERSION = 1

COMPLETE = "Complete"
PRUNED = "Pruned"
FAILED = "Failed"


class NoCompleteTrialError(EnerfitError):
    code = "NoCompleteTrial"


@dataclass(frozen=True)
class SearchSpace:
    """Trial sampling bounds; the defaults mirror the run-config schema."""

    batch_sizes: tuple[int, ...] = (256, 512, 1024)
    l_rate_low: float = 1e-4
    l_rate_high: float = 1e-3
    n_layers_low: int = 2
    n_layers_high: int = 6
    layer_size_choices: tuple[int, ...] = (128, 256, 512, 1024, 2048)
    max_epochs: int = 10
    n_trials: int = 3
    seed: int = 42

    def __post_init__(self):
        if not self.batch_sizes or any(b < 1 for b in self.batch_sizes):
            raise ValueError("batch_sizes must be non-empty positive choices")
        if not 0 < self.l_rate_low <= self.l_rate_high:
            raise ValueError("l_rate range must satisfy 0 < low <= high")
        if not 1 <= self.n_layers_low <= self.n_layers_high:
            raise ValueError("n_layers range must satisfy 1 <= low <= high")
        if not self.layer_size_choices or any(s < 1 for s in self.layer_size_choices):
            raise ValueError("layer_size_choices must be non-empty positive choices")
        if self.max_epochs < 1 or self.n_trials < 1:
            raise ValueError("max_epochs and n_trials must be >= 1")

    def to_dict(self) -> dict:
        return {
            "batch_size": list(self.batch_sizes),
            "l_rate": [self.l_rate_low, self.l_rate_high],
            "n_layers": [self.n_layers_low, self.n_layers_high],
            "layer_sizes": list(self.layer_size_choices),
            "max_epochs": self.max_epochs,
            "n_trials": self.n_trials,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SearchSpace":
        return cls(
            batch_sizes=tuple(data["batch_size"]),
            l_rate_low=data["l_rate"][0],
            l_rate_high=data["l_rate"][1],
            n_layers_low=data["n_layers"][0],
            n_layers_high=data["n_layers"][1],
            layer_size_choices=tuple(data["layer_sizes"]),
            max_epochs=data["max_epochs"],
            n_trials=data["n_trials"],
            seed=data["seed"],
        )


@dataclass(frozen=True)
class TrialParams:
    batch_size: int
    l_rate: float
    n_layers: int
    layer_sizes: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "l_rate": self.l_rate,
            "n_layers": self.n_layers,
            "layer_sizes": list(self.layer_sizes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrialParams":
        return cls(
            batch_size=data["batch_size"],
            l_rate=data["l_rate"],
            n_layers=data["n_layers"],
            layer_sizes=tuple(data["layer_sizes"]),
        )


@dataclass
class TrialRecord:
    number: int
    state: str
    params: TrialParams
    intermediate_values: list[float] = field(default_factory=list)
    objective: float | None = None
    start: float = 0.0  # wall-clock, not serialized into study.json
    end: float = 0.0

    @property
    def duration(self) -> float:
        return max(self.end - self.start, 0.0)


@dataclass
class Study:
    space: SearchSpace
    trials: list[TrialRecord] = field(default_factory=list)
    best_trial_number: int | None = None

    @property
    def seed(self) -> int:
        return self.space.seed

    def to_json(self) -> str:
        payload = {
            "format_version": STUDY_FORMAT_VERSION,
            "seed": self.space.seed,
            "space": self.space.to_dict(),
            "best_trial_number": self.best_trial_number,
            "trials": [
                {
                    "number": t.number,
                    "state": t.state,
                    "params": t.params.to_dict(),
                    "intermediate_values": t.intermediate_values,
                    "objective": t.objective,
                }
                for t in self.trials
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Study":
        payload = json.loads(text)
        if payload.get("format_version") != STUDY_FORMAT_VERSION:
            raise EnerfitError(f"unsupported study format version {payload.get('format_version')}")
        study = cls(
            space=SearchSpace.from_dict(payload["space"]),
            best_trial_number=payload["best_trial_number"],
        )
        for entry in payload["trials"]:
            study.trials.append(
                TrialRecord(
                    number=entry["number"],
                    state=entry["state"],
                    params=TrialParams.from_dict(entry["params"]),
                    intermediate_values=list(entry["intermediate_values"]),
                    objective=entry["objective"],
                )
            )
        return study


def sample_params(space: SearchSpace, trial_rng: SplitMix64) -> TrialParams:
    """Independent draws per dimension; each hidden layer's size is drawn
    separately. Draw order is fixed, so a trial seed pins the params."""
    batch_size = trial_rng.choice(space.batch_sizes)
    l_rate = trial_rng.log_uniform(space.l_rate_low, space.l_rate_high)
    n_layers = trial_rng.randint(space.n_layers_low, space.n_layers_high)
    layer_sizes = tuple(trial_rng.choice(space.layer_size_choices) for _ in range(n_layers))
    return TrialParams(batch_size=batch_size, l_rate=l_rate, n_layers=n_layers, layer_sizes=layer_sizes)


def should_prune(
    study: Study,
    current: list[float],
    epoch: int,
    warmup_trials: int = 1,
    warmup_epochs: int = 1,
) -> bool:
    """Median rule: prune iff the current value at this epoch is strictly
    worse than the median of completed trials' values at the same epoch.
    Disabled until warmup_trials trials completed and epoch >= warmup_epochs.
    """
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    completed = [t for t in study.trials if t.state == COMPLETE]
    if len(completed) < warmup_trials or epoch < warmup_epochs:
        return False
    peers = [t.intermediate_values[epoch] for t in completed if len(t.intermediate_values) > epoch]
    if not peers:
        return False
    return current[epoch] > statistics.median(peers)


def early_stop(values: list[float], patience: int, min_delta: float = 0.0) -> bool:
    """True iff the best value has not improved by more than min_delta for
    ``patience`` consecutive epochs."""
    if patience < 1:
        raise ValueError("patience must be >= 1")
    best = math.inf
    stale = 0
    for value in values:
        if value < best - min_delta:
            best = value
            stale = 0
        else:
            stale += 1
    return stale >= patience


def best_trial(study: Study) -> TrialRecord:
    """Completed trial with the minimal objective; ties go to the lowest number."""
    completed = [t for t in study.trials if t.state == COMPLETE and t.objective is not None]
    if not completed:
        raise NoCompleteTrialError("study has no complete trial")
    return min(completed, key=lambda t: (t.objective, t.number))


@dataclass
class StudyResult:
    study: Study
    checkpoint_path: Path
    study_path: Path


def run_study(
    space: SearchSpace,
    dataset: SplitDataset,
    task: Task,
    artifact_dir: Path | str,
    scalers_fingerprint: str = "",
    patience: int = 3,
    min_delta: float = 0.0,
    warmup_trials: int = 1,
    warmup_epochs: int = 1,
) -> StudyResult:
    """Run all trials sequentially and checkpoint the best final model.

    Per-epoch validation loss on the test partition is the objective and the
    intermediate value (BCE for classifiers, MSE for regressors). The best
    trial's in-memory model is checkpointed directly; no re-training.
    """
    artifact_dir = Path(artifact_dir)
    artifact_dir.mkdir(parents=True, exist_ok=True)
    kind = "bce" if task is Task.CLASSIFIER else "mse"
    head = "sigmoid" if task is Task.CLASSIFIER else "linear"
    study = Study(space=space)
    best_model = None
    best_objective = math.inf
    best_number: int | None = None

    for number in range(space.n_trials):
        trial_seed = derive_seed(space.seed, number)
        rng = SplitMix64(trial_seed)
        params = sample_params(space, rng)
        config = MlpConfig(
            input_dim=dataset.train_x.shape[1],
            layer_sizes=params.layer_sizes,
            output_dim=dataset.train_y.shape[1],
            output_head=head,
        )
        start = time.time()
        model = init_model(config, seed=rng.next_u64())
        state = AdamState.for_model(model)
        intermediate: list[float] = []
        trial_state = COMPLETE
        for epoch in range(space.max_epochs):
            shuffle_seed = rng.next_u64()
            train_epoch(
                model,
                state,
                dataset.train_x,
                dataset.train_y,
                params.batch_size,
                params.l_rate,
                kind,
                shuffle_seed,
            )
            value = loss(forward(model, dataset.test_x), dataset.test_y, kind)
            if not math.isfinite(value):
                trial_state = FAILED
                break
            intermediate.append(value)
            if should_prune(study, intermediate, epoch, warmup_trials, warmup_epochs):
                trial_state = PRUNED
                break
            if early_stop(intermediate, patience, min_delta):
                break
        end = time.time()
        objective = intermediate[-1] if trial_state == COMPLETE and intermediate else None
        if objective is None and trial_state == COMPLETE:
            trial_state = FAILED
        record = TrialRecord(
            number=number,
            state=trial_state,
            params=params,
            intermediate_values=intermediate,
            objective=objective,
            start=start,
            end=end,
        )
        study.trials.append(record)
        _write_trial_dir(artifact_dir, record)
        logger.info(
            "trial %d %s params=%s objective=%s",
            number,
            trial_state,
            params.to_dict(),
            objective,
        )
        if trial_state == COMPLETE and objective is not None and objective < best_objective:
            best_objective = objective
            best_number = number
            best_model = model.copy()

    if best_model is None or best_number is None:
        raise NoCompleteTrialError("every trial was pruned or failed")
    study.best_trial_number = best_number

    manifest = {
        "task": task.value,
        "feature_cols": list(dataset.feature_names),
        "target_cols": list(dataset.target_names),
        "scalers_fingerprint": scalers_fingerprint,
        "objective": best_objective,
        "best_trial_number": best_number,
    }
    checkpoint_path = artifact_dir / "checkpoint"
    save_checkpoint(best_model, manifest, checkpoint_path)
    study_path = artifact_dir / "study.json"
    study_path.write_text(study.to_json(), encoding="utf-8")
    return StudyResult(study=study, checkpoint_path=checkpoint_path, study_path=study_path)


def _write_trial_dir(artifact_dir: Path, record: TrialRecord) -> None:
    trial_dir = artifact_dir / "trials" / f"trial_{record.number:03d}"
    trial_dir.mkdir(parents=True, exist_ok=True)
    with open(trial_dir / "intermediate_values.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "value"])
        for epoch, value in enumerate(record.intermediate_values):
            writer.writerow([epoch, repr(value)])
