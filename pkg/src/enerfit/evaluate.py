"""Model and study evaluation: classification/regression metrics, HPO
optimization history, and rank-correlation parameter importance, all written
to a structured on-disk report set (JSON + plot-ready CSV series)."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EnerfitError
from .tune import COMPLETE, Study, TrialParams, best_trial

METRICS_FORMAT_VERSION = 1


class LengthMismatchError(EnerfitError):
    code = "LengthMismatch"


class EmptyError(EnerfitError):
    code = "Empty"


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary counts with rows=actual, cols=predicted."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion_matrix(predictions, truth) -> ConfusionMatrix:
    preds = [bool(p) for p in predictions]
    actual = [bool(t) for t in truth]
    if len(preds) != len(actual):
        raise LengthMismatchError(f"{len(preds)} predictions vs {len(actual)} labels")
    if not preds:
        raise EmptyError("no samples")
    tp = sum(1 for p, t in zip(preds, actual) if p and t)
    fp = sum(1 for p, t in zip(preds, actual) if p and not t)
    fn = sum(1 for p, t in zip(preds, actual) if not p and t)
    tn = sum(1 for p, t in zip(preds, actual) if not p and not t)
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass
class ClassMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": self.degenerate,
        }


def classification_metrics(cm: ConfusionMatrix) -> ClassMetrics:
    """Accuracy/precision/recall/F1 from counts; zero-denominator cases
    come back as 0 with the metric named in ``degenerate``."""
    degenerate: list[str] = []
    accuracy = (cm.tp + cm.tn) / cm.total
    if cm.tp + cm.fp == 0:
        precision, flagged = 0.0, True
    else:
        precision, flagged = cm.tp / (cm.tp + cm.fp), False
    if flagged:
        degenerate.append("precision")
    if cm.tp + cm.fn == 0:
        recall = 0.0
        degenerate.append("recall")
    else:
        recall = cm.tp / (cm.tp + cm.fn)
    if precision + recall == 0:
        f1 = 0.0
        degenerate.append("f1")
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassMetrics(accuracy=accuracy, precision=precision, recall=recall, f1=f1, degenerate=degenerate)


@dataclass
class RegMetrics:
    mae: float
    rmse: float
    mape: float
    r2: float
    mape_skipped: int = 0
    degenerate: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "mape": self.mape,
            "r2": self.r2,
            "mape_skipped": self.mape_skipped,
            "degenerate": self.degenerate,
        }


def regression_metrics(predictions, truth) -> RegMetrics:
    """MAE, RMSE, MAPE (zero-truth entries skipped and counted), and R^2
    (degenerate when the truth is constant)."""
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise LengthMismatchError(f"predictions {p.shape} vs truth {t.shape}")
    if len(p) < 2:
        raise LengthMismatchError("need at least 2 samples")
    err = p - t
    mae = float(np.mean(np.abs(err)))
    rmse = float(math.sqrt(np.mean(err**2)))
    degenerate: list[str] = []
    nonzero = t != 0
    skipped = int(np.sum(~nonzero))
    if skipped == len(t):
        mape = 0.0
        degenerate.append("mape")
    else:
        with np.errstate(over="ignore"):  # near-zero truth can overflow to inf
            mape = float(np.mean(np.abs(err[nonzero] / t[nonzero])))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 0.0
        degenerate.append("r2")
    else:
        r2 = 1.0 - float(np.sum(err**2)) / ss_tot
    return RegMetrics(mae=mae, rmse=rmse, mape=mape, r2=r2, mape_skipped=skipped, degenerate=degenerate)


def _average_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(xs: list[float], ys: list[float]) -> float | None:
    """Spearman rank correlation; None when either side is constant."""
    if len(xs) != len(ys):
        raise LengthMismatchError(f"{len(xs)} vs {len(ys)} values")
    rx = _average_ranks(list(xs))
    ry = _average_ranks(list(ys))
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    sx = math.sqrt(sum((r - mx) ** 2 for r in rx))
    sy = math.sqrt(sum((r - my) ** 2 for r in ry))
    if sx == 0.0 or sy == 0.0:
        return None
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    return cov / (sx * sy)


PARAM_NAMES = ("batch_size", "l_rate", "n_layers", "layer_sizes")


def _param_value(params: TrialParams, name: str, space) -> float:
    if name == "batch_size":
        return float(space.batch_sizes.index(params.batch_size))
    if name == "l_rate":
        return params.l_rate
    if name == "n_layers":
        return float(params.n_layers)
    return float(sum(params.layer_sizes) / len(params.layer_sizes))


@dataclass
class ImportanceReport:
    scores: dict[str, float]
    insufficient_data: bool = False

    def to_dict(self) -> dict:
        return {"scores": self.scores, "insufficient_data": self.insufficient_data}


def param_importance(study: Study) -> ImportanceReport:
    """Absolute Spearman correlation of each hyperparameter with the
    objective over completed trials, normalized to sum 1.

    Categorical batch sizes correlate via their index in the declared choice
    list; per-layer sizes aggregate as their mean. Fewer than 3 completed
    trials (or a flat objective) returns all zeros with the flag set.
    """
    completed = [t for t in study.trials if t.state == COMPLETE and t.objective is not None]
    zeros = {name: 0.0 for name in PARAM_NAMES}
    if len(completed) < 3:
        return ImportanceReport(scores=zeros, insufficient_data=True)
    objectives = [t.objective for t in completed]
    raw: dict[str, float] = {}
    for name in PARAM_NAMES:
        values = [_param_value(t.params, name, study.space) for t in completed]
        rho = spearman(values, objectives)
        raw[name] = abs(rho) if rho is not None else 0.0
    total = sum(raw.values())
    if total == 0.0:
        return ImportanceReport(scores=zeros, insufficient_data=True)
    return ImportanceReport(scores={name: raw[name] / total for name in PARAM_NAMES})


@dataclass
class HistoryPoint:
    number: int
    objective: float | None
    best_so_far: float | None


def optimization_history(study: Study) -> list[HistoryPoint]:
    """Per-trial objective plus the running best over completed trials."""
    points: list[HistoryPoint] = []
    best: float | None = None
    for trial in study.trials:
        if trial.state == COMPLETE and trial.objective is not None:
            best = trial.objective if best is None else min(best, trial.objective)
            points.append(HistoryPoint(trial.number, trial.objective, best))
        else:
            points.append(HistoryPoint(trial.number, None, best))
    return points


@dataclass
class HpoReport:
    history: list[HistoryPoint]
    importance: ImportanceReport
    best_params: TrialParams | None

    @classmethod
    def from_study(cls, study: Study) -> "HpoReport":
        try:
            best = best_trial(study).params
        except EnerfitError:
            best = None
        return cls(
            history=optimization_history(study),
            importance=param_importance(study),
            best_params=best,
        )

    def to_dict(self) -> dict:
        return {
            "optimization_history": [
                {"number": p.number, "objective": p.objective, "best_so_far": p.best_so_far}
                for p in self.history
            ],
            "parameter_importance": self.importance.to_dict(),
            "best_params": self.best_params.to_dict() if self.best_params else None,
        }


@dataclass
class TargetClassification:
    name: str
    metrics: ClassMetrics
    confusion: ConfusionMatrix


@dataclass
class ClassificationReport:
    targets: list[TargetClassification]

    def macro(self) -> dict:
        n = len(self.targets)
        return {
            "accuracy": sum(t.metrics.accuracy for t in self.targets) / n,
            "precision": sum(t.metrics.precision for t in self.targets) / n,
            "recall": sum(t.metrics.recall for t in self.targets) / n,
            "f1": sum(t.metrics.f1 for t in self.targets) / n,
        }

    def to_dict(self) -> dict:
        return {
            "per_target": {
                t.name: {
                    **t.metrics.to_dict(),
                    "confusion": {
                        "tp": t.confusion.tp,
                        "fp": t.confusion.fp,
                        "fn": t.confusion.fn,
                        "tn": t.confusion.tn,
                    },
                }
                for t in self.targets
            },
            "macro": self.macro(),
        }


@dataclass
class RegressionReport:
    targets: list[tuple[str, RegMetrics]]

    def to_dict(self) -> dict:
        return {"per_target": {name: metrics.to_dict() for name, metrics in self.targets}}


def classifier_report(probabilities: np.ndarray, truth: np.ndarray, target_names, threshold: float = 0.5) -> ClassificationReport:
    """Threshold sigmoid outputs and compute per-target counts and rates."""
    probs = np.asarray(probabilities, dtype=np.float64)
    labels = np.asarray(truth, dtype=np.float64) >= 0.5
    if probs.shape != labels.shape or probs.shape[1] != len(tuple(target_names)):
        raise LengthMismatchError(f"probabilities {probs.shape} vs targets {labels.shape}")
    targets = []
    for j, name in enumerate(target_names):
        cm = confusion_matrix(probs[:, j] >= threshold, labels[:, j])
        targets.append(TargetClassification(name=name, metrics=classification_metrics(cm), confusion=cm))
    return ClassificationReport(targets=targets)


def regression_report(predictions: np.ndarray, truth: np.ndarray, target_names) -> RegressionReport:
    preds = np.asarray(predictions, dtype=np.float64)
    actual = np.asarray(truth, dtype=np.float64)
    if preds.shape != actual.shape or preds.shape[1] != len(tuple(target_names)):
        raise LengthMismatchError(f"predictions {preds.shape} vs truth {actual.shape}")
    return RegressionReport(
        targets=[(name, regression_metrics(preds[:, j], actual[:, j])) for j, name in enumerate(target_names)]
    )


@dataclass
class EvalReports:
    task: str
    hpo: HpoReport
    classification: ClassificationReport | None = None
    regression: RegressionReport | None = None


def write_reports(reports: EvalReports, directory: Path | str) -> list[Path]:
    """Write metrics.json plus plot-ready CSV series; the file set depends
    only on the report content, so re-runs are byte-identical."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        payload: dict = {
            "format_version": METRICS_FORMAT_VERSION,
            "task": reports.task,
            "hpo": reports.hpo.to_dict(),
        }
        if reports.classification is not None:
            payload["classification"] = reports.classification.to_dict()
        if reports.regression is not None:
            payload["regression"] = reports.regression.to_dict()
        metrics_path = directory / "metrics.json"
        metrics_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(metrics_path)

        if reports.classification is not None:
            for target in reports.classification.targets:
                path = directory / f"confusion_{target.name}.csv"
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["", "predicted_true", "predicted_false"])
                    writer.writerow(["actual_true", target.confusion.tp, target.confusion.fn])
                    writer.writerow(["actual_false", target.confusion.fp, target.confusion.tn])
                written.append(path)

        history_path = directory / "optimization_history.csv"
        with open(history_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["number", "objective", "best_so_far"])
            for point in reports.hpo.history:
                writer.writerow(
                    [
                        point.number,
                        "" if point.objective is None else repr(point.objective),
                        "" if point.best_so_far is None else repr(point.best_so_far),
                    ]
                )
        written.append(history_path)

        importance_path = directory / "param_importance.csv"
        with open(importance_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["param", "score"])
            for name in PARAM_NAMES:
                writer.writerow([name, repr(reports.hpo.importance.scores[name])])
        written.append(importance_path)
        return written
    except OSError as exc:
        from .ingest.sources import IoError

        raise IoError(f"cannot write reports to {directory}: {exc}")
