"""Acceptance suite: one test per criterion, each printing a PASS line once
its assertions hold (run with -s to see them)."""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from enerfit.cli import main
from enerfit.domain import ColumnKind, ColumnSpec
from enerfit.ingest import (
    IngestConfig,
    fit_scalers,
    inverse_transform,
    parse_csv,
    run_ingestion,
    transform,
)
from enerfit.ingest.pipeline import clean, split
from enerfit.neural import (
    CorruptWeightsError,
    MlpConfig,
    forward,
    gradients,
    init_model,
    load_checkpoint,
    loss,
    save_checkpoint,
)
from enerfit.orchestrate import (
    ArtifactStore,
    MissingArtifactError,
    Orchestrator,
    TaskMismatchError,
    validate_run_config,
)
from enerfit.domain import RETROFIT_SCHEMA
from enerfit.evaluate import confusion_matrix, classification_metrics, param_importance, regression_metrics
from enerfit.rng import SplitMix64
from enerfit.synth import retrofit_csv
from enerfit.tune import COMPLETE, SearchSpace, Study, TrialParams, TrialRecord, should_prune

from .conftest import AUTH, PV_TARGETS, RETROFIT_TARGETS, classifier_raw_config


def report(number: int, description: str) -> None:
    print(f"ACCEPTANCE {number}: PASS — {description}")


# --------------------------------------------------------------------------
# 1. Gradient correctness
# --------------------------------------------------------------------------


def central_differences(model, x, y, kind, h=1e-5):
    grads_w = [np.zeros_like(w) for w in model.weights]
    grads_b = [np.zeros_like(b) for b in model.biases]
    for params, grads in ((model.weights, grads_w), (model.biases, grads_b)):
        for p, g in zip(params, grads):
            flat_p, flat_g = p.ravel(), g.ravel()
            for i in range(flat_p.size):
                keep = flat_p[i]
                flat_p[i] = keep + h
                up = loss(forward(model, x), y, kind)
                flat_p[i] = keep - h
                down = loss(forward(model, x), y, kind)
                flat_p[i] = keep
                flat_g[i] = (up - down) / (2 * h)
    return grads_w, grads_b


def hidden_preactivation_margin(model, x):
    """Smallest |z| over hidden units, traced independently of the engine.
    Central differences are only valid away from the ReLU kink, so draws
    whose batch puts any hidden unit within the step size of 0 get
    resampled (the analytic subgradient convention at exactly 0 is
    arbitrary and finite differences straddle the jump)."""
    margin = math.inf
    h = np.asarray(x, dtype=np.float64)
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        if i < len(model.weights) - 1:
            margin = min(margin, float(np.min(np.abs(z))))
            h = np.maximum(z, 0.0)
        else:
            h = z
    return margin


def test_criterion_1_gradient_correctness():
    started = time.monotonic()
    rng = SplitMix64(1001)
    worst = 0.0
    for draw in range(20):
        n_layers = rng.choice([2, 3])
        widths = tuple(rng.randint(3, 16) for _ in range(n_layers))  # all <= 64
        input_dim = rng.randint(2, 8)
        output_dim = rng.randint(1, 5)
        head, kind = ("sigmoid", "bce") if draw % 2 == 0 else ("linear", "mse")
        config = MlpConfig(input_dim=input_dim, layer_sizes=widths, output_dim=output_dim, output_head=head)
        for _ in range(100):
            model = init_model(config, seed=rng.next_u64())
            x = rng.next_floats(8 * input_dim).reshape(8, input_dim) * 2 - 1
            if hidden_preactivation_margin(model, x) > 5e-4:  # 50x the FD step
                break
        else:
            pytest.fail("could not draw a kink-free batch")
        if kind == "bce":
            y = (rng.next_floats(8 * output_dim).reshape(8, output_dim) > 0.5).astype(float)
        else:
            y = rng.next_floats(8 * output_dim).reshape(8, output_dim)
        analytic = gradients(model, x, y, kind)
        numeric = central_differences(model, x, y, kind)
        for a_list, n_list in zip(analytic, numeric):
            for a, n in zip(a_list, n_list):
                denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
                worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    elapsed = time.monotonic() - started
    assert worst < 1e-4, f"max relative gradient error {worst}"
    assert elapsed < 10.0, f"gradient check took {elapsed:.1f}s"
    report(1, f"20 configs, max relative error {worst:.2e} in {elapsed:.1f}s")


# --------------------------------------------------------------------------
# 2. Determinism of run-all with the dashboard-schema classifier config
# --------------------------------------------------------------------------


def test_criterion_2_run_all_determinism(fixture_dir, tmp_path, capsys):
    config_path = tmp_path / "classifier.json"
    config_path.write_text(json.dumps(classifier_raw_config(fixture_dir)), encoding="utf-8")
    started = time.monotonic()
    run_ids = []
    for i in range(2):
        code = main(
            [
                "run-all",
                "--config",
                str(config_path),
                "--artifact-root",
                str(tmp_path / f"store{i}"),
                "--output",
                "json",
            ]
        )
        assert code == 0
        run_ids.append(json.loads(capsys.readouterr().out)["run_id"])
    elapsed = time.monotonic() - started
    dirs = [tmp_path / f"store{i}" / "runs" / run_ids[i] for i in range(2)]
    compared = [
        "train/study.json",
        "train/checkpoint/manifest.json",
        "train/checkpoint/weights.bin",
        "train/checkpoint/scalers.json",
        "eval/metrics.json",
    ]
    for rel in compared:
        first = (dirs[0] / rel).read_bytes()
        second = (dirs[1] / rel).read_bytes()
        assert first == second, f"{rel} differs between runs"
    assert elapsed < 60.0, f"two run-all executions took {elapsed:.1f}s"
    with capsys.disabled():
        report(2, f"study.json, checkpoint, metrics.json byte-identical; {elapsed:.1f}s for both runs")


# --------------------------------------------------------------------------
# 3. Learning sanity on the separable multi-label fixture
# --------------------------------------------------------------------------


def test_criterion_3_learning_sanity(fixture_dir, tmp_path):
    raw = classifier_raw_config(
        fixture_dir,
        batch_size=[32],
        l_rate=[0.002, 0.006],
        layer_sizes=[64, 128],
        n_layers=[2, 3],
        max_epochs=40,
        n_trials=3,
    )
    store = ArtifactStore(tmp_path / "store")
    orchestrator = Orchestrator(store)
    run_id = orchestrator.launch(validate_run_config(raw), ["Ingestion", "Training", "Evaluation"])
    record = orchestrator.wait(run_id, timeout=300)
    assert record.status == "Succeeded", record.to_dict()
    study = json.loads((store.run_dir(run_id) / "train" / "study.json").read_text())
    best = next(t for t in study["trials"] if t["number"] == study["best_trial_number"])
    values = best["intermediate_values"]
    assert values[-1] < 0.5 * values[0], f"final {values[-1]} vs epoch-0 {values[0]}"
    metrics = json.loads((store.run_dir(run_id) / "eval" / "metrics.json").read_text())
    per_target = metrics["classification"]["per_target"]
    assert set(per_target) == set(RETROFIT_TARGETS)
    for name, entry in per_target.items():
        assert entry["accuracy"] >= 0.95, f"{name} accuracy {entry['accuracy']}"
    accs = ", ".join(f"{per_target[n]['accuracy']:.2f}" for n in RETROFIT_TARGETS)
    report(3, f"final BCE {values[-1]:.4f} < 50% of epoch-0 {values[0]:.4f}; accuracies [{accs}]")


# --------------------------------------------------------------------------
# 4. Median pruning rule
# --------------------------------------------------------------------------


def test_criterion_4_pruning_rule():
    def build_study():
        study = Study(space=SearchSpace())
        for i, tail in enumerate((0.2, 0.4, 0.6)):
            study.trials.append(
                TrialRecord(
                    number=i,
                    state=COMPLETE,
                    params=TrialParams(batch_size=256, l_rate=5e-4, n_layers=2, layer_sizes=(128, 128)),
                    intermediate_values=[1.0, 0.9, 0.8, tail],
                    objective=tail,
                )
            )
        return study

    decisions = []
    for _ in range(2):  # reproducible under re-run
        study = build_study()
        prune_high = should_prune(study, [1.0, 0.9, 0.8, 0.9], epoch=3, warmup_trials=1, warmup_epochs=1)
        keep_low = should_prune(study, [1.0, 0.9, 0.8, 0.1], epoch=3, warmup_trials=1, warmup_epochs=1)
        decisions.append((prune_high, keep_low))
    assert decisions[0] == decisions[1] == (True, False)
    report(4, "0.9 pruned against median 0.4, 0.1 continues; decisions reproducible")


# --------------------------------------------------------------------------
# 5. Metric oracles
# --------------------------------------------------------------------------


def test_criterion_5_metric_oracles():
    rng = SplitMix64(55)
    for _ in range(1000):
        n = rng.randint(1, 30)
        preds = [rng.next_float() > 0.5 for _ in range(n)]
        truth = [rng.next_float() > 0.5 for _ in range(n)]
        tp = sum(1 for p, t in zip(preds, truth) if p and t)
        fp = sum(1 for p, t in zip(preds, truth) if p and not t)
        fn = sum(1 for p, t in zip(preds, truth) if not p and t)
        tn = n - tp - fp - fn
        cm = confusion_matrix(preds, truth)
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (tp, fp, fn, tn)
        metrics = classification_metrics(cm)
        assert metrics.accuracy == (tp + tn) / n
        assert metrics.precision == (tp / (tp + fp) if tp + fp else 0.0)
        assert metrics.recall == (tp / (tp + fn) if tp + fn else 0.0)

    for _ in range(1000):
        n = rng.randint(2, 40)
        preds = [rng.uniform(-100.0, 100.0) for _ in range(n)]
        truth = [rng.uniform(-100.0, 100.0) for _ in range(n)]
        metrics = regression_metrics(preds, truth)
        assert metrics.rmse >= metrics.mae - 1e-12

    params = []
    objectives = []
    for i in range(10):
        l_rate = 1e-4 * (i + 1)
        params.append(TrialParams(batch_size=256, l_rate=l_rate, n_layers=3, layer_sizes=(256, 256, 256)))
        objectives.append(0.05 + 200.0 * l_rate)
    study = Study(space=SearchSpace())
    for i, (p, obj) in enumerate(zip(params, objectives)):
        study.trials.append(
            TrialRecord(number=i, state=COMPLETE, params=p, intermediate_values=[obj], objective=obj)
        )
    importance = param_importance(study)
    assert abs(importance.scores["l_rate"] - 1.0) <= 1e-9
    report(5, "confusion metrics match brute force x1000; RMSE>=MAE x1000; importance 1.0 on l_rate")


# --------------------------------------------------------------------------
# 6. Scaler round-trip and train-only fitting
# --------------------------------------------------------------------------


def test_criterion_6_scaler_round_trip(tmp_path):
    cols = [
        ColumnSpec("area", ColumnKind.CONTINUOUS),
        ColumnSpec("gen", ColumnKind.CONTINUOUS, optional=True),
        ColumnSpec("klass", ColumnKind.ORDINAL_CLASS),
        ColumnSpec("region", ColumnKind.CATEGORICAL),
        ColumnSpec("flag", ColumnKind.BOOLEAN),
    ]
    regions = ["Kurzeme", "Latgale", "Riga", "Vidzeme", "Zemgale"]
    rng = SplitMix64(66)

    def random_row():
        return {
            "area": rng.uniform(10.0, 5000.0),
            "gen": rng.uniform(0.0, 9000.0),
            "klass": "ABCDEFG"[rng.randint(0, 6)],
            "region": regions[rng.randint(0, 4)],
            "flag": rng.next_float() > 0.5,
        }

    fit_rows = [random_row() for _ in range(300)]
    scalers = fit_scalers(fit_rows, cols)
    for _ in range(1000):
        row = random_row()
        vector, imputed = transform(scalers, row)
        assert imputed == []
        back = inverse_transform(scalers, vector)
        assert back["klass"] == row["klass"]
        assert back["region"] == row["region"]
        assert back["flag"] == row["flag"]
        for name in ("area", "gen"):
            assert math.isclose(back[name], row[name], rel_tol=1e-9, abs_tol=1e-12)

    # Train-only fitting: recompute the canonical train-partition hash
    # independently and compare with the persisted fingerprint.
    csv_path = tmp_path / "retrofit.csv"
    csv_path.write_text(retrofit_csv(), encoding="utf-8")
    out = tmp_path / "ingest"
    run_ingestion(IngestConfig(source=str(csv_path), schema=RETROFIT_SCHEMA, split_ratio=0.8, seed=42), out)
    scalers_payload = json.loads((out / "scalers.json").read_text())
    raw = parse_csv(csv_path.read_text())
    rows, _ = clean(raw, RETROFIT_SCHEMA)
    train_rows = split(rows, 0.8, 42).train
    import hashlib

    names = list(RETROFIT_SCHEMA.feature_names) + list(RETROFIT_SCHEMA.target_names)

    def canonical_hash(table_rows):
        hasher = hashlib.sha256()
        hasher.update((",".join(names) + "\n").encode())
        for row in table_rows:
            cells = []
            for name in names:
                value = row[name]
                if isinstance(value, bool):
                    cells.append("1" if value else "0")
                elif isinstance(value, float):
                    cells.append(repr(value))
                else:
                    cells.append(str(value))
            hasher.update((",".join(cells) + "\n").encode())
        return hasher.hexdigest()

    assert len(train_rows) < len(rows)
    assert scalers_payload["features"]["fitted_on"] == canonical_hash(train_rows)
    assert scalers_payload["features"]["fitted_on"] != canonical_hash(rows)
    report(6, "1000-row round-trip exact/1e-9; scalers fingerprint matches train partition only")


# --------------------------------------------------------------------------
# 7. API contract with the worked example bodies
# --------------------------------------------------------------------------


def test_criterion_7_api_contract(client):
    retrofit_body = {
        "building_total_area": 500,
        "above_ground_floors": 2,
        "energy_consumption_before": 30,
        "initial_energy_class": "E",
        "energy_class_after": "B",
    }
    response = client.post("/api/v1/retrofit/predict", json=retrofit_body, headers=AUTH)
    assert response.status_code == 200, response.text
    assert set(response.json()["outputs"]) == set(RETROFIT_TARGETS)

    pv_body = {
        "average_monthly_consumption_before": 1500,
        "average_electricity_price": 0.3,
        "installation_cost": 5000,
        "current_inverter_set_power": 0,
        "planned_inverter_set_power": 2,
        "region": "Riga",
    }
    response = client.post("/api/v1/pv/predict", json=pv_body, headers=AUTH)
    assert response.status_code == 200, response.text
    payload = response.json()
    assert set(payload["outputs"]) == set(PV_TARGETS)
    assert payload["imputed_fields"] == ["average_energy_generated"]

    unauthorized = [
        ("GET", "/api/v1/models", None),
        ("POST", "/api/v1/models/retrofit/deploy", {"checkpoint_path": "x"}),
        ("POST", "/api/v1/retrofit/predict", retrofit_body),
        ("POST", "/api/v1/pv/predict", pv_body),
        ("GET", "/api/v1/retrofit/report?run=zzz", None),
        ("POST", "/api/v1/runs", {"config": {}, "steps": ["Ingestion"]}),
        ("GET", "/api/v1/runs/zzz", None),
        ("GET", "/api/v1/runs/zzz/artifacts/x.csv", None),
    ]
    for method, url, body in unauthorized:
        bare = client.request(method, url, json=body)
        assert bare.status_code == 401, (method, url)
    report(7, "example bodies return the exact Table-2 target sets; all routes 401 without a key")


# --------------------------------------------------------------------------
# 8. Ingestion artifact set and training dependency
# --------------------------------------------------------------------------


def test_criterion_8_ingestion_artifacts(fixture_dir, tmp_path):
    csv_path = tmp_path / "retrofit.csv"
    csv_path.write_text(retrofit_csv(), encoding="utf-8")
    out = tmp_path / "ingest"
    run_ingestion(IngestConfig(source=str(csv_path), schema=RETROFIT_SCHEMA), out)
    produced = sorted(p.name for p in out.iterdir())
    assert produced == ["ingest_meta.json", "scalers.json", "test.csv", "train.csv"]

    orchestrator = Orchestrator(ArtifactStore(tmp_path / "store"))
    config = validate_run_config(classifier_raw_config(fixture_dir))
    with pytest.raises(MissingArtifactError) as err:
        orchestrator.launch(config, ["Training"])
    assert err.value.dependency == "train-data"
    report(8, "exactly train/test/scalers artifacts plus metadata; Training alone -> MissingArtifact")


# --------------------------------------------------------------------------
# 9. Checkpoint integrity
# --------------------------------------------------------------------------


def test_criterion_9_checkpoint_integrity(pipeline_env, tmp_path):
    config = MlpConfig(input_dim=4, layer_sizes=(12, 8), output_dim=3, output_head="sigmoid")
    model = init_model(config, seed=99)
    save_checkpoint(model, {"task": "Classifier"}, tmp_path / "ckpt")
    restored = load_checkpoint(tmp_path / "ckpt")
    batch = SplitMix64(5).next_floats(32).reshape(8, 4)
    assert np.array_equal(forward(model, batch), forward(restored.model, batch))

    blob = (tmp_path / "ckpt" / "weights.bin").read_bytes()
    (tmp_path / "ckpt" / "weights.bin").write_bytes(blob[:-40])
    with pytest.raises(CorruptWeightsError):
        load_checkpoint(tmp_path / "ckpt")

    regressor_checkpoint = (
        pipeline_env.store.run_dir(pipeline_env.regressor_run) / "train" / "checkpoint"
    )
    with pytest.raises(TaskMismatchError):
        pipeline_env.store.deploy("retrofit", regressor_checkpoint)
    report(9, "bitwise round-trip; truncated blob rejected; task-mismatched deploy rejected")
