import json
import re

import pytest

from enerfit.orchestrate import (
    ALL_STEPS,
    ArtifactStore,
    BadStepsError,
    InconsistentError,
    MissingArtifactError,
    MissingFieldError,
    NotFoundError,
    Orchestrator,
    TaskMismatchError,
    UnknownFieldError,
    new_ulid,
    validate_run_config,
)
from enerfit.orchestrate.config import BadValueError

from .conftest import classifier_raw_config, fast_classifier_config, pv_raw_config


class TestValidateRunConfig:
    def test_dashboard_schema_config_is_valid(self, fixture_dir):
        config = validate_run_config(classifier_raw_config(fixture_dir))
        assert config.seed == 42
        assert config.batch_size == (256, 512, 1024)
        assert config.l_rate == (1e-4, 1e-3)
        assert config.layer_sizes == (128, 256, 512, 1024, 2048)
        assert config.n_layers == (2, 6)
        assert config.max_epochs == 10
        assert config.n_trials == 3
        assert config.num_workers == 2
        assert config.ml_path.endswith("best_MLPClassifier.ckpt")

    def test_omitted_seed_defaults_to_42(self, fixture_dir):
        raw = classifier_raw_config(fixture_dir)
        del raw["seed"]
        assert validate_run_config(raw).seed == 42

    def test_regressor_with_boolean_targets_is_inconsistent(self, fixture_dir):
        raw = classifier_raw_config(fixture_dir, mlClass="Regressor")
        with pytest.raises(InconsistentError):
            validate_run_config(raw)

    def test_classifier_with_continuous_targets_is_inconsistent(self, fixture_dir):
        raw = pv_raw_config(fixture_dir, mlClass="Classifier")
        with pytest.raises(InconsistentError):
            validate_run_config(raw)

    def test_unknown_key_rejected(self, fixture_dir):
        raw = classifier_raw_config(fixture_dir, dropout=0.5)
        with pytest.raises(UnknownFieldError) as err:
            validate_run_config(raw)
        assert err.value.field == "dropout"

    def test_missing_required_key(self, fixture_dir):
        raw = classifier_raw_config(fixture_dir)
        del raw["target_cols"]
        with pytest.raises(MissingFieldError):
            validate_run_config(raw)

    def test_unknown_column_rejected(self, fixture_dir):
        raw = classifier_raw_config(fixture_dir, feature_cols=["building_total_area", "roof_slope"])
        with pytest.raises(BadValueError):
            validate_run_config(raw)

    @pytest.mark.parametrize(
        "key,value",
        [
            ("activation", "tanh"),
            ("optimizer_name", "SGD"),
            ("l_rate", [0.0, 0.1]),
            ("n_layers", [4, 2]),
            ("split_ratio", 1.2),
            ("max_epochs", 0),
            ("mlClass", "Cluster"),
        ],
    )
    def test_bad_values(self, fixture_dir, key, value):
        raw = classifier_raw_config(fixture_dir, **{key: value})
        with pytest.raises(BadValueError):
            validate_run_config(raw)

    def test_round_trip_through_dict(self, fixture_dir):
        config = validate_run_config(classifier_raw_config(fixture_dir))
        assert validate_run_config(config.to_dict()) == config


class TestUlid:
    def test_shape_and_uniqueness(self):
        ids = {new_ulid() for _ in range(200)}
        assert len(ids) == 200
        for value in ids:
            assert re.fullmatch(r"[0-9A-HJKMNP-TV-Z]{26}", value)

    def test_time_ordering(self):
        early = new_ulid(timestamp_ms=1_000_000)
        late = new_ulid(timestamp_ms=2_000_000)
        assert early < late


class TestLaunchDependencies:
    def test_training_without_ingest_artifacts(self, fixture_dir, tmp_path):
        orch = Orchestrator(ArtifactStore(tmp_path))
        config = validate_run_config(fast_classifier_config(fixture_dir))
        with pytest.raises(MissingArtifactError) as err:
            orch.launch(config, ["Training"])
        assert err.value.step == "Training"
        assert err.value.dependency == "train-data"

    def test_evaluation_without_checkpoint(self, fixture_dir, tmp_path):
        orch = Orchestrator(ArtifactStore(tmp_path))
        config = validate_run_config(fast_classifier_config(fixture_dir))
        with pytest.raises(MissingArtifactError) as err:
            orch.launch(config, ["Evaluation"])
        assert err.value.dependency == "checkpoint"

    def test_bad_steps(self, fixture_dir, tmp_path):
        orch = Orchestrator(ArtifactStore(tmp_path))
        config = validate_run_config(fast_classifier_config(fixture_dir))
        with pytest.raises(BadStepsError):
            orch.launch(config, [])
        with pytest.raises(BadStepsError):
            orch.launch(config, ["Shipping"])

    def test_unknown_run_status(self, tmp_path):
        orch = Orchestrator(ArtifactStore(tmp_path))
        with pytest.raises(NotFoundError):
            orch.run_status("01ARZ3NDEKTSV4RRFFQ69G5FAV")


class TestPipelineRuns:
    def test_full_pipeline_succeeds_with_three_artifact_sets(self, pipeline_env):
        record = pipeline_env.orchestrator.run_status(pipeline_env.classifier_run)
        assert record.status == "Succeeded"
        assert record.requested_steps == list(ALL_STEPS)
        for step in record.steps.values():
            assert step.status == "Succeeded"
            assert step.artifacts
        assert record.trials, "training must report trial timing"

    def test_run_record_persisted_and_timestamps_monotone(self, pipeline_env):
        record = pipeline_env.orchestrator.run_status(pipeline_env.classifier_run)
        assert record.created_at <= record.started_at <= record.finished_at
        on_disk = pipeline_env.store.read_run_record(pipeline_env.classifier_run)
        assert on_disk["status"] == "Succeeded"

    def test_fifo_order_of_two_launches(self, pipeline_env):
        first = pipeline_env.orchestrator.run_status(pipeline_env.classifier_run)
        second = pipeline_env.orchestrator.run_status(pipeline_env.regressor_run)
        assert first.finished_at <= second.started_at

    def test_step_reuse_via_from_run_reproduces_metrics(self, pipeline_env, fixture_dir):
        orch = pipeline_env.orchestrator
        config = validate_run_config(
            fast_classifier_config(fixture_dir, from_run=pipeline_env.classifier_run)
        )
        rerun = orch.launch(config, ["Evaluation"])
        record = orch.wait(rerun, timeout=120)
        assert record.status == "Succeeded"
        original = (
            pipeline_env.store.run_dir(pipeline_env.classifier_run) / "eval" / "metrics.json"
        ).read_bytes()
        reproduced = (pipeline_env.store.run_dir(rerun) / "eval" / "metrics.json").read_bytes()
        assert original == reproduced

    def test_failed_run_reports_step_error(self, fixture_dir, tmp_path):
        orch = Orchestrator(ArtifactStore(tmp_path))
        config = validate_run_config(
            fast_classifier_config(fixture_dir, input_filepath="http://127.0.0.1:9/gone.csv")
        )
        run_id = orch.launch(config, list(ALL_STEPS))
        record = orch.wait(run_id, timeout=60)
        assert record.status == "Failed"
        assert record.error["step"] == "Ingestion"
        assert record.steps["Ingestion"].status == "Failed"
        assert record.steps["Training"].status == "Queued"

    def test_exports_land_in_shared_storage_layout(self, pipeline_env):
        root = pipeline_env.store.root
        assert (root / "models-scalers" / "best_MLPClassifier.ckpt" / "weights.bin").is_file()
        assert (root / "models-scalers" / "MLPClassifier_scalers.json").is_file()
        assert (root / "optuna_viz" / "classifier" / "optimization_history.csv").is_file()


class TestDeploy:
    def test_deploy_and_versions(self, pipeline_env):
        store = pipeline_env.store
        registry = store.list_models()
        assert registry["retrofit"]["active"] == "v1"
        checkpoint = store.run_dir(pipeline_env.classifier_run) / "train" / "checkpoint"
        second = store.deploy("retrofit", checkpoint)
        assert second.version == "v2"
        registry = store.list_models()
        assert registry["retrofit"]["active"] == "v2"
        versions = registry["retrofit"]["versions"]
        assert [v["version"] for v in versions] == ["v1", "v2"]
        assert [v["active"] for v in versions] == [False, True]

    def test_task_mismatch_rejected(self, pipeline_env):
        checkpoint = pipeline_env.store.run_dir(pipeline_env.regressor_run) / "train" / "checkpoint"
        with pytest.raises(TaskMismatchError):
            pipeline_env.store.deploy("retrofit", checkpoint)

    def test_unknown_service(self, pipeline_env):
        checkpoint = pipeline_env.store.run_dir(pipeline_env.classifier_run) / "train" / "checkpoint"
        with pytest.raises(NotFoundError):
            pipeline_env.store.deploy("weather", checkpoint)

    def test_corrupt_checkpoint_rejected(self, pipeline_env, tmp_path):
        import shutil

        source = pipeline_env.store.run_dir(pipeline_env.classifier_run) / "train" / "checkpoint"
        broken = tmp_path / "broken"
        shutil.copytree(source, broken)
        blob = (broken / "weights.bin").read_bytes()
        (broken / "weights.bin").write_bytes(blob[:-24])
        from enerfit.neural import CorruptWeightsError

        with pytest.raises(CorruptWeightsError):
            pipeline_env.store.deploy("retrofit", broken)

    def test_checkpoint_manifest_consistency(self, pipeline_env):
        checkpoint_dir = pipeline_env.store.run_dir(pipeline_env.classifier_run) / "train" / "checkpoint"
        manifest = json.loads((checkpoint_dir / "manifest.json").read_text())
        scalers = json.loads((checkpoint_dir / "scalers.json").read_text())
        assert manifest["scalers_fingerprint"] == scalers["features"]["fitted_on"]
