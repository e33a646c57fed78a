"""Shared fixtures: synthetic datasets, fast pipeline runs, deployed models."""

from __future__ import annotations

from types import SimpleNamespace

import pytest

from enerfit.orchestrate import ALL_STEPS, ArtifactStore, Orchestrator, validate_run_config
from enerfit.serve.app import ServeSettings, create_app
from enerfit.synth import write_fixtures

API_KEY = "APIKEY-test-0123456789"
AUTH = {"Authorization": API_KEY}

RETROFIT_FEATURES = [
    "building_total_area",
    "above_ground_floors",
    "energy_consumption_before",
    "initial_energy_class",
    "energy_class_after",
]
RETROFIT_TARGETS = [
    "carrying_out_construction_works",
    "reconstruction_of_engineering_systems",
    "heat_installation",
    "water_heating_system",
]
PV_FEATURES = [
    "average_electricity_price",
    "average_monthly_consumption_before",
    "installation_cost",
    "current_inverter_set_power",
    "planned_inverter_set_power",
    "average_energy_generated",
    "region",
]
PV_TARGETS = [
    "electricity_produced",
    "primary_energy_consumption_after",
    "reduction_of_primary_energy",
    "co2_emissions_reduction",
    "expected_annual_self_consumption",
    "annual_financial_savings",
    "payback_period",
]


def classifier_raw_config(fixture_dir, **overrides) -> dict:
    raw = {
        "input_filepath": str(fixture_dir / "retrofit.csv"),
        "feature_cols": list(RETROFIT_FEATURES),
        "target_cols": list(RETROFIT_TARGETS),
        "mlClass": "Classifier",
        "seed": 42,
    }
    raw.update(overrides)
    return raw


def fast_classifier_config(fixture_dir, **overrides) -> dict:
    raw = classifier_raw_config(
        fixture_dir,
        batch_size=[32],
        l_rate=[0.003, 0.003],
        layer_sizes=[32, 64],
        n_layers=[2, 2],
        max_epochs=12,
        n_trials=1,
    )
    raw.update(overrides)
    return raw


def pv_raw_config(fixture_dir, **overrides) -> dict:
    raw = {
        "input_filepath": str(fixture_dir / "pv.csv"),
        "feature_cols": list(PV_FEATURES),
        "target_cols": list(PV_TARGETS),
        "mlClass": "Regressor",
        "batch_size": [32],
        "l_rate": [0.005, 0.005],
        "layer_sizes": [64],
        "n_layers": [2, 2],
        "max_epochs": 20,
        "n_trials": 1,
        "seed": 7,
    }
    raw.update(overrides)
    return raw


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("fixtures")
    write_fixtures(directory)
    return directory


@pytest.fixture(scope="session")
def pipeline_env(fixture_dir, tmp_path_factory):
    """One store with a finished classifier run, a finished regressor run,
    and both checkpoints deployed."""
    root = tmp_path_factory.mktemp("store")
    store = ArtifactStore(root)
    orch = Orchestrator(store)
    classifier_config = validate_run_config(fast_classifier_config(fixture_dir))
    regressor_config = validate_run_config(pv_raw_config(fixture_dir))
    classifier_run = orch.launch(classifier_config, ALL_STEPS)
    regressor_run = orch.launch(regressor_config, ALL_STEPS)
    rec_c = orch.wait(classifier_run, timeout=300)
    rec_r = orch.wait(regressor_run, timeout=300)
    assert rec_c.status == "Succeeded", rec_c.to_dict()
    assert rec_r.status == "Succeeded", rec_r.to_dict()
    retrofit_version = orch.deploy("retrofit", store.run_dir(classifier_run) / "train" / "checkpoint")
    pv_version = orch.deploy("pv", store.run_dir(regressor_run) / "train" / "checkpoint")
    return SimpleNamespace(
        store=store,
        orchestrator=orch,
        fixture_dir=fixture_dir,
        classifier_run=classifier_run,
        regressor_run=regressor_run,
        retrofit_version=retrofit_version,
        pv_version=pv_version,
    )


@pytest.fixture(scope="session")
def client(pipeline_env):
    from fastapi.testclient import TestClient

    settings = ServeSettings(
        artifact_root=pipeline_env.store.root,
        api_keys=(API_KEY,),
        auth_enabled=True,
    )
    app = create_app(settings, orchestrator=pipeline_env.orchestrator)
    with TestClient(app) as test_client:
        yield test_client
