"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict


class RetrofitPredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    building_total_area: float
    above_ground_floors: int
    energy_consumption_before: float
    initial_energy_class: str
    energy_class_after: str


class PvPredictRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    average_electricity_price: float
    average_monthly_consumption_before: float
    installation_cost: float
    current_inverter_set_power: float
    planned_inverter_set_power: float
    region: str
    average_energy_generated: float | None = None


class PredictionResponse(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    prediction_id: str
    service: str
    model_version: str
    inputs: dict
    outputs: dict
    probabilities: dict | None = None
    imputed_fields: list[str]
    timestamp: str


class LaunchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: dict
    steps: list[str] = ["Ingestion", "Training", "Evaluation"]


class LaunchResponse(BaseModel):
    run_id: str


class DeployRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    checkpoint_path: str


class ApiError(BaseModel):
    code: str
    message: str
    field: str | None = None
