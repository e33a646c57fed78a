"""Data model shared by both prediction services.

Holds the retrofit and photovoltaic feature/target schemas, the fixed
energy-class ladder, and the record validators every other layer relies on.
Field names here (snake_case) are the canonical contract for CSV headers
and API payloads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import EnerfitError

ENERGY_CLASS_LABELS = ("A", "B", "C", "D", "E", "F", "G")


class UnknownClassError(EnerfitError):
    code = "UnknownClass"


class MissingFieldError(EnerfitError):
    code = "MissingField"


class OutOfRangeError(EnerfitError):
    code = "OutOfRange"


class UnknownFieldError(EnerfitError):
    code = "UnknownField"


@dataclass(frozen=True)
class EnergyClass:
    """Building efficiency rating A (best) through G (worst), ordinal 1-7."""

    label: str

    def __post_init__(self):
        if self.label not in ENERGY_CLASS_LABELS:
            raise UnknownClassError(f"unknown energy class {self.label!r}")

    @property
    def ordinal(self) -> int:
        return ENERGY_CLASS_LABELS.index(self.label) + 1

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "EnergyClass":
        if not 1 <= ordinal <= 7:
            raise UnknownClassError(f"energy class ordinal {ordinal} outside 1-7")
        return cls(ENERGY_CLASS_LABELS[ordinal - 1])


def parse_energy_class(text: str) -> EnergyClass:
    """Parse a class label, case-insensitively, ignoring surrounding whitespace."""
    if not isinstance(text, str):
        raise UnknownClassError(f"energy class must be a string, got {type(text).__name__}")
    label = text.strip().upper()
    if label not in ENERGY_CLASS_LABELS:
        raise UnknownClassError(f"unknown energy class {text!r}")
    return EnergyClass(label)


@dataclass(frozen=True)
class RetrofitFeatures:
    building_total_area: float
    above_ground_floors: int
    energy_consumption_before: float
    initial_energy_class: EnergyClass
    energy_class_after: EnergyClass


@dataclass(frozen=True)
class RetrofitTargets:
    carrying_out_construction_works: bool
    reconstruction_of_engineering_systems: bool
    heat_installation: bool
    water_heating_system: bool


@dataclass(frozen=True)
class PvFeatures:
    average_electricity_price: float
    average_monthly_consumption_before: float
    installation_cost: float
    current_inverter_set_power: float
    planned_inverter_set_power: float
    region: str
    average_energy_generated: float | None = None

    @property
    def generation_missing(self) -> bool:
        return self.average_energy_generated is None


@dataclass(frozen=True)
class PvTargets:
    electricity_produced: float
    primary_energy_consumption_after: float
    reduction_of_primary_energy: float
    co2_emissions_reduction: float
    expected_annual_self_consumption: float
    annual_financial_savings: float
    payback_period: float


RETROFIT_FEATURE_NAMES = (
    "building_total_area",
    "above_ground_floors",
    "energy_consumption_before",
    "initial_energy_class",
    "energy_class_after",
)
RETROFIT_TARGET_NAMES = (
    "carrying_out_construction_works",
    "reconstruction_of_engineering_systems",
    "heat_installation",
    "water_heating_system",
)
PV_FEATURE_NAMES = (
    "average_electricity_price",
    "average_monthly_consumption_before",
    "installation_cost",
    "current_inverter_set_power",
    "planned_inverter_set_power",
    "average_energy_generated",
    "region",
)
PV_TARGET_NAMES = (
    "electricity_produced",
    "primary_energy_consumption_after",
    "reduction_of_primary_energy",
    "co2_emissions_reduction",
    "expected_annual_self_consumption",
    "annual_financial_savings",
    "payback_period",
)


class ColumnKind(str, Enum):
    CONTINUOUS = "continuous"
    ORDINAL_CLASS = "ordinal-class"
    CATEGORICAL = "categorical"
    BOOLEAN = "boolean"


class Task(str, Enum):
    CLASSIFIER = "Classifier"
    REGRESSOR = "Regressor"


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind
    optional: bool = False


# Catalog of every column either sub-service knows about, keyed by the
# canonical snake_case name. Run configs may only reference these.
COLUMN_CATALOG: dict[str, ColumnSpec] = {}
for _name in ("building_total_area", "energy_consumption_before"):
    COLUMN_CATALOG[_name] = ColumnSpec(_name, ColumnKind.CONTINUOUS)
COLUMN_CATALOG["above_ground_floors"] = ColumnSpec("above_ground_floors", ColumnKind.CONTINUOUS)
for _name in ("initial_energy_class", "energy_class_after"):
    COLUMN_CATALOG[_name] = ColumnSpec(_name, ColumnKind.ORDINAL_CLASS)
for _name in RETROFIT_TARGET_NAMES:
    COLUMN_CATALOG[_name] = ColumnSpec(_name, ColumnKind.BOOLEAN)
for _name in (
    "average_electricity_price",
    "average_monthly_consumption_before",
    "installation_cost",
    "current_inverter_set_power",
    "planned_inverter_set_power",
):
    COLUMN_CATALOG[_name] = ColumnSpec(_name, ColumnKind.CONTINUOUS)
COLUMN_CATALOG["average_energy_generated"] = ColumnSpec(
    "average_energy_generated", ColumnKind.CONTINUOUS, optional=True
)
COLUMN_CATALOG["region"] = ColumnSpec("region", ColumnKind.CATEGORICAL)
for _name in PV_TARGET_NAMES:
    COLUMN_CATALOG[_name] = ColumnSpec(_name, ColumnKind.CONTINUOUS)


@dataclass(frozen=True)
class DatasetSchema:
    """Ordered feature/target column descriptors plus the task they train."""

    feature_cols: tuple[ColumnSpec, ...]
    target_cols: tuple[ColumnSpec, ...]
    task: Task

    def __post_init__(self):
        names = [c.name for c in self.feature_cols] + [c.name for c in self.target_cols]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique across features and targets")
        if self.task is Task.CLASSIFIER:
            bad = [c.name for c in self.target_cols if c.kind is not ColumnKind.BOOLEAN]
            if bad:
                raise ValueError(f"classifier targets must be boolean, got {bad}")
        else:
            bad = [c.name for c in self.target_cols if c.kind is not ColumnKind.CONTINUOUS]
            if bad:
                raise ValueError(f"regressor targets must be continuous, got {bad}")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.feature_cols)

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.target_cols)


RETROFIT_SCHEMA = DatasetSchema(
    feature_cols=tuple(COLUMN_CATALOG[n] for n in RETROFIT_FEATURE_NAMES),
    target_cols=tuple(COLUMN_CATALOG[n] for n in RETROFIT_TARGET_NAMES),
    task=Task.CLASSIFIER,
)
PV_SCHEMA = DatasetSchema(
    feature_cols=tuple(COLUMN_CATALOG[n] for n in PV_FEATURE_NAMES),
    target_cols=tuple(COLUMN_CATALOG[n] for n in PV_TARGET_NAMES),
    task=Task.REGRESSOR,
)


def _require(candidate: dict, name: str):
    if name not in candidate or candidate[name] is None or candidate[name] == "":
        raise MissingFieldError(f"missing required field {name!r}", field=name)
    return candidate[name]


def _reject_unknown(candidate: dict, allowed: tuple[str, ...]) -> None:
    for key in candidate:
        if key not in allowed:
            raise UnknownFieldError(f"unknown field {key!r}", field=key)


def _positive_number(value, name: str, allow_zero: bool = False) -> float:
    try:
        num = float(value)
    except (TypeError, ValueError):
        raise OutOfRangeError(f"{name} must be numeric, got {value!r}", field=name)
    if not math.isfinite(num):
        raise OutOfRangeError(f"{name} must be finite", field=name)
    if num < 0 or (num == 0 and not allow_zero):
        raise OutOfRangeError(f"{name} must be {'>= 0' if allow_zero else '> 0'}, got {num}", field=name)
    return num


def validate_retrofit_features(candidate: dict) -> RetrofitFeatures:
    """Turn a raw key->value record into typed retrofit features.

    Unknown keys are rejected so client typos fail loudly instead of being
    silently dropped.
    """
    _reject_unknown(candidate, RETROFIT_FEATURE_NAMES)
    area = _positive_number(_require(candidate, "building_total_area"), "building_total_area")
    floors_raw = _require(candidate, "above_ground_floors")
    try:
        floors = int(floors_raw)
    except (TypeError, ValueError):
        raise OutOfRangeError(
            f"above_ground_floors must be an integer, got {floors_raw!r}",
            field="above_ground_floors",
        )
    if isinstance(floors_raw, float) and floors_raw != floors:
        raise OutOfRangeError("above_ground_floors must be a whole number", field="above_ground_floors")
    if floors <= 0:
        raise OutOfRangeError(f"above_ground_floors must be > 0, got {floors}", field="above_ground_floors")
    consumption = _positive_number(
        _require(candidate, "energy_consumption_before"), "energy_consumption_before"
    )
    initial = parse_energy_class(_require(candidate, "initial_energy_class"))
    after = parse_energy_class(_require(candidate, "energy_class_after"))
    return RetrofitFeatures(
        building_total_area=area,
        above_ground_floors=floors,
        energy_consumption_before=consumption,
        initial_energy_class=initial,
        energy_class_after=after,
    )


def validate_pv_features(candidate: dict) -> PvFeatures:
    """Turn a raw key->value record into typed PV features.

    An absent average_energy_generated is legal; the caller can see it via
    PvFeatures.generation_missing and impute downstream.
    """
    _reject_unknown(candidate, PV_FEATURE_NAMES)
    price = _positive_number(
        _require(candidate, "average_electricity_price"), "average_electricity_price"
    )
    consumption = _positive_number(
        _require(candidate, "average_monthly_consumption_before"),
        "average_monthly_consumption_before",
    )
    cost = _positive_number(
        _require(candidate, "installation_cost"), "installation_cost", allow_zero=True
    )
    current_power = _positive_number(
        _require(candidate, "current_inverter_set_power"),
        "current_inverter_set_power",
        allow_zero=True,
    )
    planned_power = _positive_number(
        _require(candidate, "planned_inverter_set_power"), "planned_inverter_set_power"
    )
    generated_raw = candidate.get("average_energy_generated")
    if generated_raw is None or generated_raw == "":
        generated = None
    else:
        generated = _positive_number(generated_raw, "average_energy_generated")
    region = _require(candidate, "region")
    if not isinstance(region, str) or not region.strip():
        raise OutOfRangeError("region must be a non-empty string", field="region")
    return PvFeatures(
        average_electricity_price=price,
        average_monthly_consumption_before=consumption,
        installation_cost=cost,
        current_inverter_set_power=current_power,
        planned_inverter_set_power=planned_power,
        region=region.strip(),
        average_energy_generated=generated,
    )


def retrofit_feature_row(features: RetrofitFeatures) -> dict:
    """Canonical column->value mapping for scaling/serialization."""
    return {
        "building_total_area": features.building_total_area,
        "above_ground_floors": float(features.above_ground_floors),
        "energy_consumption_before": features.energy_consumption_before,
        "initial_energy_class": features.initial_energy_class.label,
        "energy_class_after": features.energy_class_after.label,
    }


def pv_feature_row(features: PvFeatures) -> dict:
    row = {
        "average_electricity_price": features.average_electricity_price,
        "average_monthly_consumption_before": features.average_monthly_consumption_before,
        "installation_cost": features.installation_cost,
        "current_inverter_set_power": features.current_inverter_set_power,
        "planned_inverter_set_power": features.planned_inverter_set_power,
        "average_energy_generated": features.average_energy_generated,
        "region": features.region,
    }
    return row
