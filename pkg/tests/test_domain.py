import dataclasses

import pytest

from enerfit.domain import (
    ENERGY_CLASS_LABELS,
    EnergyClass,
    MissingFieldError,
    OutOfRangeError,
    PvTargets,
    RetrofitTargets,
    UnknownClassError,
    UnknownFieldError,
    parse_energy_class,
    validate_pv_features,
    validate_retrofit_features,
)

RETROFIT_EXAMPLE = {
    "building_total_area": 500,
    "above_ground_floors": 2,
    "energy_consumption_before": 30,
    "initial_energy_class": "E",
    "energy_class_after": "B",
}

PV_EXAMPLE = {
    "average_monthly_consumption_before": 1500,
    "average_electricity_price": 0.3,
    "installation_cost": 5000,
    "current_inverter_set_power": 0,
    "planned_inverter_set_power": 2,
    "region": "Riga",
}


class TestParseEnergyClass:
    @pytest.mark.parametrize(
        "text,ordinal",
        [("E", 5), ("B", 2), ("a", 1), (" g ", 7), ("A", 1)],
    )
    def test_examples(self, text, ordinal):
        assert parse_energy_class(text).ordinal == ordinal

    def test_unknown_label(self):
        with pytest.raises(UnknownClassError):
            parse_energy_class("Z")
        with pytest.raises(UnknownClassError):
            parse_energy_class("")

    def test_label_ordinal_bijection(self):
        for i, label in enumerate(ENERGY_CLASS_LABELS, start=1):
            cls = parse_energy_class(label)
            assert cls.label == label
            assert cls.ordinal == i
            assert EnergyClass.from_ordinal(i) == cls
        assert len({parse_energy_class(lb).ordinal for lb in ENERGY_CLASS_LABELS}) == 7

    def test_ordinal_outside_range(self):
        with pytest.raises(UnknownClassError):
            EnergyClass.from_ordinal(0)
        with pytest.raises(UnknownClassError):
            EnergyClass.from_ordinal(8)


class TestValidateRetrofitFeatures:
    def test_paper_example(self):
        features = validate_retrofit_features(dict(RETROFIT_EXAMPLE))
        assert features.building_total_area == 500.0
        assert features.above_ground_floors == 2
        assert features.initial_energy_class.ordinal == 5
        assert features.energy_class_after.ordinal == 2

    def test_negative_area(self):
        record = dict(RETROFIT_EXAMPLE, building_total_area=-1)
        with pytest.raises(OutOfRangeError) as err:
            validate_retrofit_features(record)
        assert err.value.field == "building_total_area"

    def test_zero_floors(self):
        record = dict(RETROFIT_EXAMPLE, above_ground_floors=0)
        with pytest.raises(OutOfRangeError) as err:
            validate_retrofit_features(record)
        assert err.value.field == "above_ground_floors"

    def test_missing_field_names_the_field(self):
        record = dict(RETROFIT_EXAMPLE)
        del record["energy_consumption_before"]
        with pytest.raises(MissingFieldError) as err:
            validate_retrofit_features(record)
        assert err.value.field == "energy_consumption_before"

    def test_unknown_key_rejected(self):
        record = dict(RETROFIT_EXAMPLE, roof_area=10)
        with pytest.raises(UnknownFieldError):
            validate_retrofit_features(record)

    def test_unknown_class_propagates(self):
        record = dict(RETROFIT_EXAMPLE, initial_energy_class="Z")
        with pytest.raises(UnknownClassError):
            validate_retrofit_features(record)

    @pytest.mark.parametrize("value", [float("nan"), float("inf")])
    def test_non_finite_rejected(self, value):
        record = dict(RETROFIT_EXAMPLE, building_total_area=value)
        with pytest.raises(OutOfRangeError):
            validate_retrofit_features(record)


class TestValidatePvFeatures:
    def test_paper_example_with_blank_generation(self):
        features = validate_pv_features(dict(PV_EXAMPLE))
        assert features.generation_missing
        assert features.average_energy_generated is None
        assert features.region == "Riga"
        assert features.current_inverter_set_power == 0.0

    def test_generation_present_clears_flag(self):
        features = validate_pv_features(dict(PV_EXAMPLE, average_energy_generated=2400))
        assert not features.generation_missing
        assert features.average_energy_generated == 2400.0

    def test_negative_price(self):
        with pytest.raises(OutOfRangeError) as err:
            validate_pv_features(dict(PV_EXAMPLE, average_electricity_price=-0.3))
        assert err.value.field == "average_electricity_price"

    def test_missing_required_field(self):
        record = dict(PV_EXAMPLE)
        del record["region"]
        with pytest.raises(MissingFieldError) as err:
            validate_pv_features(record)
        assert err.value.field == "region"

    def test_unknown_key_rejected(self):
        with pytest.raises(UnknownFieldError):
            validate_pv_features(dict(PV_EXAMPLE, tilt=30))


def test_target_field_order_is_stable():
    retrofit = [f.name for f in dataclasses.fields(RetrofitTargets)]
    assert retrofit == [
        "carrying_out_construction_works",
        "reconstruction_of_engineering_systems",
        "heat_installation",
        "water_heating_system",
    ]
    pv = [f.name for f in dataclasses.fields(PvTargets)]
    assert pv == [
        "electricity_produced",
        "primary_energy_consumption_after",
        "reduction_of_primary_energy",
        "co2_emissions_reduction",
        "expected_annual_self_consumption",
        "annual_financial_savings",
        "payback_period",
    ]
