"""Synthetic building datasets for demos, tests, and the acceptance suite.

The retrofit table is linearly separable per target with a margin around
every decision threshold, so a small MLP can drive the validation loss way
down; a known number of rows carry missing targets or unparseable cells to
exercise the cleaning step. The PV table maps features to smooth synthetic
savings curves.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .domain import (
    ENERGY_CLASS_LABELS,
    PV_FEATURE_NAMES,
    PV_TARGET_NAMES,
    RETROFIT_FEATURE_NAMES,
    RETROFIT_TARGET_NAMES,
)
from .rng import SplitMix64

REGIONS = ("Kurzeme", "Latgale", "Riga", "Vidzeme", "Zemgale")
_REGION_FACTOR = {"Kurzeme": 0.92, "Latgale": 0.96, "Riga": 1.0, "Vidzeme": 1.04, "Zemgale": 1.08}


def _gapped_uniform(rng: SplitMix64, low: float, high: float, threshold: float, gap: float) -> float:
    """Uniform draw from [low, high] avoiding (threshold-gap, threshold+gap)."""
    below = (threshold - gap) - low
    above = high - (threshold + gap)
    if rng.next_float() * (below + above) < below:
        return rng.uniform(low, threshold - gap)
    return rng.uniform(threshold + gap, high)


def retrofit_rows(n: int, seed: int) -> list[dict]:
    """Typed rows with rule-based targets separated by clear margins."""
    rng = SplitMix64(seed)
    rows: list[dict] = []
    for _ in range(n):
        area = round(_gapped_uniform(rng, 80.0, 2000.0, 800.0, 80.0), 1)
        floors = rng.randint(1, 9)
        consumption = round(_gapped_uniform(rng, 20.0, 300.0, 150.0, 15.0), 1)
        initial_ord = rng.randint(1, 7)
        after_ord = rng.randint(1, initial_ord)
        improvement = initial_ord - after_ord
        rows.append(
            {
                "building_total_area": area,
                "above_ground_floors": float(floors),
                "energy_consumption_before": consumption,
                "initial_energy_class": ENERGY_CLASS_LABELS[initial_ord - 1],
                "energy_class_after": ENERGY_CLASS_LABELS[after_ord - 1],
                "carrying_out_construction_works": improvement >= 2,
                "reconstruction_of_engineering_systems": consumption > 150.0,
                "heat_installation": area > 800.0,
                "water_heating_system": floors >= 4,
            }
        )
    return rows


def _rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = []
        for name in columns:
            value = row.get(name)
            if value is None:
                cells.append("")
            elif isinstance(value, bool):
                cells.append("1" if value else "0")
            else:
                cells.append(str(value))
        writer.writerow(cells)
    return buffer.getvalue()


def retrofit_csv(n: int = 200, seed: int = 42, missing_targets: int = 6, bad_numeric: int = 2) -> str:
    """CSV text with ``missing_targets`` blank target cells and
    ``bad_numeric`` unparseable area cells spread over distinct rows."""
    rows = [dict(r) for r in retrofit_rows(n, seed)]
    rng = SplitMix64(seed + 1)
    damaged = min(missing_targets + bad_numeric, n)
    victims = list(range(n))
    rng.shuffle(victims)
    victims = victims[:damaged]
    for i, row_idx in enumerate(victims[:missing_targets]):
        target = RETROFIT_TARGET_NAMES[i % len(RETROFIT_TARGET_NAMES)]
        rows[row_idx][target] = None
    for row_idx in victims[missing_targets:]:
        rows[row_idx]["building_total_area"] = "not-a-number"
    columns = list(RETROFIT_FEATURE_NAMES) + list(RETROFIT_TARGET_NAMES)
    return _rows_to_csv(rows, columns)


def pv_rows(n: int, seed: int) -> list[dict]:
    rng = SplitMix64(seed)
    rows: list[dict] = []
    for _ in range(n):
        price = round(rng.uniform(0.10, 0.50), 3)
        consumption = round(rng.uniform(100.0, 3000.0), 1)
        cost = round(rng.uniform(1000.0, 20000.0), 0)
        current = round(rng.uniform(0.0, 10.0), 1)
        planned = round(rng.uniform(1.0, 15.0), 1)
        region = rng.choice(REGIONS)
        factor = _REGION_FACTOR[region]
        generated = round(planned * 1100.0 * (0.9 + 0.2 * rng.next_float()), 1)
        produced = round(planned * 1150.0 * factor, 1)
        annual_use = consumption * 12.0
        self_consumption = round(0.6 * min(produced, annual_use), 1)
        savings = round(price * self_consumption + 0.05 * price * (produced - self_consumption), 2)
        rows.append(
            {
                "average_electricity_price": price,
                "average_monthly_consumption_before": consumption,
                "installation_cost": cost,
                "current_inverter_set_power": current,
                "planned_inverter_set_power": planned,
                "average_energy_generated": generated,
                "region": region,
                "electricity_produced": produced,
                "primary_energy_consumption_after": round(max(annual_use - 0.8 * produced, 0.0), 1),
                "reduction_of_primary_energy": round(0.9 * produced, 1),
                "co2_emissions_reduction": round(0.109 * produced, 2),
                "expected_annual_self_consumption": self_consumption,
                "annual_financial_savings": savings,
                "payback_period": round(min(max(cost / max(savings, 50.0), 0.3), 30.0), 2),
            }
        )
    return rows


def pv_csv(n: int = 200, seed: int = 123, blank_generation: int = 20) -> str:
    """CSV text with ``blank_generation`` rows missing the optional
    generation value, exercising mean imputation."""
    rows = [dict(r) for r in pv_rows(n, seed)]
    rng = SplitMix64(seed + 1)
    victims = list(range(n))
    rng.shuffle(victims)
    for row_idx in victims[: min(blank_generation, n)]:
        rows[row_idx]["average_energy_generated"] = None
    columns = list(PV_FEATURE_NAMES) + list(PV_TARGET_NAMES)
    return _rows_to_csv(rows, columns)


_CLASSIFIER_CONFIG = """\
# Retrofit recommendation training run (dashboard-schema keys).
input_filepath: retrofit.csv
feature_cols:
  - building_total_area
  - above_ground_floors
  - energy_consumption_before
  - initial_energy_class
  - energy_class_after
target_cols:
  - carrying_out_construction_works
  - reconstruction_of_engineering_systems
  - heat_installation
  - water_heating_system
mlClass: Classifier
activation: ReLU
optimizer_name: Adam
batch_size: [256, 512, 1024]
l_rate: [0.0001, 0.001]
layer_sizes: [128, 256, 512, 1024, 2048]
n_layers: [2, 6]
max_epochs: 10
n_trials: 3
num_workers: 2
seed: 42
"""

_REGRESSOR_CONFIG = """\
# PV installation estimation training run (smaller search space for speed).
input_filepath: pv.csv
feature_cols:
  - average_electricity_price
  - average_monthly_consumption_before
  - installation_cost
  - current_inverter_set_power
  - planned_inverter_set_power
  - average_energy_generated
  - region
target_cols:
  - electricity_produced
  - primary_energy_consumption_after
  - reduction_of_primary_energy
  - co2_emissions_reduction
  - expected_annual_self_consumption
  - annual_financial_savings
  - payback_period
mlClass: Regressor
batch_size: [32]
l_rate: [0.002, 0.008]
layer_sizes: [32, 64]
n_layers: [2, 3]
max_epochs: 25
n_trials: 2
seed: 7
"""


def write_fixtures(directory: Path | str) -> list[Path]:
    """Write the bundled demo datasets and run configs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    outputs = {
        "retrofit.csv": retrofit_csv(),
        "pv.csv": pv_csv(),
        "classifier.yaml": _CLASSIFIER_CONFIG,
        "regressor.yaml": _REGRESSOR_CONFIG,
    }
    written = []
    for name, text in outputs.items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
