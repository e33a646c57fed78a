// Client-side field rules. These duplicate the backend's validators so the
// CALCULATE button can stay disabled before a request is ever sent.

import { ENERGY_CLASSES } from "./types.js";

export interface RetrofitValues extends Record<string, string> {
  building_total_area: string;
  above_ground_floors: string;
  energy_consumption_before: string;
  initial_energy_class: string;
  energy_class_after: string;
}

export interface PvValues extends Record<string, string> {
  average_electricity_price: string;
  average_monthly_consumption_before: string;
  installation_cost: string;
  current_inverter_set_power: string;
  planned_inverter_set_power: string;
  average_energy_generated: string;
  region: string;
}

export type FieldErrors = Record<string, string>;

export function emptyRetrofitValues(): RetrofitValues {
  return {
    building_total_area: "",
    above_ground_floors: "",
    energy_consumption_before: "",
    initial_energy_class: "",
    energy_class_after: "",
  };
}

export function emptyPvValues(): PvValues {
  return {
    average_electricity_price: "",
    average_monthly_consumption_before: "",
    installation_cost: "",
    current_inverter_set_power: "",
    planned_inverter_set_power: "",
    average_energy_generated: "",
    region: "",
  };
}

function parseNumber(raw: string): number | null {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : null;
}

function positive(values: Record<string, string>, field: string, errors: FieldErrors, allowZero = false): number | null {
  const raw = values[field] ?? "";
  if (raw.trim() === "") {
    errors[field] = "required";
    return null;
  }
  const value = parseNumber(raw);
  if (value === null) {
    errors[field] = "must be a number";
    return null;
  }
  if (value < 0 || (value === 0 && !allowZero)) {
    errors[field] = allowZero ? "must be ≥ 0" : "must be > 0";
    return null;
  }
  return value;
}

function energyClass(values: Record<string, string>, field: string, errors: FieldErrors): string | null {
  const raw = (values[field] ?? "").trim().toUpperCase();
  if (raw === "") {
    errors[field] = "required";
    return null;
  }
  if (!(ENERGY_CLASSES as readonly string[]).includes(raw)) {
    errors[field] = "must be one of A–G";
    return null;
  }
  return raw;
}

export interface Validated<P> {
  payload: P | null;
  errors: FieldErrors;
}

export function validateRetrofit(values: RetrofitValues): Validated<Record<string, unknown>> {
  const errors: FieldErrors = {};
  const area = positive(values, "building_total_area", errors);
  const consumption = positive(values, "energy_consumption_before", errors);
  const initial = energyClass(values, "initial_energy_class", errors);
  const after = energyClass(values, "energy_class_after", errors);
  let floors: number | null = null;
  const floorsRaw = values.above_ground_floors.trim();
  if (floorsRaw === "") {
    errors.above_ground_floors = "required";
  } else {
    const parsed = parseNumber(floorsRaw);
    if (parsed === null || !Number.isInteger(parsed)) {
      errors.above_ground_floors = "must be a whole number";
    } else if (parsed <= 0) {
      errors.above_ground_floors = "must be > 0";
    } else {
      floors = parsed;
    }
  }
  if (Object.keys(errors).length > 0) return { payload: null, errors };
  return {
    payload: {
      building_total_area: area,
      above_ground_floors: floors,
      energy_consumption_before: consumption,
      initial_energy_class: initial,
      energy_class_after: after,
    },
    errors,
  };
}

export function validatePv(values: PvValues): Validated<Record<string, unknown>> {
  const errors: FieldErrors = {};
  const price = positive(values, "average_electricity_price", errors);
  const consumption = positive(values, "average_monthly_consumption_before", errors);
  const cost = positive(values, "installation_cost", errors, true);
  const current = positive(values, "current_inverter_set_power", errors, true);
  const planned = positive(values, "planned_inverter_set_power", errors);
  const region = values.region.trim();
  if (region === "") errors.region = "required";

  // Generation is the one optional field; blank means "estimate it for me".
  let generated: number | null = null;
  const generatedRaw = values.average_energy_generated.trim();
  if (generatedRaw !== "") {
    const parsed = parseNumber(generatedRaw);
    if (parsed === null || parsed <= 0) {
      errors.average_energy_generated = "must be > 0 (or left blank)";
    } else {
      generated = parsed;
    }
  }
  if (Object.keys(errors).length > 0) return { payload: null, errors };
  const payload: Record<string, unknown> = {
    average_electricity_price: price,
    average_monthly_consumption_before: consumption,
    installation_cost: cost,
    current_inverter_set_power: current,
    planned_inverter_set_power: planned,
    region,
  };
  if (generated !== null) payload.average_energy_generated = generated;
  return { payload, errors };
}
