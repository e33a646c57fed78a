import { describe, expect, it } from "vitest";

import {
  canSubmit,
  initialState,
  reset,
  setField,
  submitFailed,
  submitStarted,
  submitSucceeded,
} from "../src/state.js";
import { emptyRetrofitValues, validateRetrofit } from "../src/validate.js";
import type { PredictionResponse } from "../src/types.js";

const RESPONSE: PredictionResponse = {
  prediction_id: "abc",
  service: "retrofit",
  model_version: "v1",
  inputs: {},
  outputs: { heat_installation: true },
  probabilities: { heat_installation: 0.9 },
  imputed_fields: [],
  timestamp: "2024-01-01T00:00:00Z",
};

describe("form state", () => {
  it("reset after arbitrary edits restores a state deep-equal to initial", () => {
    const pristine = emptyRetrofitValues();
    const state = initialState(pristine);
    setField(state, "building_total_area", "500");
    setField(state, "initial_energy_class", "E");
    submitStarted(state);
    submitSucceeded(state, RESPONSE);
    submitFailed(state, { message: "boom", isServerFault: true });
    reset(state, emptyRetrofitValues());
    expect(state).toEqual(initialState(emptyRetrofitValues()));
  });

  it("a failed request never loses field values", () => {
    const state = initialState(emptyRetrofitValues());
    setField(state, "building_total_area", "500");
    setField(state, "above_ground_floors", "2");
    submitStarted(state);
    submitFailed(state, { field: "building_total_area", message: "out of range", isServerFault: false });
    expect(state.values.building_total_area).toBe("500");
    expect(state.values.above_ground_floors).toBe("2");
    expect(state.errors.building_total_area).toBe("out of range");
    expect(state.inFlight).toBe(false);
  });

  it("server faults land in the banner, not on a field", () => {
    const state = initialState(emptyRetrofitValues());
    submitStarted(state);
    submitFailed(state, { field: "whatever", message: "backend down", isServerFault: true });
    expect(state.banner).toBe("backend down");
    expect(state.errors).toEqual({});
  });

  it("cannot submit while invalid or in flight", () => {
    const state = initialState(emptyRetrofitValues());
    expect(canSubmit(state, validateRetrofit)).toBe(false);
    setField(state, "building_total_area", "500");
    setField(state, "above_ground_floors", "2");
    setField(state, "energy_consumption_before", "30");
    setField(state, "initial_energy_class", "E");
    setField(state, "energy_class_after", "B");
    expect(canSubmit(state, validateRetrofit)).toBe(true);
    submitStarted(state);
    expect(canSubmit(state, validateRetrofit)).toBe(false);
  });

  it("editing a field clears its error and the banner", () => {
    const state = initialState(emptyRetrofitValues());
    submitFailed(state, { field: "building_total_area", message: "bad", isServerFault: false });
    submitFailed(state, { message: "boom", isServerFault: true });
    setField(state, "building_total_area", "10");
    expect(state.errors.building_total_area).toBeUndefined();
    expect(state.banner).toBeNull();
  });
});
