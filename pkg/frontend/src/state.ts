// Form state container: plain data plus pure transition helpers, so the
// RESET invariant (deep-equal to pristine) is trivially testable.

import type { PredictionResponse } from "./types.js";
import type { FieldErrors } from "./validate.js";

export interface FormState<V extends Record<string, string>> {
  values: V;
  errors: FieldErrors;
  inFlight: boolean;
  response: PredictionResponse | null;
  banner: string | null;
}

export function initialState<V extends Record<string, string>>(values: V): FormState<V> {
  return { values: { ...values }, errors: {}, inFlight: false, response: null, banner: null };
}

export function setField<V extends Record<string, string>>(
  state: FormState<V>,
  field: keyof V & string,
  value: string,
): void {
  state.values[field] = value as V[typeof field];
  delete state.errors[field];
  state.banner = null;
}

export function submitStarted<V extends Record<string, string>>(state: FormState<V>): void {
  state.inFlight = true;
  state.banner = null;
}

export function submitSucceeded<V extends Record<string, string>>(
  state: FormState<V>,
  response: PredictionResponse,
): void {
  state.inFlight = false;
  state.errors = {};
  state.response = response;
}

export function submitFailed<V extends Record<string, string>>(
  state: FormState<V>,
  failure: { field?: string; message: string; isServerFault: boolean },
): void {
  // Field values stay untouched: a failed request must never lose edits.
  state.inFlight = false;
  if (failure.isServerFault || !failure.field) {
    state.banner = failure.message;
  } else {
    state.errors[failure.field] = failure.message;
  }
}

export function reset<V extends Record<string, string>>(state: FormState<V>, pristine: V): void {
  state.values = { ...pristine };
  state.errors = {};
  state.inFlight = false;
  state.response = null;
  state.banner = null;
}

export function canSubmit<V extends Record<string, string>>(
  state: FormState<V>,
  validate: (values: V) => { payload: unknown | null },
): boolean {
  if (state.inFlight) return false;
  return validate(state.values).payload !== null;
}
