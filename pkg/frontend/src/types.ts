// Shapes mirrored from the backend API contracts.

export const RETROFIT_TARGETS = [
  "carrying_out_construction_works",
  "reconstruction_of_engineering_systems",
  "heat_installation",
  "water_heating_system",
] as const;

export const PV_TARGETS = [
  "electricity_produced",
  "primary_energy_consumption_after",
  "reduction_of_primary_energy",
  "co2_emissions_reduction",
  "expected_annual_self_consumption",
  "annual_financial_savings",
  "payback_period",
] as const;

export const ENERGY_CLASSES = ["A", "B", "C", "D", "E", "F", "G"] as const;

export interface PredictionResponse {
  prediction_id: string;
  service: "retrofit" | "pv";
  model_version: string;
  inputs: Record<string, unknown>;
  outputs: Record<string, number | boolean>;
  probabilities: Record<string, number> | null;
  imputed_fields: string[];
  timestamp: string;
}

export interface StepStatus {
  status: "Queued" | "Running" | "Succeeded" | "Failed";
  artifacts: string[];
  started_at: string | null;
  finished_at: string | null;
  error: { code: string; message: string } | null;
}

export interface TrialTiming {
  number: number;
  state: string;
  started_at: string;
  finished_at: string;
  duration_s: number;
}

export interface RunRecord {
  run_id: string;
  requested_steps: string[];
  status: "Queued" | "Running" | "Succeeded" | "Failed";
  steps: Record<string, StepStatus>;
  created_at: string;
  started_at: string | null;
  finished_at: string | null;
  error: { code: string; message: string } | null;
  trials: TrialTiming[];
}

export interface StudyTrial {
  number: number;
  state: string;
  params: {
    batch_size: number;
    l_rate: number;
    n_layers: number;
    layer_sizes: number[];
  };
  intermediate_values: number[];
  objective: number | null;
}

export interface Study {
  best_trial_number: number | null;
  trials: StudyTrial[];
}

export interface ModelVersion {
  service: string;
  version: string;
  path: string;
  deployed_at: string;
  objective: number | null;
  active: boolean;
}

export type Registry = Record<string, { active: string | null; versions: ModelVersion[] }>;

export const TERMINAL_STATUSES = new Set(["Succeeded", "Failed"]);
