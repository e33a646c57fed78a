// The two prediction forms. Both share one component skeleton: field rows
// with inline errors, CALCULATE disabled until the values validate, RESET
// back to pristine, a result panel, and a CSV report download.

import { ApiClient, ApiError } from "./api.js";
import { clear, el, show } from "./dom.js";
import {
  FormState,
  canSubmit,
  initialState,
  reset,
  setField,
  submitFailed,
  submitStarted,
  submitSucceeded,
} from "./state.js";
import { ENERGY_CLASSES, PV_TARGETS, RETROFIT_TARGETS, PredictionResponse } from "./types.js";
import {
  PvValues,
  RetrofitValues,
  Validated,
  emptyPvValues,
  emptyRetrofitValues,
  validatePv,
  validateRetrofit,
} from "./validate.js";

interface FieldSpec {
  name: string;
  label: string;
  kind: "number" | "text" | "energy-class";
  optional?: boolean;
}

const RETROFIT_FIELDS: FieldSpec[] = [
  { name: "building_total_area", label: "Building Total Area (m²)", kind: "number" },
  { name: "above_ground_floors", label: "Above-ground Floors", kind: "number" },
  { name: "energy_consumption_before", label: "Energy Consumption Before (kWh/m²/yr)", kind: "number" },
  { name: "initial_energy_class", label: "Initial Energy Class", kind: "energy-class" },
  { name: "energy_class_after", label: "Energy Class After Renovation", kind: "energy-class" },
];

const PV_FIELDS: FieldSpec[] = [
  { name: "average_monthly_consumption_before", label: "Average Monthly Consumption Before (kWh)", kind: "number" },
  { name: "average_electricity_price", label: "Average Electricity Price (per kWh)", kind: "number" },
  { name: "installation_cost", label: "Installation Cost of Renewable Equipment", kind: "number" },
  { name: "average_energy_generated", label: "Average Energy Generated (blank = estimate)", kind: "number", optional: true },
  { name: "current_inverter_set_power", label: "Current Inverter Set Power (kW)", kind: "number" },
  { name: "planned_inverter_set_power", label: "Planned Inverter Set Power (kW)", kind: "number" },
  { name: "region", label: "Region", kind: "text" },
];

const RETROFIT_TARGET_LABELS: Record<string, string> = {
  carrying_out_construction_works: "Carrying out construction works",
  reconstruction_of_engineering_systems: "Reconstruction of engineering systems",
  heat_installation: "Heat installation",
  water_heating_system: "Water heating system",
};

const PV_TARGET_LABELS: Record<string, string> = {
  electricity_produced: "Electricity produced by solar panels (kWh/yr)",
  primary_energy_consumption_after: "Primary energy consumption after (kWh/yr)",
  reduction_of_primary_energy: "Reduction of primary energy (kWh/yr)",
  co2_emissions_reduction: "CO2 emissions reduction (kg/yr)",
  expected_annual_self_consumption: "Expected annual self-consumption (kWh/yr)",
  annual_financial_savings: "Annual financial savings",
  payback_period: "Payback period (years)",
};

type Values = Record<string, string>;

interface FormConfig<V extends Values> {
  title: string;
  css: string;
  fields: FieldSpec[];
  pristine: () => V;
  validate: (values: V) => Validated<Record<string, unknown>>;
  submit: (api: ApiClient, payload: Record<string, unknown>) => Promise<PredictionResponse>;
  renderResults: (panel: HTMLElement, response: PredictionResponse) => void;
}

export class PredictionForm<V extends Values> {
  readonly root: HTMLElement;
  readonly state: FormState<V>;
  private inputs = new Map<string, HTMLInputElement | HTMLSelectElement>();
  private errorSpans = new Map<string, HTMLElement>();
  private calculate: HTMLButtonElement;
  private banner: HTMLElement;
  private results: HTMLElement;
  private downloadButton: HTMLButtonElement;

  constructor(
    private api: ApiClient,
    private config: FormConfig<V>,
  ) {
    this.state = initialState(config.pristine());
    const form = el("form", { class: "prediction-form", novalidate: "novalidate" });
    for (const field of config.fields) {
      const input = this.buildInput(field);
      this.inputs.set(field.name, input);
      const error = el("span", { class: "field-error", "data-error-for": field.name });
      this.errorSpans.set(field.name, error);
      form.append(
        el(
          "div",
          { class: "field", "data-field": field.name },
          el("label", { text: field.label + (field.optional ? " (optional)" : "") }),
          input,
          error,
        ),
      );
    }
    this.calculate = el("button", { type: "submit", class: "calculate", text: "CALCULATE" });
    const resetButton = el("button", { type: "button", class: "reset", text: "RESET" });
    form.append(el("div", { class: "actions" }, this.calculate, resetButton));
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    resetButton.addEventListener("click", () => {
      reset(this.state, this.config.pristine());
      this.update();
    });
    this.banner = el("div", { class: "banner hidden", role: "alert" });
    this.results = el("div", { class: "results hidden" });
    this.downloadButton = el("button", {
      type: "button",
      class: "download-report hidden",
      text: "Download report (CSV)",
    });
    this.downloadButton.addEventListener("click", () => void this.downloadReport());
    this.root = el(
      "section",
      { class: `service ${config.css}` },
      el("h2", { text: config.title }),
      form,
      this.banner,
      this.results,
      this.downloadButton,
    );
    this.update();
  }

  private buildInput(field: FieldSpec): HTMLInputElement | HTMLSelectElement {
    let input: HTMLInputElement | HTMLSelectElement;
    if (field.kind === "energy-class") {
      input = el("select", { name: field.name });
      input.append(el("option", { value: "", text: "--" }));
      for (const label of ENERGY_CLASSES) {
        input.append(el("option", { value: label, text: label }));
      }
    } else {
      input = el("input", { name: field.name, type: "text", autocomplete: "off" });
    }
    input.addEventListener("input", () => {
      setField(this.state, field.name as keyof V & string, input.value);
      this.update();
    });
    input.addEventListener("change", () => {
      setField(this.state, field.name as keyof V & string, input.value);
      this.update();
    });
    return input;
  }

  async submit(): Promise<void> {
    const { payload } = this.config.validate(this.state.values);
    if (payload === null || this.state.inFlight) return;
    submitStarted(this.state);
    this.update();
    try {
      const response = await this.config.submit(this.api, payload);
      submitSucceeded(this.state, response);
    } catch (error) {
      if (error instanceof ApiError) {
        submitFailed(this.state, {
          field: error.field,
          message: error.message,
          isServerFault: error.isServerFault,
        });
      } else {
        submitFailed(this.state, { message: String(error), isServerFault: true });
      }
    }
    this.update();
  }

  update(): void {
    for (const [name, input] of this.inputs) {
      if (input.value !== this.state.values[name]) input.value = this.state.values[name];
    }
    for (const [name, span] of this.errorSpans) {
      span.textContent = this.state.errors[name] ?? "";
    }
    this.calculate.disabled = !canSubmit(this.state, this.config.validate);
    this.banner.textContent = this.state.banner ?? "";
    show(this.banner, this.state.banner !== null);
    clear(this.results);
    if (this.state.response !== null) {
      this.config.renderResults(this.results, this.state.response);
    }
    show(this.results, this.state.response !== null);
    show(this.downloadButton, this.state.response !== null);
  }

  private async downloadReport(): Promise<void> {
    const response = this.state.response;
    if (response === null) return;
    try {
      const csv = await this.api.reportCsv(response.prediction_id);
      const blob = new Blob([csv], { type: "text/csv" });
      const anchor = el("a", {
        href: URL.createObjectURL(blob),
        download: `report_${response.prediction_id}.csv`,
      });
      anchor.click();
      URL.revokeObjectURL(anchor.href);
    } catch (error) {
      this.state.banner = error instanceof ApiError ? error.message : String(error);
      this.update();
    }
  }
}

function renderRetrofitResults(panel: HTMLElement, response: PredictionResponse): void {
  panel.append(el("h3", { text: "Recommended measures" }));
  const list = el("ul", { class: "recommendations" });
  for (const target of RETROFIT_TARGETS) {
    const recommended = Boolean(response.outputs[target]);
    const probability = response.probabilities?.[target];
    const badge = el("span", {
      class: recommended ? "verdict yes" : "verdict no",
      text: recommended ? "recommended" : "not recommended",
    });
    const item = el(
      "li",
      { class: "recommendation", "data-target": target },
      el("span", { class: "name", text: RETROFIT_TARGET_LABELS[target] ?? target }),
      badge,
    );
    if (probability !== undefined) {
      item.append(el("span", { class: "probability", text: `${(probability * 100).toFixed(1)}%` }));
    }
    list.append(item);
  }
  panel.append(list);
}

function renderPvResults(panel: HTMLElement, response: PredictionResponse): void {
  panel.append(el("h3", { text: "Estimated impact" }));
  if (response.imputed_fields.length > 0) {
    panel.append(
      el("p", { class: "imputed-note" }, el("span", { class: "badge imputed", text: "imputed" }), ` ${response.imputed_fields.join(", ")} estimated from training data`),
    );
  }
  const list = el("ul", { class: "estimates" });
  for (const target of PV_TARGETS) {
    const value = Number(response.outputs[target]);
    list.append(
      el(
        "li",
        { class: "estimate", "data-target": target },
        el("span", { class: "name", text: PV_TARGET_LABELS[target] ?? target }),
        el("span", { class: "value", text: value.toLocaleString(undefined, { maximumFractionDigits: 1 }) }),
      ),
    );
  }
  panel.append(list);
}

export function retrofitForm(api: ApiClient): PredictionForm<RetrofitValues> {
  return new PredictionForm(api, {
    title: "Building Retrofitting",
    css: "retrofit",
    fields: RETROFIT_FIELDS,
    pristine: emptyRetrofitValues,
    validate: validateRetrofit,
    submit: (client, payload) => client.predictRetrofit(payload),
    renderResults: renderRetrofitResults,
  });
}

export function pvForm(api: ApiClient): PredictionForm<PvValues> {
  return new PredictionForm(api, {
    title: "Photovoltaic Installation",
    css: "pv",
    fields: PV_FIELDS,
    pristine: emptyPvValues,
    validate: validatePv,
    submit: (client, payload) => client.predictPv(payload),
    renderResults: renderPvResults,
  });
}
