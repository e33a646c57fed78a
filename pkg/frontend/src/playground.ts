// Training playground: launch form over the run-config schema, run list,
// polled run detail with the trial table and evaluation charts.

import { ApiClient, ApiError } from "./api.js";
import { barChart, heatmap, lineChart } from "./charts.js";
import { parseSeries } from "./csv.js";
import { clear, el, show } from "./dom.js";
import { RunRecord, Study, TERMINAL_STATUSES } from "./types.js";

export interface LaunchFields {
  input_filepath: string;
  mlClass: string;
  feature_cols: string; // one column name per line
  target_cols: string;
  batch_size: string; // comma-separated
  l_rate: string;
  layer_sizes: string;
  n_layers: string;
  max_epochs: string;
  n_trials: string;
  seed: string;
}

export const RETROFIT_PRESET: LaunchFields = {
  input_filepath: "fixtures/retrofit.csv",
  mlClass: "Classifier",
  feature_cols: [
    "building_total_area",
    "above_ground_floors",
    "energy_consumption_before",
    "initial_energy_class",
    "energy_class_after",
  ].join("\n"),
  target_cols: [
    "carrying_out_construction_works",
    "reconstruction_of_engineering_systems",
    "heat_installation",
    "water_heating_system",
  ].join("\n"),
  batch_size: "256, 512, 1024",
  l_rate: "0.0001, 0.001",
  layer_sizes: "128, 256, 512, 1024, 2048",
  n_layers: "2, 6",
  max_epochs: "10",
  n_trials: "3",
  seed: "42",
};

export const PV_PRESET: LaunchFields = {
  input_filepath: "fixtures/pv.csv",
  mlClass: "Regressor",
  feature_cols: [
    "average_electricity_price",
    "average_monthly_consumption_before",
    "installation_cost",
    "current_inverter_set_power",
    "planned_inverter_set_power",
    "average_energy_generated",
    "region",
  ].join("\n"),
  target_cols: [
    "electricity_produced",
    "primary_energy_consumption_after",
    "reduction_of_primary_energy",
    "co2_emissions_reduction",
    "expected_annual_self_consumption",
    "annual_financial_savings",
    "payback_period",
  ].join("\n"),
  batch_size: "32",
  l_rate: "0.002, 0.008",
  layer_sizes: "32, 64",
  n_layers: "2, 3",
  max_epochs: "25",
  n_trials: "2",
  seed: "7",
};

function numberList(text: string): number[] {
  return text
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part !== "")
    .map(Number);
}

function lineList(text: string): string[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line !== "");
}

export function buildRunConfig(fields: LaunchFields): Record<string, unknown> {
  return {
    input_filepath: fields.input_filepath.trim(),
    mlClass: fields.mlClass,
    feature_cols: lineList(fields.feature_cols),
    target_cols: lineList(fields.target_cols),
    batch_size: numberList(fields.batch_size),
    l_rate: numberList(fields.l_rate),
    layer_sizes: numberList(fields.layer_sizes),
    n_layers: numberList(fields.n_layers),
    max_epochs: Number(fields.max_epochs),
    n_trials: Number(fields.n_trials),
    seed: Number(fields.seed),
  };
}

export interface PollerOptions {
  baseDelayMs?: number;
  maxDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

export class RunPoller {
  private delay: number;
  private readonly baseDelay: number;
  private readonly maxDelay: number;
  private readonly sleep: (ms: number) => Promise<void>;
  private stopped = false;

  constructor(
    private api: ApiClient,
    private runId: string,
    private onUpdate: (record: RunRecord) => void,
    private onError: (error: ApiError) => void,
    options: PollerOptions = {},
  ) {
    this.baseDelay = options.baseDelayMs ?? 2000;
    this.maxDelay = options.maxDelayMs ?? 10000;
    this.delay = this.baseDelay;
    this.sleep = options.sleep ?? ((ms) => new Promise((resolve) => setTimeout(resolve, ms)));
  }

  stop(): void {
    this.stopped = true;
  }

  /** One poll step; returns the record, or null on error / after stop. */
  async pollOnce(): Promise<RunRecord | null> {
    if (this.stopped) return null;
    try {
      const record = await this.api.runStatus(this.runId);
      this.delay = this.baseDelay;
      this.onUpdate(record);
      if (TERMINAL_STATUSES.has(record.status)) this.stopped = true;
      return record;
    } catch (error) {
      const apiError = error instanceof ApiError ? error : new ApiError(String(error), 0, "Unreachable");
      this.onError(apiError);
      if (apiError.status === 404) {
        this.stopped = true; // stale run: stop polling, the banner stays up
      } else {
        this.delay = Math.min(this.delay * 1.5, this.maxDelay); // capped backoff
      }
      return null;
    }
  }

  async start(): Promise<void> {
    while (!this.stopped) {
      await this.pollOnce();
      if (this.stopped) break;
      await this.sleep(this.delay);
    }
  }
}

const PARAM_LABELS: Record<string, string> = {
  batch_size: "batch_size",
  l_rate: "l_rate",
  n_layers: "n_layers",
  layer_sizes: "layer_sizes",
};

export function renderTrialTable(record: RunRecord, study: Study | null): HTMLElement {
  const table = el("table", { class: "trial-table" });
  const head = el("tr", {});
  for (const column of ["#", "start", "end", "duration (s)", "params", "state", "objective"]) {
    head.append(el("th", { text: column }));
  }
  table.append(el("thead", {}, head));
  const body = el("tbody", {});
  const byNumber = new Map((study?.trials ?? []).map((t) => [t.number, t]));
  for (const timing of record.trials) {
    const trial = byNumber.get(timing.number);
    const params = trial
      ? `batch=${trial.params.batch_size} lr=${trial.params.l_rate.toExponential(2)} layers=[${trial.params.layer_sizes.join(",")}]`
      : "";
    const row = el(
      "tr",
      { "data-trial": String(timing.number) },
      el("td", { text: String(timing.number) }),
      el("td", { text: timing.started_at }),
      el("td", { text: timing.finished_at }),
      el("td", { text: timing.duration_s.toFixed(3) }),
      el("td", { text: params }),
      el("td", { class: `state ${timing.state.toLowerCase()}`, text: timing.state }),
      el("td", { text: trial?.objective != null ? trial.objective.toFixed(6) : "—" }),
    );
    body.append(row);
  }
  table.append(body);
  return table;
}

interface MetricsPayload {
  task: string;
  classification?: {
    per_target: Record<string, { confusion: { tp: number; fp: number; fn: number; tn: number } }>;
  };
}

export async function renderRunCharts(
  container: HTMLElement,
  api: ApiClient,
  record: RunRecord,
): Promise<void> {
  clear(container);
  const evalStep = record.steps["Evaluation"];
  if (!evalStep || evalStep.status !== "Succeeded") {
    container.append(el("p", { class: "placeholder", text: "No evaluation artifacts yet." }));
    return;
  }
  const history = parseSeries(await api.artifactText(record.run_id, "eval/optimization_history.csv"));
  const points = history.rows
    .filter((row) => row[1] !== "")
    .map((row) => ({ x: Number(row[0]), y: Number(row[1]) }));
  const bestSoFar = history.rows
    .filter((row) => row[2] !== "")
    .map((row) => ({ x: Number(row[0]), y: Number(row[2]) }));
  const historyPanel = el("div", { class: "chart-panel history" });
  if (points.length === 0 && bestSoFar.length === 0) {
    historyPanel.append(el("p", { class: "placeholder", text: "No completed trials to plot." }));
  } else {
    historyPanel.innerHTML = lineChart(
      [
        { label: "objective", points, color: "#94a3b8" },
        { label: "best so far", points: bestSoFar, color: "#2563eb" },
      ],
      "Optimization history",
    );
  }
  container.append(historyPanel);

  const importance = parseSeries(await api.artifactText(record.run_id, "eval/param_importance.csv"));
  const bars = importance.rows.map((row) => ({
    label: PARAM_LABELS[row[0]] ?? row[0],
    value: Number(row[1]),
  }));
  const importancePanel = el("div", { class: "chart-panel importance" });
  importancePanel.innerHTML = barChart(bars, "Parameter importance");
  container.append(importancePanel);

  const metrics = JSON.parse(await api.artifactText(record.run_id, "eval/metrics.json")) as MetricsPayload;
  if (metrics.classification) {
    const grid = el("div", { class: "heatmap-grid" });
    for (const [target, entry] of Object.entries(metrics.classification.per_target)) {
      const cm = entry.confusion;
      const panel = el("div", { class: "chart-panel confusion", "data-target": target });
      panel.innerHTML = heatmap(
        [
          [cm.tp, cm.fn],
          [cm.fp, cm.tn],
        ],
        ["actual true", "actual false"],
        ["pred true", "pred false"],
        target,
      );
      grid.append(panel);
    }
    container.append(grid);
  }
}

export class PlaygroundView {
  readonly root: HTMLElement;
  private fields = new Map<keyof LaunchFields, HTMLInputElement | HTMLTextAreaElement | HTMLSelectElement>();
  private runListBody: HTMLElement;
  private detail: HTMLElement;
  private banner: HTMLElement;
  private runs: { run_id: string; status: string }[] = [];
  private poller: RunPoller | null = null;
  private pollerOptions: PollerOptions;

  constructor(
    private api: ApiClient,
    pollerOptions: PollerOptions = {},
  ) {
    this.pollerOptions = pollerOptions;
    const presetSelect = el("select", { class: "preset" });
    presetSelect.append(el("option", { value: "retrofit", text: "Retrofit classifier" }));
    presetSelect.append(el("option", { value: "pv", text: "PV regressor" }));
    presetSelect.addEventListener("change", () => {
      this.applyPreset(presetSelect.value === "pv" ? PV_PRESET : RETROFIT_PRESET);
    });

    const form = el("form", { class: "launch-form", novalidate: "novalidate" });
    form.append(el("div", { class: "field" }, el("label", { text: "Preset" }), presetSelect));
    const addField = (
      name: keyof LaunchFields,
      label: string,
      input: HTMLInputElement | HTMLTextAreaElement | HTMLSelectElement,
    ) => {
      this.fields.set(name, input);
      input.setAttribute("name", name);
      form.append(el("div", { class: "field", "data-field": name }, el("label", { text: label }), input));
    };
    addField("input_filepath", "Input data file or URL", el("input", { type: "text" }));
    const mlClass = el("select", {});
    mlClass.append(el("option", { value: "Classifier", text: "Classifier" }));
    mlClass.append(el("option", { value: "Regressor", text: "Regressor" }));
    addField("mlClass", "ML class", mlClass);
    addField("feature_cols", "Feature columns (one per line)", el("textarea", { rows: "5" }));
    addField("target_cols", "Target columns (one per line)", el("textarea", { rows: "4" }));
    addField("batch_size", "Batch sizes", el("input", { type: "text" }));
    addField("l_rate", "Learning rate range", el("input", { type: "text" }));
    addField("layer_sizes", "Layer sizes", el("input", { type: "text" }));
    addField("n_layers", "Layer count range", el("input", { type: "text" }));
    addField("max_epochs", "Max epochs", el("input", { type: "text" }));
    addField("n_trials", "Trials", el("input", { type: "text" }));
    addField("seed", "Seed", el("input", { type: "text" }));

    const launchButton = el("button", { type: "submit", class: "launch", text: "Launch full pipeline" });
    form.append(el("div", { class: "actions" }, launchButton));
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.launch();
    });

    this.banner = el("div", { class: "banner hidden", role: "alert" });
    this.runListBody = el("tbody", {});
    const runTable = el(
      "table",
      { class: "run-list" },
      el("thead", {}, el("tr", {}, el("th", { text: "run" }), el("th", { text: "status" }))),
      this.runListBody,
    );
    this.detail = el("div", { class: "run-detail" });
    this.root = el(
      "section",
      { class: "playground" },
      el("h2", { text: "Training Playground" }),
      form,
      this.banner,
      el("div", { class: "runs" }, el("h3", { text: "Runs" }), runTable),
      this.detail,
    );
    this.applyPreset(RETROFIT_PRESET);
  }

  applyPreset(preset: LaunchFields): void {
    for (const [name, input] of this.fields) {
      input.value = preset[name];
    }
  }

  launchFields(): LaunchFields {
    const out = {} as LaunchFields;
    for (const [name, input] of this.fields) {
      out[name] = input.value;
    }
    return out;
  }

  async launch(): Promise<string | null> {
    show(this.banner, false);
    let runId: string;
    try {
      const config = buildRunConfig(this.launchFields());
      const launched = await this.api.launchRun(config, ["Ingestion", "Training", "Evaluation"]);
      runId = launched.run_id;
    } catch (error) {
      this.banner.textContent = error instanceof ApiError ? error.message : String(error);
      show(this.banner, true);
      return null;
    }
    this.runs.unshift({ run_id: runId, status: "Queued" });
    this.renderRunList();
    this.watch(runId);
    return runId;
  }

  watch(runId: string): RunPoller {
    this.poller?.stop();
    this.poller = new RunPoller(
      this.api,
      runId,
      (record) => void this.renderDetail(record),
      (error) => {
        this.banner.textContent =
          error.status === 404 ? `run ${runId} no longer exists` : `polling failed: ${error.message}`;
        show(this.banner, true);
      },
      this.pollerOptions,
    );
    void this.poller.start();
    return this.poller;
  }

  private renderRunList(): void {
    clear(this.runListBody);
    for (const run of this.runs) {
      const row = el(
        "tr",
        { "data-run": run.run_id },
        el("td", { text: run.run_id }),
        el("td", { class: `state ${run.status.toLowerCase()}`, text: run.status }),
      );
      row.addEventListener("click", () => this.watch(run.run_id));
      this.runListBody.append(row);
    }
  }

  async renderDetail(record: RunRecord): Promise<void> {
    const entry = this.runs.find((run) => run.run_id === record.run_id);
    if (entry && entry.status !== record.status) {
      entry.status = record.status;
      this.renderRunList();
    }
    clear(this.detail);
    this.detail.append(el("h3", { text: `Run ${record.run_id}` }));
    this.detail.append(el("p", { class: `run-status status-${record.status.toLowerCase()}`, text: record.status }));
    const steps = el("ul", { class: "steps" });
    for (const [name, step] of Object.entries(record.steps)) {
      steps.append(
        el(
          "li",
          { class: `step ${step.status.toLowerCase()}`, "data-step": name },
          el("span", { class: "step-name", text: name }),
          el("span", { class: "step-status", text: step.status }),
        ),
      );
    }
    this.detail.append(steps);
    if (record.error) {
      this.detail.append(el("p", { class: "run-error", text: `${record.error.code}: ${record.error.message}` }));
    }
    if (record.trials.length > 0) {
      let study: Study | null = null;
      try {
        study = await this.api.study(record.run_id);
      } catch {
        study = null; // study artifact not written yet
      }
      this.detail.append(el("h4", { text: "Trials" }), renderTrialTable(record, study));
    }
    if (TERMINAL_STATUSES.has(record.status)) {
      const charts = el("div", { class: "charts" });
      this.detail.append(charts);
      try {
        await renderRunCharts(charts, this.api, record);
      } catch (error) {
        charts.append(el("p", { class: "placeholder", text: `charts unavailable: ${String(error)}` }));
      }
    }
  }
}
