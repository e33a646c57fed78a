// Typed client for the backend HTTP API. The key is held in sessionStorage
// and attached as the Authorization header on every call.

import type { PredictionResponse, Registry, RunRecord, Study } from "./types.js";

const KEY_STORAGE = "enerfit_api_key";

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
    public code: string,
    public field?: string,
  ) {
    super(message);
  }

  get isServerFault(): boolean {
    return this.status >= 500 || this.status === 0;
  }
}

export function storedApiKey(): string {
  try {
    return sessionStorage.getItem(KEY_STORAGE) ?? "";
  } catch {
    return "";
  }
}

export function storeApiKey(key: string): void {
  try {
    sessionStorage.setItem(KEY_STORAGE, key);
  } catch {
    // session storage unavailable (e.g. some test environments): key is per-client only
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = "Error";
  let message = `request failed with HTTP ${response.status}`;
  let field: string | undefined;
  try {
    const body = await response.json();
    if (body && typeof body === "object") {
      code = body.code ?? code;
      message = body.message ?? body.detail ?? message;
      field = body.field;
    }
  } catch {
    // non-JSON error body: keep the generic message
  }
  return new ApiError(message, response.status, code, field);
}

export class ApiClient {
  constructor(
    public baseUrl: string = "",
    private apiKey: string = storedApiKey(),
  ) {}

  setApiKey(key: string): void {
    this.apiKey = key;
    storeApiKey(key);
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.apiKey) headers["Authorization"] = this.apiKey;
    return headers;
  }

  private async request(path: string, init: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}/api/v1${path}`, init);
    } catch (error) {
      throw new ApiError(`backend unreachable: ${String(error)}`, 0, "Unreachable");
    }
    if (!response.ok) throw await toApiError(response);
    return response;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.request(path, { headers: this.headers(false) });
    return (await response.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.request(path, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify(body),
    });
    return (await response.json()) as T;
  }

  predictRetrofit(payload: Record<string, unknown>): Promise<PredictionResponse> {
    return this.postJson("/retrofit/predict", payload);
  }

  predictPv(payload: Record<string, unknown>): Promise<PredictionResponse> {
    return this.postJson("/pv/predict", payload);
  }

  launchRun(config: Record<string, unknown>, steps: string[]): Promise<{ run_id: string }> {
    return this.postJson("/runs", { config, steps });
  }

  runStatus(runId: string): Promise<RunRecord> {
    return this.getJson(`/runs/${runId}`);
  }

  listModels(): Promise<Registry> {
    return this.getJson("/models");
  }

  async artifactText(runId: string, artifactPath: string): Promise<string> {
    const response = await this.request(`/runs/${runId}/artifacts/${artifactPath}`, {
      headers: this.headers(false),
    });
    return await response.text();
  }

  async artifactJson<T>(runId: string, artifactPath: string): Promise<T> {
    return JSON.parse(await this.artifactText(runId, artifactPath)) as T;
  }

  study(runId: string): Promise<Study> {
    return this.artifactJson<Study>(runId, "train/study.json");
  }

  async reportCsv(predictionId: string): Promise<string> {
    const response = await this.request(
      `/retrofit/report?run=${encodeURIComponent(predictionId)}&format=csv`,
      { headers: this.headers(false) },
    );
    return await response.text();
  }
}
