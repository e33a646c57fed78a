import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient", () => {
  it("sends the API key as the Authorization header", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ ok: true }));
    vi.stubGlobal("fetch", fetchMock);
    const client = new ApiClient("http://backend", "APIKEY-abc");
    await client.listModels();
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("http://backend/api/v1/models");
    expect(init.headers.Authorization).toBe("APIKEY-abc");
  });

  it("omits the header when no key is configured", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({}));
    vi.stubGlobal("fetch", fetchMock);
    await new ApiClient("", "").listModels();
    expect(fetchMock.mock.calls[0][1].headers.Authorization).toBeUndefined();
  });

  it("posts prediction payloads as JSON", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ outputs: {} }));
    vi.stubGlobal("fetch", fetchMock);
    const client = new ApiClient("", "APIKEY-abc");
    await client.predictRetrofit({ building_total_area: 500 });
    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe("/api/v1/retrofit/predict");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({ building_total_area: 500 });
  });

  it("maps the backend problem shape onto ApiError", async () => {
    const fetchMock = vi.fn().mockResolvedValue(
      jsonResponse({ code: "OutOfRange", message: "must be > 0", field: "building_total_area" }, 422),
    );
    vi.stubGlobal("fetch", fetchMock);
    const client = new ApiClient("", "APIKEY-abc");
    const error = await client.predictRetrofit({}).catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(422);
    expect(error.code).toBe("OutOfRange");
    expect(error.field).toBe("building_total_area");
    expect(error.isServerFault).toBe(false);
  });

  it("treats network failures as server faults", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("connection refused")));
    const error = await new ApiClient("", "k").listModels().catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect(error.status).toBe(0);
    expect(error.isServerFault).toBe(true);
  });

  it("fetches artifacts as text", async () => {
    const fetchMock = vi.fn().mockResolvedValue(new Response("a,b\n1,2\n", { status: 200 }));
    vi.stubGlobal("fetch", fetchMock);
    const text = await new ApiClient("", "k").artifactText("RUN1", "eval/param_importance.csv");
    expect(fetchMock.mock.calls[0][0]).toBe("/api/v1/runs/RUN1/artifacts/eval/param_importance.csv");
    expect(text).toBe("a,b\n1,2\n");
  });
});
