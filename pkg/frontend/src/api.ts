import type { AvStatus, InteractionRecord, SessionLogResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = globalThis.fetch?.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (error) {
      throw new ApiError(`network failure: ${String(error)}`, null);
    }
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = await response.text();
        if (body) detail += `: ${body.slice(0, 200)}`;
      } catch {
        // response body unavailable; keep the status line
      }
      throw new ApiError(detail, response.status);
    }
    return (await response.json()) as T;
  }

  submitInstruction(session: string, text: string): Promise<InteractionRecord> {
    return this.request<InteractionRecord>("/api/v1/instruction", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session, text }),
    });
  }

  fetchStatus(): Promise<AvStatus> {
    return this.request<AvStatus>("/api/v1/status");
  }

  fetchLog(session: string): Promise<SessionLogResponse> {
    return this.request<SessionLogResponse>(
      `/api/v1/log?session=${encodeURIComponent(session)}`,
    );
  }

  telemetryUrl(): string {
    const base = this.baseUrl || (typeof location !== "undefined" ? location.origin : "");
    return `${base.replace(/^http/, "ws")}/api/v1/telemetry`;
  }
}
