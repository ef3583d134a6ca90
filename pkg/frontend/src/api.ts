/** Thin fetch client for the evaluation server. */

import type { JudgmentBody, NextResponse, SubmitResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.text();
    if (!response.ok) {
      let detail = body;
      try {
        detail = JSON.parse(body).detail ?? body;
      } catch {
        // plain-text error body
      }
      throw new ApiError(response.status, String(detail));
    }
    return JSON.parse(body) as T;
  }

  nextSample(runId: string, judgeId: string): Promise<NextResponse> {
    return this.request(`/runs/${runId}/next?judge=${encodeURIComponent(judgeId)}`);
  }

  submitJudgment(runId: string, body: JudgmentBody): Promise<SubmitResponse> {
    return this.request(`/runs/${runId}/judgments`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
