// Thin fetch client for the advisory service.

import type { AdvisoryAnswer, ChunkDetail, HealthInfo } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

async function throwApiError(response: Response): Promise<never> {
  let code = "UNKNOWN";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body?.error?.code) {
      code = body.error.code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the defaults
  }
  throw new ApiError(response.status, code, message);
}

export class AdvisorApi {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async ask(question: string): Promise<AdvisoryAnswer> {
    const response = await fetch(`${this.baseUrl}/v1/ask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question }),
    });
    if (!response.ok) await throwApiError(response);
    return (await response.json()) as AdvisoryAnswer;
  }

  async chunk(chunkId: string): Promise<ChunkDetail> {
    const response = await fetch(
      `${this.baseUrl}/v1/chunks/${encodeURIComponent(chunkId)}`,
    );
    if (!response.ok) await throwApiError(response);
    return (await response.json()) as ChunkDetail;
  }

  async health(): Promise<HealthInfo> {
    const response = await fetch(`${this.baseUrl}/v1/health`);
    if (!response.ok) await throwApiError(response);
    return (await response.json()) as HealthInfo;
  }
}
