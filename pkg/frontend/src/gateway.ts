// Thin typed client over the gateway. Fetch is injected so tests can run
// against a fixture gateway without a network.

import type {
  ApiError,
  ConflictPayload,
  MetricsReport,
  Summary,
  TopologyPayload,
  VerdictChoice,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export type Result<T> =
  | { ok: true; data: T; raw: string }
  | { ok: false; error: ApiError; status: number };

export interface VerdictAck {
  accepted: boolean;
  applies_at_tick: number;
}

const NETWORK_FAILURE: ApiError = {
  code: "network",
  message: "gateway unreachable",
  entity: null,
};

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<Result<T>> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch {
      return { ok: false, error: NETWORK_FAILURE, status: 0 };
    }
    const raw = await response.text();
    if (!response.ok) {
      try {
        const body = JSON.parse(raw) as { error: ApiError };
        return { ok: false, error: body.error, status: response.status };
      } catch {
        return {
          ok: false,
          status: response.status,
          error: { code: "internal", message: raw.slice(0, 200), entity: null },
        };
      }
    }
    return { ok: true, data: JSON.parse(raw) as T, raw };
  }

  private authHeaders(): Record<string, string> {
    return {
      "Content-Type": "application/json",
      Authorization: `Bearer ${this.token}`,
    };
  }

  summary(): Promise<Result<Summary>> {
    return this.request<Summary>("/v1/summary");
  }

  pendingConflicts(): Promise<Result<{ conflicts: ConflictPayload[] }>> {
    return this.request<{ conflicts: ConflictPayload[] }>(
      "/v1/conflicts?status=pending",
    );
  }

  topology(): Promise<Result<TopologyPayload>> {
    return this.request<TopologyPayload>("/v1/topology");
  }

  metrics(window?: number): Promise<Result<MetricsReport>> {
    const query = window === undefined ? "" : `?window=${window}`;
    return this.request<MetricsReport>(`/v1/metrics${query}`);
  }

  postVerdict(
    conflictId: number,
    verdict: VerdictChoice,
    content?: string,
  ): Promise<Result<VerdictAck>> {
    return this.request<VerdictAck>(`/v1/conflicts/${conflictId}/verdict`, {
      method: "POST",
      headers: this.authHeaders(),
      body: JSON.stringify({ verdict, content: content ?? null }),
    });
  }

  patchParam(name: string, value: number): Promise<Result<VerdictAck>> {
    return this.request<VerdictAck>(`/v1/params/${name}`, {
      method: "PATCH",
      headers: this.authHeaders(),
      body: JSON.stringify({ value }),
    });
  }
}
