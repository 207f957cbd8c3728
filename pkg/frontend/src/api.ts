import type {
  DecisionResponse,
  PairPayload,
  PendingList,
  StateSummary,
} from "./types.js";

// Minimal transport interface so tests can stand in a fixture service.
export interface HttpResponse {
  status: number;
  json(): Promise<unknown>;
}

export type HttpClient = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<HttpResponse>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

/** Typed client for the review service; the UI never computes coverage
 * itself, it only renders what these endpoints return. */
export class ReviewApi {
  constructor(
    private base: string = "",
    private http: HttpClient = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.http(this.base + path);
    if (response.status !== 200) {
      throw new ApiError(response.status, `GET ${path} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  getState(): Promise<StateSummary> {
    return this.getJson<StateSummary>("/api/state");
  }

  getPending(): Promise<PendingList> {
    return this.getJson<PendingList>("/api/pending");
  }

  getPair(snowyId: string): Promise<PairPayload> {
    return this.getJson<PairPayload>(`/api/pair/${encodeURIComponent(snowyId)}`);
  }

  /** Decision outcomes (invalid, conflict) come back as data, not thrown:
   * the UI has distinct flows for each of them. */
  async postDecision(
    snowyId: string,
    clearId: string,
    note: string,
  ): Promise<{ status: number; body: DecisionResponse }> {
    const response = await this.http(
      `${this.base}/api/pair/${encodeURIComponent(snowyId)}/decision`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ clear_id: clearId, note }),
      },
    );
    return { status: response.status, body: (await response.json()) as DecisionResponse };
  }
}
