// Typed client for the session service. Every response body is validated
// against the published schema before anything else can touch it, and each
// query sequence number is submitted at most once no matter how many times
// the submit handler fires.

import {
  CreatedDoc,
  MenuDoc,
  MenuDocT,
  ProblemsDoc,
  QueryDoc,
  QueryDocT,
  ResponseAck,
  ResponseAckT,
  StateDoc,
  StateDocT,
} from "./schema";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: Record<string, unknown>,
  ) {
    super(`HTTP ${status}: ${String(body["error"] ?? "request failed")}`);
  }
}

export interface CreateSessionRequest {
  problem: string;
  variant?: string;
  budget?: number;
  initial_pairs?: number;
  menu_k?: number;
  dm_mode?: "live" | "simulated";
  seed?: number;
  idempotency_key?: string;
  fit_iters?: number;
  eval_budget?: number;
  restarts?: number;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private submitted = new Map<number, Promise<ResponseAckT>>();

  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = (await resp.json()) as Record<string, unknown>;
    if (!resp.ok) {
      throw new ApiError(resp.status, body);
    }
    return body;
  }

  async problems() {
    return ProblemsDoc.parse(await this.request("/v1/problems"));
  }

  async createSession(req: CreateSessionRequest) {
    return CreatedDoc.parse(
      await this.request("/v1/sessions", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(req),
      }),
    );
  }

  async state(id: string): Promise<StateDocT> {
    return StateDoc.parse(await this.request(`/v1/sessions/${id}`));
  }

  async query(id: string, withDecisions = false): Promise<QueryDocT> {
    const suffix = withDecisions ? "?decisions=true" : "";
    return QueryDoc.parse(await this.request(`/v1/sessions/${id}/query${suffix}`));
  }

  /** Submit a choice; repeated calls for the same sequence number reuse the
   * in-flight (or settled) request instead of hitting the network again. */
  respond(id: string, seq: number, choice: 1 | 2): Promise<ResponseAckT> {
    const existing = this.submitted.get(seq);
    if (existing) {
      return existing;
    }
    const inflight = this.request(`/v1/sessions/${id}/response`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seq, choice }),
    }).then((body) => ResponseAck.parse(body));
    this.submitted.set(seq, inflight);
    inflight.catch(() => {
      // let a failed submission be retried
      this.submitted.delete(seq);
    });
    return inflight;
  }

  async menu(id: string, k?: number): Promise<MenuDocT> {
    const suffix = k ? `?k=${k}` : "";
    return MenuDoc.parse(await this.request(`/v1/sessions/${id}/menu${suffix}`));
  }
}
