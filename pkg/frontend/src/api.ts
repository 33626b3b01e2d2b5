// Typed client for the curation service.
//
// All truth lives server-side: the client keeps nothing but the revision
// echoed by the last GET, and the only state-changing request it ever issues
// is POST /api/decisions.

import type {
  CandidatesResponse,
  DecisionResult,
  ExportDocument,
  PendingResponse,
  ProjectionResponse,
  TaxonomyResponse,
  ViolationsResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class StaleRevisionError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "StaleRevisionError";
  }
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export class ApiClient {
  revision: string | null = null;
  postCount = 0;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async get<T extends { revision: string }>(path: string): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    const body = (await response.json()) as T;
    this.revision = body.revision;
    return body;
  }

  taxonomy(): Promise<TaxonomyResponse> {
    return this.get("/api/taxonomy");
  }

  violations(): Promise<ViolationsResponse> {
    return this.get("/api/violations");
  }

  pendingMerges(): Promise<PendingResponse> {
    return this.get("/api/merges/pending");
  }

  successionCandidates(purposeId?: string): Promise<CandidatesResponse> {
    const query = purposeId ? `?purpose_id=${encodeURIComponent(purposeId)}` : "";
    return this.get(`/api/succession/candidates${query}`);
  }

  projection(language: string): Promise<ProjectionResponse> {
    return this.get(`/api/projection/${encodeURIComponent(language)}`);
  }

  async exportDocument(): Promise<ExportDocument> {
    const response = await this.fetchFn(`${this.baseUrl}/api/export`);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as ExportDocument;
  }

  /** The one and only state-changing call. 409 becomes StaleRevisionError. */
  async postDecision(
    kind: string,
    payload: Record<string, unknown>,
    author = "curator",
  ): Promise<DecisionResult> {
    if (this.revision === null) {
      throw new Error("no revision yet: load a view before posting decisions");
    }
    this.postCount += 1;
    const response = await this.fetchFn(`${this.baseUrl}/api/decisions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ revision: this.revision, kind, payload, author }),
    });
    if (response.status === 409) {
      throw new StaleRevisionError(await response.text());
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    const result = (await response.json()) as DecisionResult;
    this.revision = result.revision;
    return result;
  }
}
