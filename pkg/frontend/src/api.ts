/**
 * Typed client for the recommendation service.
 *
 * The wire format mirrors the server exactly; nothing here recomputes or
 * reorders what the service returns. At most one recommend request is in
 * flight: submitting again aborts the previous one so a stale response can
 * never overwrite a newer render.
 */

export interface DeclarationPayload {
  name: string;
  invocations: string[];
}

export interface RecommendRequest {
  context_declarations: DeclarationPayload[];
  active: DeclarationPayload;
  k: number;
  M: number;
  N: number;
  snippet_count: number;
}

export interface ApiItem {
  invocation: string;
  score: number;
  rank: number;
}

export interface SnippetItem {
  declaration: string;
  project: string;
  score: number;
  sequence: string[];
  body?: string;
}

export interface RecommendResponse {
  apis: ApiItem[];
  snippets: SnippetItem[];
  fallback_used: boolean;
  elapsed_ms: number;
}

export interface HealthResponse {
  status: string;
  corpus?: { projects: number; declarations: number; vocabulary: number };
}

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

/** Base URL from the `?api=` query parameter, else the page's own origin. */
export function resolveBaseUrl(location: { search: string; origin: string }): string {
  const fromQuery = new URLSearchParams(location.search).get("api");
  const base = fromQuery ?? location.origin;
  return base.replace(/\/+$/, "");
}

export class ApiClient {
  private inFlight: AbortController | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = (...args) => fetch(...args),
  ) {}

  async health(): Promise<HealthResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/v1/health`);
    if (!resp.ok) {
      throw new ServiceError(resp.status, `health check failed (${resp.status})`);
    }
    return (await resp.json()) as HealthResponse;
  }

  /** POST the context; a newer call aborts any request still in flight. */
  async recommend(request: RecommendRequest): Promise<RecommendResponse> {
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    try {
      const resp = await this.fetchImpl(`${this.baseUrl}/api/v1/recommend`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
        signal: controller.signal,
      });
      if (!resp.ok) {
        let detail = `request failed (${resp.status})`;
        try {
          const body = (await resp.json()) as { error?: string };
          if (body.error) detail = `${body.error} (${resp.status})`;
        } catch {
          // non-JSON error body; keep the status-based message
        }
        throw new ServiceError(resp.status, detail);
      }
      return (await resp.json()) as RecommendResponse;
    } finally {
      if (this.inFlight === controller) {
        this.inFlight = null;
      }
    }
  }
}
