import type {
  ArtifactName,
  HealthResponse,
  Job,
  LegibilityReport,
  SessionDetail,
  SessionSummary,
  ServiceError,
} from "./types.js";

/** Service rejection with the wire error shape attached. */
export class ApiError extends Error {
  readonly stage: string;
  readonly status: number;

  constructor(status: number, err: ServiceError) {
    super(err.message);
    this.name = "ApiError";
    this.stage = err.stage;
    this.status = status;
  }
}

/** The request never reached the service (DNS, refused, aborted). */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(cause instanceof Error ? cause.message : String(cause));
    this.name = "NetworkError";
  }
}

export interface CreateSessionBody {
  chart: Record<string, unknown>;
  background_png_base64: string;
  name?: string;
  config?: Record<string, unknown>;
}

export interface SubmitIterationBody {
  prompt?: string;
  seed?: number;
  overrides?: Record<string, unknown>;
}

export interface IterationStarted {
  iteration: number;
  job: Job;
}

async function parseError(res: Response): Promise<ApiError> {
  let err: ServiceError = { stage: "internal", message: `HTTP ${res.status}` };
  try {
    const body = await res.json();
    if (body && typeof body.stage === "string" && typeof body.message === "string") {
      err = body;
    } else if (body && body.detail) {
      // FastAPI validation errors have no stage; fold them into "request"
      err = { stage: "request", message: JSON.stringify(body.detail) };
    }
  } catch {
    /* non-JSON body, keep the fallback */
  }
  return new ApiError(res.status, err);
}

/**
 * Typed client over the studio service. `base` is prepended to every path;
 * empty string means same-origin, which is how the served UI runs.
 */
export class StudioApi {
  constructor(readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let res: Response;
    try {
      res = await fetch(this.base + path, {
        method,
        headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/api/health");
  }

  createSession(body: CreateSessionBody): Promise<SessionSummary> {
    return this.request("POST", "/api/sessions", body);
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("GET", "/api/sessions");
  }

  getSession(id: string): Promise<SessionDetail> {
    return this.request("GET", `/api/sessions/${id}`);
  }

  submitIteration(id: string, body: SubmitIterationBody): Promise<IterationStarted> {
    return this.request("POST", `/api/sessions/${id}/iterations`, body);
  }

  getJob(jobId: string): Promise<Job> {
    return this.request("GET", `/api/jobs/${jobId}`);
  }

  getReport(id: string, index: number): Promise<LegibilityReport> {
    return this.request("GET", `/api/sessions/${id}/iterations/${index}/report`);
  }

  getManifest(id: string, index: number): Promise<Record<string, unknown>> {
    return this.request("GET", `/api/sessions/${id}/iterations/${index}/manifest`);
  }

  /** URL of an artifact PNG; used directly as an <img> src. */
  artifactUrl(id: string, index: number, name: ArtifactName): string {
    return `${this.base}/api/sessions/${id}/iterations/${index}/artifact/${name}`;
  }
}
