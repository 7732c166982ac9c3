/** Wire shapes of the studio service. Field names mirror the API verbatim. */

export interface ServiceError {
  stage: string;
  message: string;
}

export interface HealthResponse {
  status: string;
  version: string;
  backend: {
    url: string;
    reachable: boolean;
    model?: string;
    mock?: boolean;
  };
  sessions: number;
}

export interface SessionSummary {
  id: string;
  name: string;
  created_at: string;
  iteration_count: number;
  busy: boolean;
}

export interface IterationParams {
  prompt: string | null;
  seed: number | null;
  overrides: Record<string, unknown>;
}

export interface IterationRecord {
  index: number;
  status: "completed" | "failed";
  created_at: string;
  params: IterationParams;
  run_id: string | null;
  error: ServiceError | null;
  parent_hash: string;
  record_hash: string;
}

export interface SessionDetail extends SessionSummary {
  config: Record<string, unknown>;
  chart: Record<string, unknown>;
  iterations: IterationRecord[];
}

export type JobState = "queued" | "running" | "done" | "error";

export interface Job {
  id: string;
  session_id: string;
  iteration: number;
  state: JobState;
  error: ServiceError | null;
}

export interface BarCheck {
  series: number;
  index: number;
  expected_px: number;
  recovered_px: number | null;
  error_px: number | null;
  ok: boolean;
}

export interface LegibilityReport {
  edge_alignment: number;
  alignment_threshold: number;
  alignment_ok: boolean;
  tolerance_px: number;
  bars: BarCheck[];
  bars_ok: boolean;
  colour: string;
  passed: boolean;
}

export const ARTIFACT_NAMES = [
  "chart",
  "outline",
  "background",
  "output",
  "upscaled",
] as const;

export type ArtifactName = (typeof ARTIFACT_NAMES)[number];

/** The four artifacts every completed iteration has (upscaled is optional). */
export const QUARTET: ArtifactName[] = ["chart", "outline", "background", "output"];
