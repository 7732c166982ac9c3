import type { IterationParams, LegibilityReport } from "./types.js";

/**
 * Human label for what an iteration changed relative to the session's base
 * config. Pure presentation: the values come straight off the recorded
 * params, nothing is recomputed.
 */
export function paramsDelta(params: IterationParams): string {
  const parts: string[] = [];
  if (params.seed !== null && params.seed !== undefined) {
    parts.push(`seed ${params.seed}`);
  }
  for (const part of flattenOverrides(params.overrides)) parts.push(part);
  return parts.length ? parts.join(", ") : "defaults";
}

function flattenOverrides(overrides: Record<string, unknown>, prefix = ""): string[] {
  const out: string[] = [];
  for (const key of Object.keys(overrides ?? {}).sort()) {
    const value = overrides[key];
    const label = prefix ? `${prefix}.${key}` : key;
    if (value !== null && typeof value === "object" && !Array.isArray(value)) {
      out.push(...flattenOverrides(value as Record<string, unknown>, label));
    } else {
      out.push(`${label}=${formatValue(value)}`);
    }
  }
  return out;
}

function formatValue(value: unknown): string {
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : value.toFixed(2);
  }
  if (Array.isArray(value)) return value.map(formatValue).join("x");
  return String(value);
}

export interface Badge {
  text: string;
  cls: "badge-pass" | "badge-fail" | "badge-none";
}

/** Legibility badge: the run's alignment score and pass verdict. */
export function legibilityBadge(report: LegibilityReport | undefined): Badge {
  if (!report) return { text: "no report", cls: "badge-none" };
  const score = report.edge_alignment.toFixed(2);
  return report.passed
    ? { text: `legible ${score}`, cls: "badge-pass" }
    : { text: `failed ${score}`, cls: "badge-fail" };
}

/** "14:03:22" from an ISO timestamp; dates are noise inside one session. */
export function timeOfDay(iso: string): string {
  const t = new Date(iso);
  if (Number.isNaN(t.getTime())) return iso;
  return t.toLocaleTimeString([], { hour12: false });
}
