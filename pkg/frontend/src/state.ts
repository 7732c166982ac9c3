import type {
  JobState,
  LegibilityReport,
  SessionDetail,
  SessionSummary,
  ServiceError,
} from "./types.js";

/** Optimistic card for an iteration the server has accepted but not recorded. */
export interface PendingCard {
  index: number;
  prompt: string;
  jobId: string;
  state: JobState;
  startedAt: string;
}

export type Listener = () => void;

/**
 * Single source of client-side truth. Views render from this and never hold
 * their own copies; server responses flow in through the setters, which
 * reconcile the optimistic pending card against what the server recorded.
 */
export class SessionStore {
  sessions: SessionSummary[] = [];
  detail: SessionDetail | null = null;
  reports = new Map<number, LegibilityReport>();
  pending: PendingCard | null = null;
  lastError: ServiceError | null = null;

  private listeners = new Set<Listener>();

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  setSessions(sessions: SessionSummary[]): void {
    this.sessions = sessions;
    this.notify();
  }

  /**
   * Install server truth for the open session. A pending card whose index
   * now appears in the recorded history is retired; reports for indexes the
   * server no longer lists are dropped.
   */
  setDetail(detail: SessionDetail | null): void {
    this.detail = detail;
    if (detail === null) {
      this.reports.clear();
      this.pending = null;
    } else {
      const recorded = new Set(detail.iterations.map((it) => it.index));
      if (this.pending && recorded.has(this.pending.index)) this.pending = null;
      for (const index of [...this.reports.keys()]) {
        if (!recorded.has(index)) this.reports.delete(index);
      }
    }
    this.notify();
  }

  setReport(index: number, report: LegibilityReport): void {
    this.reports.set(index, report);
    this.notify();
  }

  beginPending(card: PendingCard): void {
    this.pending = card;
    this.lastError = null;
    this.notify();
  }

  updatePendingState(state: JobState): void {
    if (!this.pending || this.pending.state === state) return;
    this.pending = { ...this.pending, state };
    this.notify();
  }

  clearPending(): void {
    if (!this.pending) return;
    this.pending = null;
    this.notify();
  }

  setError(err: ServiceError | null): void {
    this.lastError = err;
    this.notify();
  }

  /** True while this session must not accept another mutation. */
  get busy(): boolean {
    return this.pending !== null || (this.detail?.busy ?? false);
  }
}
