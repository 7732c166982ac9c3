import type { StudioApi } from "./api.js";
import type { Job } from "./types.js";

// generation takes tens of seconds against a real backend; 2 s keeps the
// UI responsive without hammering the service
export const POLL_INTERVAL_MS = 2000;

export class PollCancelled extends Error {
  constructor() {
    super("poll cancelled");
    this.name = "PollCancelled";
  }
}

export interface PollHandle {
  /** Resolves with the terminal job (state done or error). */
  done: Promise<Job>;
  /** Stop polling; `done` rejects with PollCancelled. */
  cancel(): void;
}

/**
 * Poll a job until it reaches a terminal state. The handle is cancelable so
 * a view can abandon its poll on navigation without leaking timers. A fetch
 * failure rejects `done`; the caller decides whether to re-poll (the job
 * keeps running server-side either way).
 */
export function pollJob(
  api: StudioApi,
  jobId: string,
  intervalMs: number = POLL_INTERVAL_MS,
  onUpdate?: (job: Job) => void,
): PollHandle {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let cancelled = false;
  let rejectDone: (err: unknown) => void = () => {};

  const done = new Promise<Job>((resolve, reject) => {
    rejectDone = reject;
    const tick = async () => {
      let job: Job;
      try {
        job = await api.getJob(jobId);
      } catch (err) {
        if (!cancelled) reject(err);
        return;
      }
      if (cancelled) return;
      onUpdate?.(job);
      if (job.state === "done" || job.state === "error") {
        resolve(job);
        return;
      }
      timer = setTimeout(tick, intervalMs);
    };
    tick();
  });
  // a cancelled poll is not an unhandled rejection if nobody awaits it
  done.catch(() => {});

  return {
    done,
    cancel() {
      if (cancelled) return;
      cancelled = true;
      if (timer !== null) clearTimeout(timer);
      rejectDone(new PollCancelled());
    },
  };
}
