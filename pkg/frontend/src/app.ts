import { ApiError, NetworkError, StudioApi } from "./api.js";
import type { CreateSessionBody } from "./api.js";
import { POLL_INTERVAL_MS, PollCancelled, pollJob } from "./poll.js";
import type { PollHandle } from "./poll.js";
import { SessionStore } from "./state.js";
import { SyncZoom } from "./zoom.js";
import { clear, h } from "./views/dom.js";
import { renderCompareView } from "./views/compare.js";
import { renderSessionList } from "./views/sessions.js";
import { renderSessionView } from "./views/session.js";
import type { IterationForm } from "./views/session.js";
import type { ArtifactName, HealthResponse } from "./types.js";

type Route =
  | { kind: "sessions" }
  | { kind: "session"; id: string }
  | { kind: "compare"; id: string; a: number; b: number };

export function parseRoute(hash: string): Route {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts[0] === "session" && parts[1]) {
    if (parts[2] === "compare" && parts[3] !== undefined && parts[4] !== undefined) {
      return {
        kind: "compare",
        id: parts[1],
        a: Number(parts[3]),
        b: Number(parts[4]),
      };
    }
    return { kind: "session", id: parts[1] };
  }
  return { kind: "sessions" };
}

/**
 * The single-page shell: owns the store, the current route, and the one
 * in-flight poll. Navigation cancels the poll; the server-side job keeps
 * running and the busy flag keeps the form disabled until it lands.
 */
export class App {
  readonly store = new SessionStore();
  route: Route = { kind: "sessions" };
  selectedArtifact: ArtifactName = "output";
  zoom = new SyncZoom();
  health: HealthResponse | null = null;

  private activePoll: PollHandle | null = null;
  private lastForm: IterationForm | null = null;
  private busyTimer: ReturnType<typeof setTimeout> | null = null;
  private navToken = 0;

  constructor(
    readonly api: StudioApi,
    readonly root: HTMLElement,
    readonly win: Window = window,
  ) {
    this.store.subscribe(() => this.render());
  }

  start(): void {
    this.win.addEventListener("hashchange", () => void this.navigate());
    void this.api
      .health()
      .then((health) => {
        this.health = health;
        this.render();
      })
      .catch(() => {});
    void this.navigate();
  }

  /** Re-read the hash, cancel any poll owned by the previous view, load. */
  async navigate(): Promise<void> {
    const token = ++this.navToken;
    this.route = parseRoute(this.win.location.hash);
    this.cancelPoll();
    this.clearBusyTimer();
    this.store.setError(null);

    if (this.route.kind === "sessions") {
      const sessions = await this.api.listSessions().catch(() => []);
      if (token !== this.navToken) return;
      this.store.setSessions(sessions);
      return;
    }

    const id = this.route.id;
    if (this.store.detail?.id !== id) this.store.setDetail(null);
    if (this.route.kind === "compare") {
      this.zoom = new SyncZoom();
      this.selectedArtifact = "output";
    }
    await this.refreshSession(id, token);
  }

  private async refreshSession(id: string, token: number): Promise<void> {
    let detail;
    try {
      detail = await this.api.getSession(id);
    } catch (err) {
      if (token !== this.navToken) return;
      this.store.setError(toServiceError(err));
      return;
    }
    if (token !== this.navToken) return;
    this.store.setDetail(detail);
    await this.loadMissingReports(token);
    this.scheduleBusyRefresh(id, token);
  }

  private async loadMissingReports(token: number): Promise<void> {
    const detail = this.store.detail;
    if (!detail) return;
    for (const it of detail.iterations) {
      if (it.status !== "completed" || this.store.reports.has(it.index)) continue;
      try {
        const report = await this.api.getReport(detail.id, it.index);
        if (token !== this.navToken) return;
        this.store.setReport(it.index, report);
      } catch {
        // failed or pre-verification iteration has no report; badge says so
      }
    }
  }

  /**
   * A session can be busy with a job this client did not start (another tab,
   * a cancelled poll). Mirror server truth by re-reading until it clears.
   */
  private scheduleBusyRefresh(id: string, token: number): void {
    this.clearBusyTimer();
    const detail = this.store.detail;
    if (!detail || !detail.busy || this.store.pending) return;
    this.busyTimer = setTimeout(() => {
      if (token === this.navToken) void this.refreshSession(id, token);
    }, POLL_INTERVAL_MS);
  }

  async createSession(body: CreateSessionBody): Promise<void> {
    try {
      const summary = await this.api.createSession(body);
      this.win.location.hash = `#/session/${summary.id}`;
    } catch (err) {
      this.store.setError(toServiceError(err));
    }
  }

  async submitIteration(form: IterationForm): Promise<void> {
    const detail = this.store.detail;
    if (!detail || this.store.busy) return;
    this.lastForm = form;

    const body = {
      prompt: form.prompt || undefined,
      seed: form.seed ?? undefined,
      overrides: buildOverrides(detail.config ?? {}, form),
    };
    let started;
    try {
      started = await this.api.submitIteration(detail.id, body);
    } catch (err) {
      this.store.setError(toServiceError(err));
      return;
    }

    this.store.beginPending({
      index: started.iteration,
      prompt: form.prompt || "(session default prompt)",
      jobId: started.job.id,
      state: started.job.state,
      startedAt: new Date().toISOString(),
    });

    const token = this.navToken;
    this.activePoll = pollJob(this.api, started.job.id, POLL_INTERVAL_MS, (job) =>
      this.store.updatePendingState(job.state),
    );
    try {
      const job = await this.activePoll.done;
      if (job.state === "error" && job.error) this.store.setError(job.error);
    } catch (err) {
      if (err instanceof PollCancelled) return;
      this.store.setError(toServiceError(err));
      this.store.clearPending();
      return;
    } finally {
      this.activePoll = null;
    }
    // terminal job: the iteration is recorded server-side; reconcile
    await this.refreshSession(detail.id, token);
  }

  retryLast(): void {
    this.store.setError(null);
    if (this.lastForm) void this.submitIteration(this.lastForm);
  }

  private cancelPoll(): void {
    if (this.activePoll) {
      this.activePoll.cancel();
      this.activePoll = null;
      // the job survives the cancel; busy-refresh picks the result up later
      this.store.clearPending();
    }
  }

  private clearBusyTimer(): void {
    if (this.busyTimer !== null) {
      clearTimeout(this.busyTimer);
      this.busyTimer = null;
    }
  }

  render(): void {
    clear(this.root);
    if (this.health && !this.health.backend.reachable) {
      this.root.append(
        h(
          "div",
          { className: "health-banner" },
          `generation backend unreachable at ${this.health.backend.url}; ` +
            "runs will fail until it returns",
        ),
      );
    }

    const route = this.route;
    if (route.kind === "sessions") {
      this.root.append(
        renderSessionList(this.store.sessions, this.store.lastError, {
          create: (body) => void this.createSession(body),
        }),
      );
      return;
    }

    const detail = this.store.detail;
    if (!detail || detail.id !== route.id) {
      this.root.append(
        h(
          "div",
          { className: "page" },
          this.store.lastError
            ? h(
                "p",
                { className: "error-box" },
                `${this.store.lastError.stage}: ${this.store.lastError.message}`,
              )
            : h("p", { className: "hint" }, "loading…"),
        ),
      );
      return;
    }

    if (route.kind === "session") {
      this.root.append(
        renderSessionView({
          detail,
          reports: this.store.reports,
          pending: this.store.pending,
          busy: this.store.busy,
          error: this.store.lastError,
          artifactUrl: (id, index, name) => this.api.artifactUrl(id, index, name),
          onSubmit: (form) => void this.submitIteration(form),
          onRetry: () => this.retryLast(),
        }),
      );
      return;
    }

    this.root.append(
      renderCompareView({
        detail,
        a: route.a,
        b: route.b,
        selected: this.selectedArtifact,
        zoom: this.zoom,
        artifactUrl: (id, index, name) => this.api.artifactUrl(id, index, name),
        onSelect: (name) => {
          this.selectedArtifact = name;
          this.render();
        },
        onPick: (side, index) => {
          const a = side === "a" ? index : route.a;
          const b = side === "b" ? index : route.b;
          this.win.location.hash = `#/session/${route.id}/compare/${a}/${b}`;
        },
      }),
    );
  }
}

function toServiceError(err: unknown): { stage: string; message: string } {
  if (err instanceof ApiError) return { stage: err.stage, message: err.message };
  if (err instanceof NetworkError) {
    return { stage: "network", message: `request failed: ${err.message}` };
  }
  return { stage: "internal", message: String(err) };
}

/** Only values the user actually moved off the session baseline become overrides. */
export function buildOverrides(
  config: Record<string, unknown>,
  form: IterationForm,
): Record<string, unknown> {
  const overrides: Record<string, unknown> = {};
  const generation: Record<string, unknown> = {};
  const baseOutline = readNumber(config, "generation", "outline_weight", 1.0);
  const baseStyle = readNumber(config, "generation", "style_weight", 0.8);
  const baseMode = readString(config, "compose", "mode", "additive");
  if (form.outlineWeight !== baseOutline) generation.outline_weight = form.outlineWeight;
  if (form.styleWeight !== baseStyle) generation.style_weight = form.styleWeight;
  if (Object.keys(generation).length) overrides.generation = generation;
  if (form.mode !== baseMode) overrides.compose = { mode: form.mode };
  if (form.upscale) overrides.upscale = { enabled: true };
  return overrides;
}

function readNumber(
  config: Record<string, unknown>,
  section: string,
  key: string,
  fallback: number,
): number {
  const sub = config[section];
  if (sub && typeof sub === "object") {
    const v = (sub as Record<string, unknown>)[key];
    if (typeof v === "number") return v;
  }
  return fallback;
}

function readString(
  config: Record<string, unknown>,
  section: string,
  key: string,
  fallback: string,
): string {
  const sub = config[section];
  if (sub && typeof sub === "object") {
    const v = (sub as Record<string, unknown>)[key];
    if (typeof v === "string") return v;
  }
  return fallback;
}
