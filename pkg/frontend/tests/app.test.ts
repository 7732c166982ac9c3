import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { App, buildOverrides, parseRoute } from "../src/app.js";
import type { StudioApi } from "../src/api.js";
import type { IterationForm } from "../src/views/session.js";
import type { Job, SessionDetail } from "../src/types.js";

describe("parseRoute", () => {
  it("maps hashes to routes", () => {
    expect(parseRoute("")).toEqual({ kind: "sessions" });
    expect(parseRoute("#/")).toEqual({ kind: "sessions" });
    expect(parseRoute("#/session/abc")).toEqual({ kind: "session", id: "abc" });
    expect(parseRoute("#/session/abc/compare/0/2")).toEqual({
      kind: "compare",
      id: "abc",
      a: 0,
      b: 2,
    });
  });

  it("falls back to the session list on junk", () => {
    expect(parseRoute("#/nonsense/42")).toEqual({ kind: "sessions" });
  });
});

describe("buildOverrides", () => {
  const form = (over: Partial<IterationForm> = {}): IterationForm => ({
    prompt: "p",
    seed: null,
    outlineWeight: 1.0,
    styleWeight: 0.8,
    mode: "additive",
    upscale: false,
    ...over,
  });

  it("is empty when nothing moved off the baseline", () => {
    expect(buildOverrides({}, form())).toEqual({});
  });

  it("includes only the sliders that moved", () => {
    expect(buildOverrides({}, form({ outlineWeight: 1.4 }))).toEqual({
      generation: { outline_weight: 1.4 },
    });
  });

  it("compares against the session's own config, not the global default", () => {
    const config = { generation: { outline_weight: 1.4 } };
    expect(buildOverrides(config, form({ outlineWeight: 1.4 }))).toEqual({});
    expect(buildOverrides(config, form({ outlineWeight: 1.0 }))).toEqual({
      generation: { outline_weight: 1.0 },
    });
  });

  it("mode toggle and upscale flag become section overrides", () => {
    expect(buildOverrides({}, form({ mode: "blend", upscale: true }))).toEqual({
      compose: { mode: "blend" },
      upscale: { enabled: true },
    });
  });
});

function completedDetail(indexes: number[], busy = false): SessionDetail {
  return {
    id: "sess00000001",
    name: "wall",
    created_at: "2026-02-11T08:00:00+00:00",
    iteration_count: indexes.length,
    busy,
    config: {},
    chart: { idiom: "bar" },
    iterations: indexes.map((index) => ({
      index,
      status: "completed" as const,
      created_at: "2026-02-11T08:30:00+00:00",
      params: { prompt: `p${index}`, seed: null, overrides: {} },
      run_id: `run${index}`,
      error: null,
      parent_hash: "0".repeat(64),
      record_hash: "f".repeat(64),
    })),
  };
}

const REPORT = {
  edge_alignment: 1,
  alignment_threshold: 0.9,
  alignment_ok: true,
  tolerance_px: 2,
  bars: [],
  bars_ok: true,
  colour: "not assessed",
  passed: true,
};

/**
 * Scripted service: one session, submit accepts iteration 1, the job needs
 * two polls to land, after which the detail includes the new iteration.
 */
function fakeApi() {
  let submitted = false;
  let polls = 0;
  const api = {
    artifactUrl: (id: string, index: number, name: string) =>
      `/api/sessions/${id}/iterations/${index}/artifact/${name}`,
    health: vi.fn(async () => ({
      status: "ok",
      version: "0",
      backend: { url: "mock", reachable: true },
      sessions: 1,
    })),
    listSessions: vi.fn(async () => []),
    getSession: vi.fn(async () =>
      submitted && polls >= 2 ? completedDetail([0, 1]) : completedDetail([0]),
    ),
    getReport: vi.fn(async () => REPORT),
    submitIteration: vi.fn(async () => {
      submitted = true;
      const job: Job = {
        id: "job1",
        session_id: "sess00000001",
        iteration: 1,
        state: "queued",
        error: null,
      };
      return { iteration: 1, job };
    }),
    getJob: vi.fn(async (): Promise<Job> => {
      polls += 1;
      return {
        id: "job1",
        session_id: "sess00000001",
        iteration: 1,
        state: polls >= 2 ? "done" : "running",
        error: null,
      };
    }),
  };
  return api as unknown as StudioApi & typeof api;
}

describe("App submit flow", () => {
  let root: HTMLElement;

  beforeEach(() => {
    vi.useFakeTimers();
    root = document.createElement("div");
    document.body.append(root);
    window.location.hash = "#/session/sess00000001";
  });

  afterEach(() => {
    vi.useRealTimers();
    root.remove();
    window.location.hash = "";
  });

  const form: IterationForm = {
    prompt: "a mosaic",
    seed: 5,
    outlineWeight: 1.0,
    styleWeight: 0.8,
    mode: "additive",
    upscale: false,
  };

  it("shows an optimistic pending card, then reconciles to server truth", async () => {
    const api = fakeApi();
    const app = new App(api, root, window);
    await app.navigate();
    expect(root.querySelectorAll(".card").length).toBe(1);

    const submission = app.submitIteration(form);
    await vi.advanceTimersByTimeAsync(0);

    // optimistic: the card exists before any poll completes
    const pending = root.querySelector(".card-pending");
    expect(pending?.getAttribute("data-iteration")).toBe("1");
    expect(pending?.querySelector(".card-prompt")?.textContent).toBe("a mosaic");
    expect(
      root.querySelector<HTMLButtonElement>('button[type="submit"]')?.disabled,
    ).toBe(true);

    await vi.advanceTimersByTimeAsync(4000);
    await submission;

    expect(root.querySelector(".card-pending")).toBeNull();
    const cards = [...root.querySelectorAll(".card")];
    expect(cards.length).toBe(2);
    expect(cards[1]?.className).toContain("card-completed");
    expect(api.getJob.mock.calls.length).toBe(2);
  });

  it("passes prompt and seed through to the service", async () => {
    const api = fakeApi();
    const app = new App(api, root, window);
    await app.navigate();

    const submission = app.submitIteration(form);
    await vi.advanceTimersByTimeAsync(6000);
    await submission;

    expect(api.submitIteration).toHaveBeenCalledWith("sess00000001", {
      prompt: "a mosaic",
      seed: 5,
      overrides: {},
    });
  });

  it("a service rejection surfaces inline and leaves no pending card", async () => {
    const api = fakeApi();
    (api.submitIteration as ReturnType<typeof vi.fn>).mockRejectedValue(
      Object.assign(new Error("generation in flight"), {
        name: "ApiError",
        stage: "session",
      }),
    );
    const app = new App(api, root, window);
    await app.navigate();

    await app.submitIteration(form);

    expect(root.querySelector(".card-pending")).toBeNull();
    expect(root.querySelector(".iterate-form .error-box")?.textContent).toContain(
      "generation in flight",
    );
  });

  it("navigation cancels the poll and clears the pending card", async () => {
    const api = fakeApi();
    const app = new App(api, root, window);
    await app.navigate();

    const submission = app.submitIteration(form);
    await vi.advanceTimersByTimeAsync(0);
    expect(root.querySelector(".card-pending")).not.toBeNull();

    window.location.hash = "#/";
    await app.navigate();
    await submission;

    expect(app.store.pending).toBeNull();
    const polls = api.getJob.mock.calls.length;
    await vi.advanceTimersByTimeAsync(10_000);
    expect(api.getJob.mock.calls.length).toBe(polls);
  });

  it("loads reports for completed iterations so cards get badges", async () => {
    const api = fakeApi();
    const app = new App(api, root, window);
    await app.navigate();

    expect(api.getReport).toHaveBeenCalledWith("sess00000001", 0);
    expect(root.querySelector(".badge")?.textContent).toBe("legible 1.00");
  });
});
