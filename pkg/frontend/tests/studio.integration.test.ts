/**
 * The full studio loop against a real mock-backed service process:
 * create a session, submit three iterations with distinct prompts, check the
 * history shows three completed cards with the right prompts and live
 * thumbnails, and that the compare view renders the artifact quartet for
 * both chosen iterations.
 *
 * Cross-origin fetches to the service's ephemeral port rely on the
 * disableSameOriginPolicy setting in vitest.config.ts; the deployed UI is
 * served same-origin by the service and needs no such latitude.
 */
import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { App } from "../src/app.js";
import { StudioApi } from "../src/api.js";
import { QUARTET } from "../src/types.js";

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47];

const CHART = {
  idiom: "bar",
  canvas: { width: 200, height: 160 },
  data: { series: [{ label: "s", values: [3, 7, 5] }] },
};

const PROMPTS = [
  "a mural of a bar chart on a brick wall",
  "a bar chart as garden hedges",
  "a mosaic bar chart on a bathroom wall",
];

let server: ChildProcess;
let base: string;
let dataDir: string;
let backgroundB64: string;
let root: HTMLElement;
let app: App;

function freePort(): Promise<number> {
  return new Promise((resolve) => {
    const probe = net.createServer();
    probe.listen(0, "127.0.0.1", () => {
      const port = (probe.address() as net.AddressInfo).port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitForHealth(url: string, timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const res = await fetch(`${url}/api/health`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) throw new Error(`service at ${url} never became healthy`);
    await sleep(250);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function fetchPng(url: string): Promise<Uint8Array> {
  const res = await fetch(url);
  expect(res.ok, `GET ${url} -> ${res.status}`).toBe(true);
  const bytes = new Uint8Array(await res.arrayBuffer());
  expect([...bytes.slice(0, 4)]).toEqual(PNG_SIGNATURE);
  return bytes;
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "studio-itest-"));

  const wall = join(dataDir, "wall.png");
  execFileSync("python3", [
    "-c",
    [
      "import sys",
      "import numpy as np",
      "from sitblend.png import encode_png",
      "rng = np.random.default_rng(11)",
      "img = np.clip(rng.normal(150, 14, (240, 320, 3)), 0, 255).astype(np.uint8)",
      "open(sys.argv[1], 'wb').write(encode_png(img))",
    ].join("\n"),
    wall,
  ]);
  backgroundB64 = readFileSync(wall).toString("base64");

  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    "python3",
    ["-m", "sitblend.cli", "serve", "--mock", "--port", String(port), "--data-dir", dataDir],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  server.stderr?.on("data", () => {});
  await waitForHealth(base);

  root = document.createElement("div");
  document.body.append(root);
  app = new App(new StudioApi(base), root, window);
}, 120_000);

afterAll(() => {
  server?.kill("SIGTERM");
  root?.remove();
  rmSync(dataDir, { recursive: true, force: true });
});

describe("studio loop", () => {
  let sessionId: string;

  it("creates a session and lands on its page", async () => {
    await app.createSession({
      chart: CHART,
      background_png_base64: backgroundB64,
      name: "itest wall",
      config: {},
    });

    const match = window.location.hash.match(/#\/session\/([0-9a-f]{12})/);
    expect(match, `hash is ${window.location.hash}`).not.toBeNull();
    sessionId = match![1]!;

    await app.navigate();
    expect(root.textContent).toContain("itest wall");
    expect(root.querySelectorAll(".card").length).toBe(0);
  });

  it("three submissions produce three completed cards with their prompts", async () => {
    for (let i = 0; i < PROMPTS.length; i++) {
      const submission = app.submitIteration({
        prompt: PROMPTS[i]!,
        seed: 11 + i,
        outlineWeight: 1.0,
        styleWeight: 0.8,
        mode: "additive",
        upscale: false,
      });
      // optimistic pending card appears before the job lands
      await sleep(50);
      expect(root.querySelector(".card-pending")).not.toBeNull();
      expect(
        root.querySelector<HTMLButtonElement>('button[type="submit"]')?.disabled,
      ).toBe(true);
      await submission;
      expect(root.querySelector(".card-pending")).toBeNull();
    }

    const cards = [...root.querySelectorAll(".card")];
    expect(cards.length).toBe(3);
    expect(cards.map((c) => c.className)).toEqual([
      "card card-completed",
      "card card-completed",
      "card card-completed",
    ]);
    expect(cards.map((c) => c.querySelector(".card-prompt")?.textContent)).toEqual(
      PROMPTS,
    );
    expect(cards.map((c) => c.getAttribute("data-iteration"))).toEqual(["0", "1", "2"]);
  }, 120_000);

  it("every card badge carries a passing legibility score", () => {
    const badges = [...root.querySelectorAll(".badge")];
    expect(badges.length).toBe(3);
    for (const badge of badges) {
      expect(badge.className).toContain("badge-pass");
      expect(badge.textContent).toMatch(/^legible (0\.9\d|1\.00)$/);
    }
  });

  it("thumbnails point at each iteration's output and serve distinct PNGs", async () => {
    const sources = [...root.querySelectorAll<HTMLImageElement>("img.thumb")].map(
      (img) => img.getAttribute("src"),
    );
    expect(sources).toEqual(
      [0, 1, 2].map(
        (i) => `${base}/api/sessions/${sessionId}/iterations/${i}/artifact/output`,
      ),
    );

    const bodies = [];
    for (const src of sources) bodies.push(await fetchPng(src!));
    // distinct seeds tint differently; identical outputs would mean the
    // iterations are not actually independent runs
    expect(Buffer.from(bodies[0]!).equals(Buffer.from(bodies[1]!))).toBe(false);
    expect(Buffer.from(bodies[1]!).equals(Buffer.from(bodies[2]!))).toBe(false);
  });

  it("compare view renders the full quartet for both iterations", async () => {
    window.location.hash = `#/session/${sessionId}/compare/0/2`;
    await app.navigate();

    const columns = root.querySelectorAll(".compare-column");
    expect(columns.length).toBe(2);

    for (const [column, index] of [
      [columns[0]!, 0],
      [columns[1]!, 2],
    ] as const) {
      const main = column.querySelector<HTMLImageElement>("img.artifact-main");
      expect(main?.getAttribute("src")).toBe(
        `${base}/api/sessions/${sessionId}/iterations/${index}/artifact/output`,
      );
      const slots = [...column.querySelectorAll<HTMLImageElement>("img.artifact-thumb")];
      expect(slots.map((img) => img.getAttribute("data-artifact"))).toEqual(QUARTET);
      for (const name of QUARTET) {
        await fetchPng(
          `${base}/api/sessions/${sessionId}/iterations/${index}/artifact/${name}`,
        );
      }
      expect(column.querySelectorAll(".placeholder").length).toBe(0);
    }
  }, 120_000);

  it("the artifact selector switches both columns together", () => {
    root.querySelector<HTMLButtonElement>('[data-artifact="outline"]')!.click();

    const mains = [...root.querySelectorAll<HTMLImageElement>("img.artifact-main")];
    expect(mains.length).toBe(2);
    for (const img of mains) {
      expect(img.getAttribute("src")).toMatch(/\/artifact\/outline$/);
    }
  });

  it("a second submission while one runs is rejected with the busy stage", async () => {
    window.location.hash = `#/session/${sessionId}`;
    await app.navigate();

    const first = app.submitIteration({
      prompt: "a fresco",
      seed: 99,
      outlineWeight: 1.0,
      styleWeight: 0.8,
      mode: "additive",
      upscale: false,
    });
    await sleep(50);

    // the client-side guard is busy; hit the service directly to see the 409
    const res = await fetch(`${base}/api/sessions/${sessionId}/iterations`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ prompt: "too eager" }),
    });
    expect(res.status).toBe(409);
    const body = await res.json();
    expect(body.stage).toBe("session");

    await first;
    expect(root.querySelectorAll(".card").length).toBe(4);
  }, 120_000);
});
