import { h } from "./dom.js";
import type { SessionSummary, ServiceError } from "../types.js";
import { timeOfDay } from "../format.js";

export interface SessionListHandlers {
  create(body: {
    chart: Record<string, unknown>;
    background_png_base64: string;
    name: string;
    config: Record<string, unknown>;
  }): void;
}

const STARTER_CHART = JSON.stringify(
  {
    idiom: "bar",
    canvas: { width: 200, height: 160 },
    data: { series: [{ label: "s", values: [3, 7, 5] }] },
  },
  null,
  2,
);

export function renderSessionList(
  sessions: SessionSummary[],
  error: ServiceError | null,
  handlers: SessionListHandlers,
): HTMLElement {
  const rows = sessions.map((s) =>
    h(
      "a",
      { className: "session-row", href: `#/session/${s.id}` },
      h("span", { className: "session-name" }, s.name || s.id),
      h(
        "span",
        { className: "session-meta" },
        `${s.iteration_count} iteration${s.iteration_count === 1 ? "" : "s"}`,
        s.busy ? h("span", { className: "busy-dot", title: "generation running" }, " ●") : null,
      ),
      h("span", { className: "session-time" }, timeOfDay(s.created_at)),
    ),
  );

  return h(
    "div",
    { className: "page" },
    h("h1", {}, "sitblend studio"),
    h(
      "section",
      { className: "panel" },
      h("h2", {}, "Sessions"),
      sessions.length
        ? h("div", { className: "session-list" }, ...rows)
        : h("p", { className: "hint" }, "No sessions yet. Create one below."),
    ),
    renderCreateForm(error, handlers),
  );
}

function renderCreateForm(
  error: ServiceError | null,
  handlers: SessionListHandlers,
): HTMLElement {
  const nameInput = h("input", { type: "text", placeholder: "session name" });
  const chartInput = h("textarea", { rows: "8", value: STARTER_CHART });
  const configInput = h("textarea", { rows: "3", placeholder: "{} (config overrides)" });
  const fileInput = h("input", { type: "file", accept: "image/png" });
  const errBox = h("p", { className: "error-box", hidden: true });

  const fail = (message: string) => {
    errBox.textContent = message;
    errBox.hidden = false;
  };

  const form = h(
    "form",
    {
      className: "panel create-form",
      onSubmit: (ev: Event) => {
        ev.preventDefault();
        errBox.hidden = true;
        let chart: Record<string, unknown>;
        let config: Record<string, unknown> = {};
        try {
          chart = JSON.parse(chartInput.value);
        } catch {
          fail("chart document is not valid JSON");
          return;
        }
        try {
          if (configInput.value.trim()) config = JSON.parse(configInput.value);
        } catch {
          fail("config is not valid JSON");
          return;
        }
        const file = fileInput.files?.[0];
        if (!file) {
          fail("choose a background PNG");
          return;
        }
        void fileToBase64(file).then((b64) =>
          handlers.create({
            chart,
            background_png_base64: b64,
            name: nameInput.value,
            config,
          }),
        );
      },
    },
    h("h2", {}, "New session"),
    h("label", {}, "Name", nameInput),
    h("label", {}, "Chart document", chartInput),
    h("label", {}, "Background photo (PNG)", fileInput),
    h("label", {}, "Config overrides", configInput),
    errBox,
    error ? h("p", { className: "error-box" }, `${error.stage}: ${error.message}`) : null,
    h("button", { type: "submit" }, "Create session"),
  );
  return form;
}

function fileToBase64(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => {
      // data:image/png;base64,<payload>
      const url = String(reader.result);
      resolve(url.slice(url.indexOf(",") + 1));
    };
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
}
