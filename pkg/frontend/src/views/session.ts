import { h } from "./dom.js";
import { legibilityBadge, paramsDelta, timeOfDay } from "../format.js";
import type { PendingCard } from "../state.js";
import type {
  ArtifactName,
  IterationRecord,
  LegibilityReport,
  SessionDetail,
  ServiceError,
} from "../types.js";

export interface IterationForm {
  prompt: string;
  seed: number | null;
  outlineWeight: number;
  styleWeight: number;
  mode: "additive" | "blend";
  upscale: boolean;
}

export interface SessionViewArgs {
  detail: SessionDetail;
  reports: Map<number, LegibilityReport>;
  pending: PendingCard | null;
  busy: boolean;
  error: ServiceError | null;
  artifactUrl(id: string, index: number, name: ArtifactName): string;
  onSubmit(form: IterationForm): void;
  onRetry(): void;
}

function sectionNumber(
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

function sectionString(
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

export function renderSessionView(args: SessionViewArgs): HTMLElement {
  const { detail } = args;
  const cards = [...detail.iterations]
    .sort((a, b) => a.index - b.index)
    .map((it) => renderCard(it, args));
  if (args.pending) cards.push(renderPendingCard(args.pending));

  return h(
    "div",
    { className: "page" },
    h(
      "header",
      { className: "session-header" },
      h("a", { href: "#/" }, "← sessions"),
      h("h1", {}, detail.name || detail.id),
      h("span", { className: "session-meta" }, `session ${detail.id}`),
      detail.iterations.length >= 2
        ? h(
            "a",
            {
              className: "compare-link",
              href: `#/session/${detail.id}/compare/${compareDefaults(detail)}`,
            },
            "compare",
          )
        : null,
    ),
    h(
      "section",
      { className: "panel" },
      h("h2", {}, "History"),
      cards.length
        ? h("div", { className: "card-list" }, ...cards)
        : h("p", { className: "hint" }, "No iterations yet."),
    ),
    renderIterationForm(args),
  );
}

function compareDefaults(detail: SessionDetail): string {
  const completed = detail.iterations.filter((it) => it.status === "completed");
  const last = completed[completed.length - 1];
  const prev = completed[completed.length - 2];
  return `${prev ? prev.index : 0}/${last ? last.index : 1}`;
}

function renderCard(it: IterationRecord, args: SessionViewArgs): HTMLElement {
  const badge = legibilityBadge(args.reports.get(it.index));
  const prompt = it.params.prompt ?? "(session default prompt)";
  const thumb =
    it.status === "completed"
      ? h("img", {
          className: "thumb",
          src: args.artifactUrl(args.detail.id, it.index, "output"),
          alt: `iteration ${it.index} output`,
        })
      : h("div", { className: "thumb thumb-failed" }, "failed");

  return h(
    "article",
    { className: `card card-${it.status}`, "data-iteration": String(it.index) },
    thumb,
    h(
      "div",
      { className: "card-body" },
      h(
        "div",
        { className: "card-top" },
        h("span", { className: "card-index" }, `#${it.index}`),
        h("span", { className: `badge ${badge.cls}` }, badge.text),
        h("span", { className: "card-time" }, timeOfDay(it.created_at)),
      ),
      h("p", { className: "card-prompt" }, prompt),
      h("p", { className: "card-delta" }, paramsDelta(it.params)),
      it.error
        ? h("p", { className: "error-box" }, `${it.error.stage}: ${it.error.message}`)
        : null,
    ),
  );
}

function renderPendingCard(pending: PendingCard): HTMLElement {
  return h(
    "article",
    { className: "card card-pending", "data-iteration": String(pending.index) },
    h("div", { className: "thumb thumb-pending" }, pending.state),
    h(
      "div",
      { className: "card-body" },
      h(
        "div",
        { className: "card-top" },
        h("span", { className: "card-index" }, `#${pending.index}`),
        h("span", { className: "badge badge-none spin" }, pending.state),
        h("span", { className: "card-time" }, timeOfDay(pending.startedAt)),
      ),
      h("p", { className: "card-prompt" }, pending.prompt),
    ),
  );
}

function renderIterationForm(args: SessionViewArgs): HTMLElement {
  const config = args.detail.config ?? {};
  const baseOutline = sectionNumber(config, "generation", "outline_weight", 1.0);
  const baseStyle = sectionNumber(config, "generation", "style_weight", 0.8);
  const baseMode = sectionString(config, "compose", "mode", "additive");

  const promptInput = h("textarea", {
    rows: "2",
    placeholder: "prompt for the next iteration",
  });
  const seedInput = h("input", { type: "number", placeholder: "random" });
  const outlineSlider = slider(baseOutline, 0, 2);
  const styleSlider = slider(baseStyle, 0, 2);
  const outlineReadout = h("span", { className: "readout" }, baseOutline.toFixed(2));
  const styleReadout = h("span", { className: "readout" }, baseStyle.toFixed(2));
  outlineSlider.addEventListener("input", () => {
    outlineReadout.textContent = Number(outlineSlider.value).toFixed(2);
  });
  styleSlider.addEventListener("input", () => {
    styleReadout.textContent = Number(styleSlider.value).toFixed(2);
  });
  const modeToggle = h(
    "select",
    {},
    h("option", { value: "additive" }, "additive (keep surroundings)"),
    h("option", { value: "blend" }, "blend (repaint surroundings)"),
  );
  modeToggle.value = baseMode;
  const upscaleBox = h("input", { type: "checkbox" });

  const submit = h(
    "button",
    {
      type: "submit",
      disabled: args.busy,
      title: args.busy ? "a generation is already running for this session" : null,
    },
    args.busy ? "generating…" : "Generate",
  );

  return h(
    "form",
    {
      className: "panel iterate-form",
      onSubmit: (ev: Event) => {
        ev.preventDefault();
        if (args.busy) return;
        const seedRaw = seedInput.value.trim();
        args.onSubmit({
          prompt: promptInput.value.trim(),
          seed: seedRaw === "" ? null : Number(seedRaw),
          outlineWeight: Number(outlineSlider.value),
          styleWeight: Number(styleSlider.value),
          mode: modeToggle.value as "additive" | "blend",
          upscale: upscaleBox.checked,
        });
      },
    },
    h("h2", {}, "Next iteration"),
    h("label", {}, "Prompt", promptInput),
    h(
      "div",
      { className: "form-row" },
      h("label", {}, "Seed", seedInput),
      h("label", {}, "Mode", modeToggle),
      h("label", { className: "check" }, upscaleBox, "upscale"),
    ),
    h(
      "div",
      { className: "form-row" },
      h("label", {}, "Outline weight", outlineSlider, outlineReadout),
      h("label", {}, "Style weight", styleSlider, styleReadout),
    ),
    args.error
      ? h(
          "p",
          { className: "error-box" },
          `${args.error.stage}: ${args.error.message} `,
          h(
            "button",
            {
              type: "button",
              className: "retry",
              onClick: () => args.onRetry(),
            },
            "retry",
          ),
        )
      : null,
    submit,
  );
}

function slider(value: number, min: number, max: number): HTMLInputElement {
  return h("input", {
    type: "range",
    min: String(min),
    max: String(max),
    step: "0.05",
    value: String(value),
  });
}
