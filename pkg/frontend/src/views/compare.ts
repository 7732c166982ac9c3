import { h } from "./dom.js";
import type { SyncZoom } from "../zoom.js";
import type { ArtifactName, IterationRecord, SessionDetail } from "../types.js";
import { QUARTET } from "../types.js";

export interface CompareViewArgs {
  detail: SessionDetail;
  a: number;
  b: number;
  selected: ArtifactName;
  zoom: SyncZoom;
  artifactUrl(id: string, index: number, name: ArtifactName): string;
  onSelect(name: ArtifactName): void;
  onPick(side: "a" | "b", index: number): void;
}

export function renderCompareView(args: CompareViewArgs): HTMLElement {
  const selector = h(
    "div",
    { className: "artifact-selector" },
    ...QUARTET.map((name) =>
      h(
        "button",
        {
          type: "button",
          className: name === args.selected ? "selected" : null,
          "data-artifact": name,
          onClick: () => args.onSelect(name),
        },
        name,
      ),
    ),
    h(
      "button",
      { type: "button", className: "reset-zoom", onClick: () => args.zoom.reset() },
      "reset zoom",
    ),
  );

  return h(
    "div",
    { className: "page page-compare" },
    h(
      "header",
      { className: "session-header" },
      h("a", { href: `#/session/${args.detail.id}` }, "← back"),
      h("h1", {}, "Compare"),
      selector,
    ),
    h(
      "div",
      { className: "compare-columns" },
      renderColumn("a", args.a, args),
      renderColumn("b", args.b, args),
    ),
  );
}

function renderColumn(
  side: "a" | "b",
  index: number,
  args: CompareViewArgs,
): HTMLElement {
  const iteration = args.detail.iterations.find((it) => it.index === index);
  const picker = h(
    "select",
    {
      className: "iteration-picker",
      onChange: (ev: Event) =>
        args.onPick(side, Number((ev.target as HTMLSelectElement).value)),
    },
    ...args.detail.iterations.map((it) =>
      h(
        "option",
        { value: String(it.index) },
        `#${it.index} ${it.status === "completed" ? "" : "(failed)"} ${
          it.params.prompt ?? ""
        }`.trim(),
      ),
    ),
  );
  picker.value = String(index);

  const viewportInner = h(
    "div",
    { className: "zoom-layer" },
    artifactSlot(iteration, args.selected, args, "main"),
  );
  args.zoom.attach(viewportInner);
  const viewport = h("div", { className: "viewport" }, viewportInner);
  args.zoom.bind(viewport);

  // the full quartet stays visible under the main viewport, so the
  // comparison unit is all four artifacts, not just the selected one
  const strip = h(
    "div",
    { className: "quartet-strip" },
    ...QUARTET.map((name) =>
      h(
        "figure",
        {
          className: name === args.selected ? "slot selected" : "slot",
          onClick: () => args.onSelect(name),
        },
        artifactSlot(iteration, name, args, "thumb"),
        h("figcaption", {}, name),
      ),
    ),
  );

  return h(
    "section",
    { className: "compare-column", "data-side": side },
    h(
      "div",
      { className: "column-head" },
      picker,
      h(
        "span",
        { className: "column-prompt" },
        iteration?.params.prompt ?? "(session default prompt)",
      ),
    ),
    viewport,
    strip,
  );
}

function artifactSlot(
  iteration: IterationRecord | undefined,
  name: ArtifactName,
  args: CompareViewArgs,
  kind: "main" | "thumb",
): HTMLElement {
  if (!iteration || iteration.status !== "completed") {
    return h(
      "div",
      { className: `placeholder placeholder-${kind}`, "data-artifact": name },
      iteration ? "not available" : "no iteration",
    );
  }
  return h("img", {
    className: `artifact artifact-${kind}`,
    "data-artifact": name,
    src: args.artifactUrl(args.detail.id, iteration.index, name),
    alt: `iteration ${iteration.index} ${name}`,
    draggable: "false",
  });
}
