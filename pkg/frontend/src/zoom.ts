const MIN_SCALE = 0.25;
const MAX_SCALE = 16;

/**
 * One zoom/pan state applied to any number of image containers, so panning
 * one compare column moves both. Transforms are CSS only; image pixels are
 * never resampled client-side.
 */
export class SyncZoom {
  scale = 1;
  tx = 0;
  ty = 0;

  private targets = new Set<HTMLElement>();

  attach(el: HTMLElement): void {
    this.targets.add(el);
    this.applyTo(el);
  }

  detach(el: HTMLElement): void {
    this.targets.delete(el);
  }

  /** Zoom by `factor` keeping the viewport point (cx, cy) fixed. */
  zoomAt(cx: number, cy: number, factor: number): void {
    const next = Math.min(MAX_SCALE, Math.max(MIN_SCALE, this.scale * factor));
    const real = next / this.scale;
    if (real === 1) return;
    this.tx = cx - real * (cx - this.tx);
    this.ty = cy - real * (cy - this.ty);
    this.scale = next;
    this.apply();
  }

  panBy(dx: number, dy: number): void {
    this.tx += dx;
    this.ty += dy;
    this.apply();
  }

  reset(): void {
    this.scale = 1;
    this.tx = 0;
    this.ty = 0;
    this.apply();
  }

  /** Wire wheel-zoom and drag-pan on a viewport element. */
  bind(viewport: HTMLElement): void {
    viewport.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const rect = viewport.getBoundingClientRect();
      const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
      this.zoomAt(ev.clientX - rect.left, ev.clientY - rect.top, factor);
    });

    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    viewport.addEventListener("pointerdown", (ev) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
      viewport.setPointerCapture?.(ev.pointerId);
    });
    viewport.addEventListener("pointermove", (ev) => {
      if (!dragging) return;
      this.panBy(ev.clientX - lastX, ev.clientY - lastY);
      lastX = ev.clientX;
      lastY = ev.clientY;
    });
    const stop = () => {
      dragging = false;
    };
    viewport.addEventListener("pointerup", stop);
    viewport.addEventListener("pointercancel", stop);
  }

  private apply(): void {
    for (const el of this.targets) this.applyTo(el);
  }

  private applyTo(el: HTMLElement): void {
    el.style.transform = `translate(${this.tx}px, ${this.ty}px) scale(${this.scale})`;
    el.style.transformOrigin = "0 0";
  }
}
