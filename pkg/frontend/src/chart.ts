// Velocity-over-time chart: a plain data buffer (testable headlessly) plus
// a canvas renderer.  Instruction submissions add time markers; stream
// reconnects add gap markers so interrupted telemetry is visible.

export interface ChartPoint {
  t: number;
  v: number;
}

export interface ChartMarker {
  t: number;
  label: string;
  kind: "instruction" | "gap";
}

export class VelocityBuffer {
  readonly points: ChartPoint[] = [];
  readonly markers: ChartMarker[] = [];

  constructor(readonly windowSeconds: number = 120) {}

  append(t: number, v: number): void {
    const last = this.points[this.points.length - 1];
    if (last && t <= last.t) return; // stale or duplicate frame
    this.points.push({ t, v });
    this.trim();
  }

  addMarker(t: number, label: string, kind: ChartMarker["kind"] = "instruction"): void {
    this.markers.push({ t, label, kind });
  }

  markerCount(kind: ChartMarker["kind"] = "instruction"): number {
    return this.markers.filter((m) => m.kind === kind).length;
  }

  private trim(): void {
    const latest = this.points[this.points.length - 1];
    if (!latest) return;
    const cutoff = latest.t - this.windowSeconds;
    while (this.points.length && this.points[0].t < cutoff) this.points.shift();
    while (this.markers.length && this.markers[0].t < cutoff) this.markers.shift();
  }

  timeSpan(): [number, number] {
    if (!this.points.length) return [0, 1];
    return [this.points[0].t, Math.max(this.points[this.points.length - 1].t, this.points[0].t + 1)];
  }

  maxSpeed(): number {
    return this.points.reduce((acc, p) => Math.max(acc, p.v), 0);
  }

  /** Speeds over the trailing `seconds` of the buffer. */
  tail(seconds: number): number[] {
    if (!this.points.length) return [];
    const latest = this.points[this.points.length - 1].t;
    return this.points.filter((p) => p.t >= latest - seconds).map((p) => p.v);
  }

  /** True when the trailing window is flat around `target` (plateau). */
  plateausAt(target: number, seconds: number, tolerance: number): boolean {
    const tail = this.tail(seconds);
    if (tail.length < 3) return false;
    return tail.every((v) => Math.abs(v - target) <= tolerance);
  }
}

const PADDING = { left: 42, right: 10, top: 10, bottom: 22 };

export class VelocityChart {
  readonly buffer: VelocityBuffer;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    windowSeconds: number = 120,
  ) {
    this.buffer = new VelocityBuffer(windowSeconds);
  }

  append(t: number, v: number): void {
    this.buffer.append(t, v);
    this.draw();
  }

  addMarker(t: number, label: string, kind: ChartMarker["kind"] = "instruction"): void {
    this.buffer.addMarker(t, label, kind);
    this.draw();
  }

  draw(): void {
    let ctx: CanvasRenderingContext2D | null = null;
    try {
      ctx = this.canvas.getContext("2d");
    } catch {
      return; // headless environment without 2D support: buffer-only mode
    }
    if (!ctx) return;
    const { width, height } = this.canvas;
    const [t0, t1] = this.buffer.timeSpan();
    const vMax = Math.max(this.buffer.maxSpeed() * 1.15, 5);
    const plotW = width - PADDING.left - PADDING.right;
    const plotH = height - PADDING.top - PADDING.bottom;
    const x = (t: number) => PADDING.left + ((t - t0) / (t1 - t0)) * plotW;
    const y = (v: number) => PADDING.top + (1 - v / vMax) * plotH;

    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, width, height);

    ctx.strokeStyle = "#2a3442";
    ctx.fillStyle = "#8b98a9";
    ctx.font = "10px system-ui, sans-serif";
    ctx.lineWidth = 1;
    const gridSteps = 4;
    for (let i = 0; i <= gridSteps; i++) {
      const v = (vMax / gridSteps) * i;
      ctx.beginPath();
      ctx.moveTo(PADDING.left, y(v));
      ctx.lineTo(width - PADDING.right, y(v));
      ctx.stroke();
      ctx.fillText(`${v.toFixed(0)} m/s`, 4, y(v) + 3);
    }
    ctx.fillText(`${(t1 - t0).toFixed(0)} s window`, width - 80, height - 8);

    for (const marker of this.buffer.markers) {
      ctx.strokeStyle = marker.kind === "gap" ? "#b3544f" : "#4f7fb3";
      ctx.setLineDash(marker.kind === "gap" ? [2, 3] : [5, 4]);
      ctx.beginPath();
      ctx.moveTo(x(marker.t), PADDING.top);
      ctx.lineTo(x(marker.t), height - PADDING.bottom);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillStyle = marker.kind === "gap" ? "#d98580" : "#7fa8d9";
      ctx.fillText(marker.label, x(marker.t) + 3, PADDING.top + 10);
    }

    ctx.strokeStyle = "#59c28f";
    ctx.lineWidth = 1.8;
    ctx.beginPath();
    this.buffer.points.forEach((p, i) => {
      if (i === 0) ctx.moveTo(x(p.t), y(p.v));
      else ctx.lineTo(x(p.t), y(p.v));
    });
    ctx.stroke();
  }
}
