// Console wiring: instruction form, record cards, status panel, live
// velocity chart fed by the telemetry websocket.

import { ApiClient, ApiError } from "./api.js";
import { cardKind, renderErrorCard, renderRecordCard } from "./cards.js";
import { VelocityChart } from "./chart.js";
import { UiSession } from "./session.js";
import type { AvStatus } from "./types.js";

export interface WebSocketLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((event?: unknown) => void) | null;
  close(): void;
}

export interface AppConfig {
  baseUrl?: string;
  session?: string;
  telemetry?: boolean;
  reconnectDelayMs?: number;
  wsFactory?: (url: string) => WebSocketLike;
  fetchFn?: typeof fetch;
}

const RECONNECT_DELAY_MS = 1500;

export class ConsoleApp {
  readonly api: ApiClient;
  readonly session: UiSession;
  readonly chart: VelocityChart;
  readonly cardsNode: HTMLElement;
  readonly statusNode: HTMLElement;
  readonly connectionNode: HTMLElement;
  readonly form: HTMLFormElement;
  readonly input: HTMLInputElement;
  lastStatus: AvStatus | null = null;

  private socket: WebSocketLike | null = null;
  private closed = false;
  private hadFrames = false;
  private readonly config: AppConfig;

  constructor(root: HTMLElement, config: AppConfig = {}) {
    this.config = config;
    this.api = new ApiClient(config.baseUrl ?? "", config.fetchFn);
    this.session = new UiSession(config.session ?? `console-${Date.now().toString(36)}`);
    const doc = root.ownerDocument;
    root.innerHTML = `
      <header class="top">
        <h1>passenger console</h1>
        <span id="connection" class="badge badge-connecting" data-state="connecting">connecting</span>
      </header>
      <section class="panel chart-panel">
        <canvas id="chart" width="880" height="240"></canvas>
        <div id="status" class="status-panel">waiting for telemetry</div>
      </section>
      <section class="panel">
        <form id="instruction-form">
          <input id="instruction-input" type="text" autocomplete="off"
                 placeholder="e.g. start driving autonomously" />
          <button type="submit">send</button>
        </form>
        <div id="cards" class="cards"></div>
      </section>`;
    this.cardsNode = root.querySelector("#cards") as HTMLElement;
    this.statusNode = root.querySelector("#status") as HTMLElement;
    this.connectionNode = root.querySelector("#connection") as HTMLElement;
    this.form = root.querySelector("#instruction-form") as HTMLFormElement;
    this.input = root.querySelector("#instruction-input") as HTMLInputElement;
    this.chart = new VelocityChart(root.querySelector("#chart") as HTMLCanvasElement);

    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit(this.input.value);
    });
    if (config.telemetry !== false) this.connectTelemetry();
    void doc; // root document owns all created nodes
  }

  /** Submit one instruction; always renders exactly one card. */
  async submit(text: string): Promise<void> {
    const trimmed = text.trim();
    if (!trimmed) return; // client-side reject: no request, no card
    this.input.value = "";
    const simTime = this.lastStatus?.vehicle.t ?? null;
    try {
      const record = await this.api.submitInstruction(this.session.sessionId, trimmed);
      const status = cardKind(record);
      this.session.recordResult(trimmed, record, simTime, status);
      this.appendCard(renderRecordCard(this.cardsNode.ownerDocument, record));
    } catch (error) {
      const detail = error instanceof ApiError ? error.message : String(error);
      this.session.recordError(trimmed, simTime);
      this.appendCard(renderErrorCard(this.cardsNode.ownerDocument, trimmed, detail));
    }
    if (simTime !== null) this.chart.addMarker(simTime, `#${this.session.history.length}`);
  }

  private appendCard(card: HTMLElement): void {
    this.cardsNode.insertBefore(card, this.cardsNode.firstChild);
  }

  connectTelemetry(): void {
    if (this.closed) return;
    const factory =
      this.config.wsFactory ??
      ((url: string) => new WebSocket(url) as unknown as WebSocketLike);
    this.setConnection("connecting");
    let socket: WebSocketLike;
    try {
      socket = factory(this.api.telemetryUrl());
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.socket = socket;
    socket.onmessage = (event) => {
      this.setConnection("connected");
      try {
        const status = JSON.parse(String(event.data)) as AvStatus;
        this.onStatus(status);
      } catch {
        // ignore malformed frame
      }
    };
    socket.onerror = () => undefined; // onclose follows and handles it
    socket.onclose = () => {
      this.socket = null;
      if (this.closed) return;
      this.setConnection("disconnected");
      if (this.hadFrames && this.lastStatus) {
        this.chart.addMarker(this.lastStatus.vehicle.t, "gap", "gap");
      }
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    const delay = this.config.reconnectDelayMs ?? RECONNECT_DELAY_MS;
    setTimeout(() => this.connectTelemetry(), delay);
  }

  onStatus(status: AvStatus): void {
    this.lastStatus = status;
    this.hadFrames = true;
    this.chart.append(status.vehicle.t, status.vehicle.v);
    const speedKmh = (status.vehicle.v * 3.6).toFixed(1);
    this.statusNode.textContent =
      `${status.vehicle.mode} | ${speedKmh} km/h on ${status.vehicle.edge} | ` +
      `limit ${status.segment_limit_kmh} km/h | ceiling ${status.params.max_vel} km/h | ` +
      `ETA ${status.eta_s.toFixed(0)} s | destination ${status.destination ?? "-"}` +
      `${status.override_active ? " | light override active" : ""}`;
  }

  private setConnection(state: "connecting" | "connected" | "disconnected"): void {
    this.session.connection = state;
    this.connectionNode.dataset.state = state;
    this.connectionNode.className = `badge badge-${state}`;
    this.connectionNode.textContent = state;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}

export function initApp(root: HTMLElement, config: AppConfig = {}): ConsoleApp {
  return new ConsoleApp(root, config);
}
