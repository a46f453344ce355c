// Client-side session state: instruction history with status badges and
// the telemetry connection state.  No sim state lives here; everything
// rendered comes from server responses.

import type { CardKind } from "./cards.js";
import type { InteractionRecord } from "./types.js";

export type ConnectionState = "connecting" | "connected" | "disconnected";

export interface HistoryEntry {
  text: string;
  status: CardKind;
  recordId: string | null;
  simTime: number | null; // sim time at submission, for chart markers
}

export class UiSession {
  readonly history: HistoryEntry[] = [];
  connection: ConnectionState = "connecting";

  constructor(readonly sessionId: string) {}

  recordResult(text: string, record: InteractionRecord, simTime: number | null, status: CardKind): HistoryEntry {
    const entry: HistoryEntry = { text, status, recordId: record.id, simTime };
    this.history.push(entry);
    return entry;
  }

  recordError(text: string, simTime: number | null): HistoryEntry {
    const entry: HistoryEntry = { text, status: "NETWORK_ERROR", recordId: null, simTime };
    this.history.push(entry);
    return entry;
  }

  /** Server-confirmed record ids, in submission order. */
  confirmedIds(): string[] {
    return this.history.filter((e) => e.recordId !== null).map((e) => e.recordId as string);
  }
}
