// Typed client-side copies of the service's wire schemas.  These mirror the
// JSON shapes served by /api/v1/*; the contract test checks them against a
// live service.

export type ExecutionStatus = "SUCCESS" | "REJECTED" | "FAILED";
export type Verdict = "ACCEPTED" | "REJECTED";
export type OperationMode = "STOPPED" | "DRIVING" | "EMERGENCY_STOPPED";

export interface ValidationInfo {
  verdict: Verdict;
  reason: string | null;
  detail: string;
}

export interface ExecutionInfo {
  status: ExecutionStatus;
  validation: ValidationInfo;
  payload: Record<string, unknown> | null;
  failure_reason: string | null;
  exec_latency_ms: number;
}

export interface StageError {
  kind: string;
  detail: string;
}

export interface InteractionRecord {
  id: string;
  session: string;
  instruction: { text: string; session: string; timestamp: number };
  command: string | null;
  translation_error: StageError | null;
  execution: ExecutionInfo | null;
  feedback: string;
  feedback_error: StageError | null;
  latency: { translation_s: number; execution_ms: number; feedback_s: number };
  timestamps: { translated: number; executed: number | null; feedback: number };
}

export interface VehicleInfo {
  edge: string;
  s: number;
  v: number;
  a: number;
  mode: OperationMode;
  route: string[];
  t: number;
}

export interface AvStatus {
  vehicle: VehicleInfo;
  params: Record<string, number>;
  segment_limit_kmh: number;
  eta_s: number;
  next_intersection_decision: string | null;
  override_active: boolean;
  lane: number;
  destination: string | null;
}

export interface SessionLogResponse {
  session: string;
  records: InteractionRecord[];
}
