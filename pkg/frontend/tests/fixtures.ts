import type { InteractionRecord } from "../src/types.js";

export function makeRecord(overrides: Partial<InteractionRecord> = {}): InteractionRecord {
  return {
    id: "r000001",
    session: "test",
    instruction: { text: "start driving autonomously", session: "test", timestamp: 1 },
    command: "command_type: MISSION\naction: START_DRIVING\n",
    translation_error: null,
    execution: {
      status: "SUCCESS",
      validation: { verdict: "ACCEPTED", reason: null, detail: "" },
      payload: { mode: "DRIVING", destination: "campus" },
      failure_reason: null,
      exec_latency_ms: 0.12,
    },
    feedback: "Starting the autonomous drive to campus.",
    feedback_error: null,
    latency: { translation_s: 0.001, execution_ms: 0.12, feedback_s: 0.001 },
    timestamps: { translated: 1, executed: 2, feedback: 3 },
    ...overrides,
  };
}

export function makeStatus(t: number, v: number) {
  return {
    vehicle: { edge: "e1", s: v * t, v, a: 0, mode: "DRIVING", route: ["e1"], t },
    params: { max_vel: 50, min_gap: 10, max_long_accel: 1.5, max_lat_accel: 2 },
    segment_limit_kmh: 50,
    eta_s: 60,
    next_intersection_decision: "left",
    override_active: false,
    lane: 0,
    destination: "campus",
  };
}
