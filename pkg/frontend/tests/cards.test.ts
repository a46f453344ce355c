import { describe, expect, it } from "vitest";

import { cardKind, renderErrorCard, renderRecordCard } from "../src/cards.js";
import { makeRecord } from "./fixtures.js";

describe("record cards", () => {
  it("renders a success card with command, validation and feedback", () => {
    const card = renderRecordCard(document, makeRecord());
    expect(card.dataset.status).toBe("SUCCESS");
    expect(card.querySelector(".card-command")?.textContent).toContain("START_DRIVING");
    expect(card.querySelector(".card-validation")?.textContent).toContain("ACCEPTED");
    expect(card.querySelector(".card-feedback")?.textContent).toContain("Starting");
    expect(card.querySelector(".badge")?.textContent).toBe("SUCCESS");
  });

  it("renders a rejection with the reason detail", () => {
    const record = makeRecord({
      execution: {
        status: "REJECTED",
        validation: {
          verdict: "REJECTED",
          reason: "OUT_OF_BOUNDS",
          detail: "max_vel=900 outside [5, 130] km/h",
        },
        payload: null,
        failure_reason: "max_vel=900 outside [5, 130] km/h",
        exec_latency_ms: 0,
      },
      feedback: "I can't do that: max_vel=900 outside [5, 130] km/h",
    });
    const card = renderRecordCard(document, record);
    expect(card.dataset.status).toBe("REJECTED");
    expect(card.querySelector(".card-validation")?.textContent).toContain("OUT_OF_BOUNDS");
    expect(card.textContent).toContain("130");
  });

  it("renders a translation failure card", () => {
    const record = makeRecord({
      command: null,
      execution: null,
      translation_error: { kind: "BackendUnavailable", detail: "API server unreachable" },
      feedback: "Sorry, I couldn't process that request right now.",
    });
    const card = renderRecordCard(document, record);
    expect(cardKind(record)).toBe("TRANSLATION_ERROR");
    expect(card.querySelector(".card-failure")?.textContent).toContain("BackendUnavailable");
  });

  it("renders an inline error card for transport failures", () => {
    const card = renderErrorCard(document, "start driving", "network failure: refused");
    expect(card.dataset.status).toBe("NETWORK_ERROR");
    expect(card.textContent).toContain("network failure");
  });
});
