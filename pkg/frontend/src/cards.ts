// Record cards: one visible card per submitted instruction, success or not.

import type { InteractionRecord } from "./types.js";

export type CardKind = "SUCCESS" | "REJECTED" | "FAILED" | "TRANSLATION_ERROR" | "NETWORK_ERROR";

export function cardKind(record: InteractionRecord): CardKind {
  if (record.translation_error) return "TRANSLATION_ERROR";
  if (record.execution) return record.execution.status;
  return "TRANSLATION_ERROR";
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderRecordCard(doc: Document, record: InteractionRecord): HTMLElement {
  const kind = cardKind(record);
  const card = el(doc, "article", `card card-${kind.toLowerCase()}`);
  card.dataset.recordId = record.id;
  card.dataset.status = kind;

  const head = el(doc, "header", "card-head");
  head.appendChild(el(doc, "span", "card-instruction", record.instruction.text));
  head.appendChild(el(doc, "span", `badge badge-${kind.toLowerCase()}`, kind));
  card.appendChild(head);

  if (record.command) {
    card.appendChild(el(doc, "pre", "card-command", record.command.trimEnd()));
  }
  if (record.execution) {
    const verdict = record.execution.validation;
    const line = verdict.verdict === "ACCEPTED"
      ? `validation: ACCEPTED | executed in ${record.execution.exec_latency_ms.toFixed(2)} ms`
      : `validation: REJECTED (${verdict.reason ?? "?"}) | ${verdict.detail}`;
    card.appendChild(el(doc, "div", "card-validation", line));
    if (record.execution.failure_reason && verdict.verdict === "ACCEPTED") {
      card.appendChild(el(doc, "div", "card-failure", record.execution.failure_reason));
    }
  } else if (record.translation_error) {
    card.appendChild(
      el(
        doc,
        "div",
        "card-failure",
        `translation failed: ${record.translation_error.kind} (${record.translation_error.detail})`,
      ),
    );
  }
  card.appendChild(el(doc, "div", "card-feedback", record.feedback));
  return card;
}

export function renderErrorCard(doc: Document, text: string, detail: string): HTMLElement {
  const card = el(doc, "article", "card card-network_error");
  card.dataset.status = "NETWORK_ERROR";
  const head = el(doc, "header", "card-head");
  head.appendChild(el(doc, "span", "card-instruction", text));
  head.appendChild(el(doc, "span", "badge badge-network_error", "ERROR"));
  card.appendChild(head);
  card.appendChild(el(doc, "div", "card-failure", detail));
  return card;
}
