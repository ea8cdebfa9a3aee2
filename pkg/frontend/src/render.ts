// Pure view-model construction and HTML rendering for one advisory turn.
// Everything here is a function of the response payload, so the UI is
// reconstructable from a transcript and testable without a browser.

import type { AdvisoryAnswer, RetrievalHit } from "./types.js";

export interface CitationChip {
  label: string;
  chunkId: string; // first hit carrying this source label
}

export interface EvidenceRow {
  chunkId: string;
  sourceLabel: string;
  score: number;
  scoreText: string; // two decimals, as displayed
  aboveThreshold: boolean;
  kept: boolean; // retrieval used AND this hit cleared the threshold
}

export interface TurnView {
  question: string;
  finalText: string;
  draftText: string;
  usedRetrieval: boolean;
  passthroughNotice: boolean;
  citations: CitationChip[];
  evidence: EvidenceRow[];
  thresholdText: string;
  warnings: string[];
}

export function formatScore(score: number): string {
  return score.toFixed(2);
}

export function buildTurnView(answer: AdvisoryAnswer, threshold: number): TurnView {
  const firstHitFor = (label: string): RetrievalHit | undefined =>
    answer.hits.find((hit) => hit.source_label === label);
  const citations: CitationChip[] = answer.citations.map((label) => ({
    label,
    chunkId: firstHitFor(label)?.chunk_id ?? "",
  }));
  const evidence: EvidenceRow[] = answer.hits.map((hit) => ({
    chunkId: hit.chunk_id,
    sourceLabel: hit.source_label,
    score: hit.score,
    scoreText: formatScore(hit.score),
    aboveThreshold: hit.score >= threshold,
    kept: answer.used_retrieval && hit.score >= threshold,
  }));
  return {
    question: answer.question,
    finalText: answer.final,
    draftText: answer.draft,
    usedRetrieval: answer.used_retrieval,
    passthroughNotice: !answer.used_retrieval,
    citations,
    evidence,
    thresholdText: formatScore(threshold),
    warnings: [...answer.warnings],
  };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export const NO_RELEVANT_DOCUMENTS_NOTICE =
  "No relevant documents found; showing the draft answer unchanged.";

export function renderTurnHtml(view: TurnView): string {
  const parts: string[] = [];
  parts.push(`<div class="turn">`);
  parts.push(`<div class="question">${escapeHtml(view.question)}</div>`);
  parts.push(`<div class="final">${escapeHtml(view.finalText)}</div>`);
  if (view.passthroughNotice) {
    parts.push(`<div class="passthrough-notice">${NO_RELEVANT_DOCUMENTS_NOTICE}</div>`);
  }
  if (view.usedRetrieval) {
    parts.push(
      `<details class="draft-toggle"><summary>Draft (before retrieval)</summary>` +
        `<div class="draft">${escapeHtml(view.draftText)}</div></details>`,
    );
  }
  if (view.citations.length > 0) {
    const chips = view.citations
      .map(
        (chip) =>
          `<button class="citation-chip" data-chunk-id="${escapeHtml(chip.chunkId)}">` +
          `${escapeHtml(chip.label)}</button>`,
      )
      .join("");
    parts.push(`<div class="citations">${chips}</div>`);
  }
  if (view.evidence.length > 0) {
    const rows = view.evidence
      .map(
        (row) =>
          `<tr class="${row.kept ? "kept" : "dropped"}" data-chunk-id="${escapeHtml(row.chunkId)}">` +
          `<td class="score">${row.scoreText}</td>` +
          `<td class="label">${escapeHtml(row.sourceLabel)}</td>` +
          `<td class="gate">${row.aboveThreshold ? "≥" : "<"} ${view.thresholdText}</td></tr>`,
      )
      .join("");
    parts.push(
      `<details class="evidence" open><summary>Retrieved evidence (threshold ${view.thresholdText})</summary>` +
        `<table>${rows}</table></details>`,
    );
  }
  for (const warning of view.warnings) {
    parts.push(`<div class="warning">${escapeHtml(warning)}</div>`);
  }
  parts.push(`</div>`);
  return parts.join("\n");
}

export function renderErrorHtml(message: string): string {
  return (
    `<div class="turn turn-error"><div class="error">${escapeHtml(message)}</div>` +
    `<button class="retry">Retry</button></div>`
  );
}
