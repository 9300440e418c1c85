/**
 * Pure renderers: service payload in, HTML string out. No fetches, no DOM
 * reads, no client-side inference: the screen is a function of the last
 * payload the server sent.
 */

import { Candidate, SessionSummary, SessionView } from "./types.js";

export interface WhatIfPreview {
    symptom: string;
    present: SessionView;
    absent: SessionView;
}

export interface UiFlags {
    busy: boolean;
    notice: string | null;
    whatif: WhatIfPreview | null;
}

export const IDLE: UiFlags = { busy: false, notice: null, whatif: null };

export function escapeHtml(text: string): string {
    return text
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;")
        .replace(/'/g, "&#39;");
}

export function faultSetLabel(faults: string[]): string {
    return faults.length ? `{${[...faults].sort().join(", ")}}` : "no fault";
}

export function renderErrorBanner(message: string): string {
    return `<div class="banner banner-error" role="alert">${escapeHtml(message)}</div>`;
}

export function renderNotice(message: string): string {
    return `<div class="banner banner-notice">${escapeHtml(message)}</div>`;
}

function renderBar(candidate: Candidate): string {
    const percent = Math.max(0, Math.min(100, candidate.posterior * 100));
    const coverage = candidate.covers_all ? "covers all" : "partial";
    return `<li class="hypothesis">
  <span class="hypothesis-label">${escapeHtml(faultSetLabel(candidate.faults))}</span>
  <span class="hypothesis-bar"><span class="hypothesis-fill" style="width:${percent.toFixed(1)}%"></span></span>
  <span class="hypothesis-posterior">${candidate.posterior.toFixed(3)}</span>
  <span class="hypothesis-coverage">${coverage}</span>
</li>`;
}

export function renderCandidates(candidates: Candidate[]): string {
    const sum = candidates.reduce((acc, c) => acc + c.posterior, 0);
    const items = candidates.map(renderBar).join("\n");
    return `<ol class="hypothesis-list" data-posterior-sum="${sum.toFixed(6)}">
${items}
</ol>`;
}

export function renderTranscript(view: SessionView): string {
    if (view.transcript.length === 0) {
        return `<p class="transcript-empty">No findings recorded yet.</p>`;
    }
    const rows = view.transcript
        .map(
            (entry, i) =>
                `<tr><td>${i + 1}</td><td>${escapeHtml(entry.symptom)}</td><td>${escapeHtml(entry.finding)}</td></tr>`,
        )
        .join("\n");
    return `<table class="transcript"><thead><tr><th>#</th><th>symptom</th><th>finding</th></tr></thead>
<tbody>
${rows}
</tbody></table>`;
}

function renderQuestion(view: SessionView, ui: UiFlags): string {
    const question = view.next_question;
    if (view.status !== "in-progress") return "";
    const disabled = ui.busy ? " disabled" : "";
    if (!question) {
        return `<div class="question-panel">
  <p class="question-none">The engine has no informative question yet; record a finding through what-if or wait for volunteered findings.</p>
</div>`;
    }
    const symptom = escapeHtml(question.symptom);
    return `<div class="question-panel">
  <p class="question-text" data-symptom="${symptom}">${escapeHtml(question.question)}</p>
  <div class="answer-buttons">
    <button data-action="answer" data-symptom="${symptom}" data-finding="present"${disabled}>Present</button>
    <button data-action="answer" data-symptom="${symptom}" data-finding="absent"${disabled}>Absent</button>
    <button data-action="answer" data-symptom="${symptom}" data-finding="unknown"${disabled}>Unknown</button>
    <button data-action="whatif" data-symptom="${symptom}"${disabled}>What if?</button>
  </div>
</div>`;
}

function renderConclusion(view: SessionView, summary: SessionSummary | null): string {
    if (view.status === "in-progress") return "";
    const top = view.candidates[0];
    const explanation = top ? faultSetLabel(top.faults) : "no candidates";
    const reason = summary ? summary.stopping_reason : view.status;
    const uncovered =
        summary && summary.uncovered_symptoms.length
            ? `<p class="conclusion-uncovered">Uncovered symptoms: ${summary.uncovered_symptoms.map(escapeHtml).join(", ")}</p>`
            : "";
    const note = summary ? `<p class="conclusion-note">${escapeHtml(summary.note)}</p>` : "";
    const kind = view.status === "concluded" ? "banner-conclusion" : "banner-exhausted";
    return `<div class="banner ${kind}" data-status="${view.status}">
  <strong>${view.status === "concluded" ? "Conclusion" : "Session exhausted"}:</strong>
  <span class="conclusion-explanation">${escapeHtml(explanation)}</span>
  <span class="conclusion-reason">(${escapeHtml(reason)})</span>
  ${uncovered}
  ${note}
</div>`;
}

export function renderWhatIfPanel(preview: WhatIfPreview): string {
    const column = (title: string, view: SessionView) => `<div class="whatif-column">
  <h4>${escapeHtml(title)}</h4>
  ${renderCandidates(view.candidates)}
</div>`;
    return `<div class="whatif-panel" data-symptom="${escapeHtml(preview.symptom)}">
  <h3>What if ${escapeHtml(preview.symptom)} were…</h3>
  <div class="whatif-columns">
    ${column("present", preview.present)}
    ${column("absent", preview.absent)}
  </div>
  <button data-action="close-whatif">Close preview</button>
</div>`;
}

export function renderSession(
    view: SessionView,
    summary: SessionSummary | null = null,
    ui: UiFlags = IDLE,
): string {
    const parts = [
        `<div class="session" data-session-id="${escapeHtml(view.id)}" data-status="${view.status}">`,
        `<header class="session-header"><h2>Session ${escapeHtml(view.id)}</h2><span class="session-kb">KB: ${escapeHtml(view.kb)}</span><span class="session-status status-${view.status}">${view.status}</span></header>`,
        renderConclusion(view, summary),
        ui.notice ? renderNotice(ui.notice) : "",
        `<section class="panel"><h3>Hypotheses</h3>${renderCandidates(view.candidates)}</section>`,
        renderQuestion(view, ui),
        ui.whatif ? renderWhatIfPanel(ui.whatif) : "",
        `<section class="panel"><h3>Transcript</h3>${renderTranscript(view)}</section>`,
        `</div>`,
    ];
    return parts.filter(Boolean).join("\n");
}
