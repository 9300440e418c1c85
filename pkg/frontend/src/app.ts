/**
 * DOM shell: holds the latest server payload, delegates button clicks to
 * the API client, and re-renders from scratch after every response. While
 * a request is in flight all controls are disabled; a failed request
 * leaves the last good state on screen with a retry affordance.
 */

import { ConsoleApi, ServiceError } from "./api.js";
import { IDLE, UiFlags, renderErrorBanner, renderSession } from "./render.js";
import { PayloadError, SessionSummary, SessionView } from "./types.js";

interface AppState {
    api: ConsoleApi | null;
    view: SessionView | null;
    summary: SessionSummary | null;
    ui: UiFlags;
    error: string | null;
    retry: (() => Promise<void>) | null;
}

const state: AppState = {
    api: null,
    view: null,
    summary: null,
    ui: { ...IDLE },
    error: null,
    retry: null,
};

function root(): HTMLElement {
    const element = document.getElementById("app");
    if (!element) throw new Error("missing #app container");
    return element;
}

function connectForm(): string {
    return `<form id="connect" class="connect-form">
  <label>Service URL <input name="base" value="http://127.0.0.1:8756" size="28"></label>
  <label>Knowledge base <input name="kb" value="kb3" size="10"></label>
  <label>Mode <select name="mode"><option value="single-fault">single fault</option><option value="multiple-fault">multiple fault</option></select></label>
  <button type="submit">Start session</button>
</form>`;
}

function render(): void {
    const pieces = [connectForm()];
    if (state.error) {
        pieces.push(renderErrorBanner(state.error));
        if (state.retry) pieces.push(`<button data-action="retry">Retry</button>`);
    }
    if (state.view) {
        pieces.push(renderSession(state.view, state.summary, state.ui));
    }
    root().innerHTML = pieces.join("\n");
}

async function refreshSummary(): Promise<void> {
    if (!state.api || !state.view) return;
    if (state.view.status === "in-progress") {
        state.summary = null;
        return;
    }
    state.summary = await state.api.getSummary(state.view.id);
}

async function run(action: () => Promise<void>): Promise<void> {
    if (state.ui.busy) return;
    state.ui.busy = true;
    state.error = null;
    render();
    try {
        await action();
        state.retry = null;
    } catch (error) {
        if (error instanceof ServiceError && error.status === 409) {
            state.ui.notice = `Already answered: ${error.message}`;
        } else if (error instanceof ServiceError || error instanceof PayloadError) {
            state.error = error.message;
        } else {
            // network failure: keep state, offer retry
            state.error = `request failed: ${String(error)}`;
            state.retry = action;
        }
    } finally {
        state.ui.busy = false;
        render();
    }
}

async function startSession(base: string, kb: string, mode: string): Promise<void> {
    state.api = new ConsoleApi(base);
    state.view = await state.api.createSession(kb, { mode });
    state.summary = null;
    state.ui = { ...IDLE };
    await refreshSummary();
}

async function answer(symptom: string, finding: string): Promise<void> {
    if (!state.api || !state.view) return;
    state.view = await state.api.submitAnswer(state.view.id, symptom, finding);
    state.ui.notice = null;
    state.ui.whatif = null;
    await refreshSummary();
}

async function whatIf(symptom: string): Promise<void> {
    if (!state.api || !state.view) return;
    const [present, absent] = await Promise.all([
        state.api.whatIf(state.view.id, symptom, "present"),
        state.api.whatIf(state.view.id, symptom, "absent"),
    ]);
    state.ui.whatif = { symptom, present, absent };
}

function onClick(event: Event): void {
    const target = event.target as HTMLElement;
    const action = target.dataset.action;
    if (!action) return;
    event.preventDefault();
    if (action === "answer") {
        void run(() => answer(target.dataset.symptom ?? "", target.dataset.finding ?? ""));
    } else if (action === "whatif") {
        void run(() => whatIf(target.dataset.symptom ?? ""));
    } else if (action === "close-whatif") {
        state.ui.whatif = null;
        render();
    } else if (action === "retry" && state.retry) {
        void run(state.retry);
    }
}

function onSubmit(event: Event): void {
    const form = event.target as HTMLFormElement;
    if (form.id !== "connect") return;
    event.preventDefault();
    const data = new FormData(form);
    void run(() =>
        startSession(
            String(data.get("base") ?? ""),
            String(data.get("kb") ?? ""),
            String(data.get("mode") ?? "single-fault"),
        ),
    );
}

export function mount(): void {
    render();
    root().addEventListener("click", onClick);
    root().addEventListener("submit", onSubmit);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
    mount();
}
