/**
 * Client for the session service. Only the documented endpoints are used;
 * every response is parsed defensively before it reaches a renderer.
 */

import {
    SessionSummary,
    SessionView,
    parseSessionSummary,
    parseSessionView,
} from "./types.js";

export class ServiceError extends Error {
    constructor(
        public readonly status: number,
        message: string,
    ) {
        super(message);
    }
}

async function request(url: string, init?: RequestInit): Promise<unknown> {
    const response = await fetch(url, {
        headers: { "content-type": "application/json" },
        ...init,
    });
    const text = await response.text();
    let body: unknown = null;
    try {
        body = text ? JSON.parse(text) : null;
    } catch {
        body = text;
    }
    if (!response.ok) {
        const detail =
            typeof body === "object" && body !== null && "detail" in body
                ? JSON.stringify((body as { detail: unknown }).detail)
                : text;
        throw new ServiceError(response.status, detail || `HTTP ${response.status}`);
    }
    return body;
}

export class ConsoleApi {
    constructor(public readonly baseUrl: string) {}

    private url(path: string): string {
        return this.baseUrl.replace(/\/+$/, "") + path;
    }

    async createSession(kb: string, config?: Record<string, unknown>): Promise<SessionView> {
        const body = config ? { kb, config } : { kb };
        return parseSessionView(
            await request(this.url("/sessions"), { method: "POST", body: JSON.stringify(body) }),
        );
    }

    async getSession(sessionId: string): Promise<SessionView> {
        return parseSessionView(await request(this.url(`/sessions/${sessionId}`)));
    }

    async submitAnswer(
        sessionId: string,
        symptom: string,
        finding: string,
    ): Promise<SessionView> {
        return parseSessionView(
            await request(this.url(`/sessions/${sessionId}/answers`), {
                method: "POST",
                body: JSON.stringify({ symptom, finding }),
            }),
        );
    }

    async whatIf(sessionId: string, symptom: string, finding: string): Promise<SessionView> {
        return parseSessionView(
            await request(this.url(`/sessions/${sessionId}/whatif`), {
                method: "POST",
                body: JSON.stringify({ symptom, finding }),
            }),
        );
    }

    async getSummary(sessionId: string): Promise<SessionSummary> {
        return parseSessionSummary(await request(this.url(`/sessions/${sessionId}/summary`)));
    }

    async getKbDocument(name: string): Promise<unknown> {
        return request(this.url(`/kb/${name}`));
    }
}
