/**
 * Wire types mirroring the session service payloads, plus defensive
 * parsers: the console renders server payloads verbatim and must reject
 * malformed ones with an error banner instead of crashing mid-render.
 */

export type FindingValue = "present" | "absent" | "unknown";

export interface Candidate {
    faults: string[];
    raw_score: number;
    posterior: number;
    covers_all: boolean;
}

export interface NextQuestion {
    symptom: string;
    question: string;
}

export interface TranscriptEntry {
    symptom: string;
    finding: FindingValue;
}

export interface SessionView {
    id: string;
    kb: string;
    status: "in-progress" | "concluded" | "exhausted";
    next_question: NextQuestion | null;
    candidates: Candidate[];
    observations: Record<string, FindingValue>;
    transcript: TranscriptEntry[];
}

export interface SessionSummary {
    status: string;
    stopping_reason: string;
    explanations: Candidate[];
    uncovered_symptoms: string[];
    transcript: TranscriptEntry[];
    note: string;
}

export class PayloadError extends Error {}

function fail(message: string): never {
    throw new PayloadError(`malformed service payload: ${message}`);
}

function asRecord(data: unknown, what: string): Record<string, unknown> {
    if (typeof data !== "object" || data === null || Array.isArray(data)) fail(`${what} is not an object`);
    return data as Record<string, unknown>;
}

function asString(value: unknown, what: string): string {
    if (typeof value !== "string") fail(`${what} is not a string`);
    return value;
}

function asNumber(value: unknown, what: string): number {
    if (typeof value !== "number" || Number.isNaN(value)) fail(`${what} is not a number`);
    return value;
}

const FINDINGS: FindingValue[] = ["present", "absent", "unknown"];
const STATUSES = ["in-progress", "concluded", "exhausted"] as const;

function parseCandidate(data: unknown, where: string): Candidate {
    const record = asRecord(data, where);
    if (!Array.isArray(record.faults)) fail(`${where}.faults is not an array`);
    return {
        faults: record.faults.map((f, i) => asString(f, `${where}.faults[${i}]`)),
        raw_score: asNumber(record.raw_score, `${where}.raw_score`),
        posterior: asNumber(record.posterior, `${where}.posterior`),
        covers_all: Boolean(record.covers_all),
    };
}

function parseTranscript(data: unknown, where: string): TranscriptEntry[] {
    if (!Array.isArray(data)) fail(`${where} is not an array`);
    return data.map((entry, i) => {
        const record = asRecord(entry, `${where}[${i}]`);
        const finding = asString(record.finding, `${where}[${i}].finding`);
        if (!FINDINGS.includes(finding as FindingValue)) fail(`${where}[${i}].finding is ${finding}`);
        return {
            symptom: asString(record.symptom, `${where}[${i}].symptom`),
            finding: finding as FindingValue,
        };
    });
}

export function parseSessionView(data: unknown): SessionView {
    const record = asRecord(data, "session view");
    const status = asString(record.status, "status");
    if (!STATUSES.includes(status as SessionView["status"])) fail(`status is ${status}`);
    let nextQuestion: NextQuestion | null = null;
    if (record.next_question !== null && record.next_question !== undefined) {
        const nq = asRecord(record.next_question, "next_question");
        nextQuestion = {
            symptom: asString(nq.symptom, "next_question.symptom"),
            question: asString(nq.question, "next_question.question"),
        };
    }
    if (!Array.isArray(record.candidates)) fail("candidates is not an array");
    const observations: Record<string, FindingValue> = {};
    for (const [key, value] of Object.entries(asRecord(record.observations ?? {}, "observations"))) {
        const finding = asString(value, `observations.${key}`);
        if (!FINDINGS.includes(finding as FindingValue)) fail(`observations.${key} is ${finding}`);
        observations[key] = finding as FindingValue;
    }
    return {
        id: asString(record.id, "id"),
        kb: asString(record.kb, "kb"),
        status: status as SessionView["status"],
        next_question: nextQuestion,
        candidates: record.candidates.map((c, i) => parseCandidate(c, `candidates[${i}]`)),
        observations,
        transcript: parseTranscript(record.transcript, "transcript"),
    };
}

export function parseSessionSummary(data: unknown): SessionSummary {
    const record = asRecord(data, "session summary");
    if (!Array.isArray(record.explanations)) fail("explanations is not an array");
    if (!Array.isArray(record.uncovered_symptoms)) fail("uncovered_symptoms is not an array");
    return {
        status: asString(record.status, "status"),
        stopping_reason: asString(record.stopping_reason, "stopping_reason"),
        explanations: record.explanations.map((c, i) => parseCandidate(c, `explanations[${i}]`)),
        uncovered_symptoms: record.uncovered_symptoms.map((s, i) =>
            asString(s, `uncovered_symptoms[${i}]`),
        ),
        transcript: parseTranscript(record.transcript, "transcript"),
        note: asString(record.note ?? "", "note"),
    };
}
