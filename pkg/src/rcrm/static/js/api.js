/** Typed client for the conduct service. Every displayed number in the UI
 * originates from one of these responses; the client does no math. */
export class ApiError extends Error {
    constructor(status, code, detail) {
        super(detail);
        this.status = status;
        this.code = code;
        this.detail = detail;
        this.name = "ApiError";
    }
}
async function throwEnvelope(res) {
    let code = "http_error";
    let detail = `${res.status} ${res.statusText}`;
    try {
        const body = (await res.json());
        if (body && typeof body.error === "string") {
            code = body.error;
            detail = body.detail;
        }
    }
    catch {
        // non-JSON error body; keep the HTTP status text
    }
    throw new ApiError(res.status, code, detail);
}
export class ConductClient {
    constructor(base = "") {
        this.base = base;
    }
    url(path) {
        return `${this.base}${path}`;
    }
    async createSession(payload) {
        const res = await fetch(this.url("/sessions"), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(payload),
        });
        if (!res.ok)
            await throwEnvelope(res);
        return (await res.json());
    }
    async getSession(id) {
        const res = await fetch(this.url(`/sessions/${id}`));
        if (!res.ok)
            await throwEnvelope(res);
        return (await res.json());
    }
    async submitCohort(id, dltCount) {
        const res = await fetch(this.url(`/sessions/${id}/cohorts`), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ dlt_count: dltCount }),
        });
        if (!res.ok)
            await throwEnvelope(res);
        return (await res.json());
    }
    /** Raw body string so a download is byte-identical to the server's audit
     * document. */
    async exportSessionRaw(id) {
        const res = await fetch(this.url(`/sessions/${id}/export`));
        if (!res.ok)
            await throwEnvelope(res);
        return await res.text();
    }
}
