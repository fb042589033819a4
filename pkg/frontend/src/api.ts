/** Typed client for the conduct service. Every displayed number in the UI
 * originates from one of these responses; the client does no math. */

export interface DoseDecision {
  kind: "assign" | "stop";
  dose: number | null;
  randomized: boolean;
  candidate_doses: number[];
  candidate_probs: number[];
  random_draw: number | null;
}

export interface CohortRow {
  index: number;
  dose: number;
  dlt_count: number | null;
  decision: DoseDecision;
}

export interface SessionConfig {
  skeleton: number[];
  target: number;
  prior_mean: number;
  prior_sd: number;
  grid_lo: number;
  grid_hi: number;
  grid_points: number;
  variant: string;
  cohort_size: number;
  max_subjects: number;
  pi: number;
}

export type SessionStatus = "awaiting_outcomes" | "completed" | "stopped_overtoxic";

export interface SessionView {
  session_id: string;
  created_at: string;
  seed: number;
  config: SessionConfig;
  status: SessionStatus;
  final_mtd: number | null;
  current_dose: number | null;
  cohort_index: number | null;
  total_subjects: number;
  total_dlts: number;
  dose_means: number[];
  mtd_probs: number[];
  p_overtoxic: number;
  last_decision: DoseDecision;
  cohorts: CohortRow[];
}

export interface ErrorEnvelope {
  error: string;
  detail: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function throwEnvelope(res: Response): Promise<never> {
  let code = "http_error";
  let detail = `${res.status} ${res.statusText}`;
  try {
    const body = (await res.json()) as ErrorEnvelope;
    if (body && typeof body.error === "string") {
      code = body.error;
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  throw new ApiError(res.status, code, detail);
}

export class ConductClient {
  constructor(private readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async createSession(payload: Record<string, unknown>): Promise<SessionView> {
    const res = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!res.ok) await throwEnvelope(res);
    return (await res.json()) as SessionView;
  }

  async getSession(id: string): Promise<SessionView> {
    const res = await fetch(this.url(`/sessions/${id}`));
    if (!res.ok) await throwEnvelope(res);
    return (await res.json()) as SessionView;
  }

  async submitCohort(id: string, dltCount: number): Promise<SessionView> {
    const res = await fetch(this.url(`/sessions/${id}/cohorts`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dlt_count: dltCount }),
    });
    if (!res.ok) await throwEnvelope(res);
    return (await res.json()) as SessionView;
  }

  /** Raw body string so a download is byte-identical to the server's audit
   * document. */
  async exportSessionRaw(id: string): Promise<string> {
    const res = await fetch(this.url(`/sessions/${id}/export`));
    if (!res.ok) await throwEnvelope(res);
    return await res.text();
  }
}
