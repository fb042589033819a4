/** Minimal HTTP server replaying recorded conduct-service responses, used
 * by the contract tests so the UI talks to real wire payloads without a
 * Python process. It replays the recorded session flow: one create, the
 * recorded cohort submissions in order, then export. */

import { createServer, type Server } from "node:http";
import type { AddressInfo } from "node:net";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export interface Fixtures {
  create_payload: Record<string, unknown>;
  create: { session_id: string } & Record<string, unknown>;
  outcomes: number[];
  cohorts: Array<Record<string, unknown>>;
  export_raw: string;
  invalid_create_payload: Record<string, unknown>;
  invalid_create_response: { error: string; detail: string };
}

function sameJson(a: unknown, b: unknown): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

export class FixtureServer {
  readonly requests: RecordedRequest[] = [];
  private submissions = 0;
  private readonly server: Server;

  constructor(private readonly fixtures: Fixtures) {
    this.server = createServer((req, res) => {
      let raw = "";
      req.on("data", (chunk) => (raw += chunk));
      req.on("end", () => {
        const body = raw.length > 0 ? JSON.parse(raw) : null;
        this.requests.push({ method: req.method ?? "", path: req.url ?? "", body });
        const [status, payload] = this.route(req.method ?? "", req.url ?? "", body);
        res.writeHead(status, { "content-type": "application/json" });
        res.end(typeof payload === "string" ? payload : JSON.stringify(payload));
      });
    });
  }

  private route(method: string, path: string, body: unknown): [number, unknown] {
    const sid = this.fixtures.create.session_id;
    if (method === "GET" && path === "/healthz") return [200, { status: "ok" }];
    if (method === "POST" && path === "/sessions") {
      if (sameJson(body, this.fixtures.invalid_create_payload)) {
        return [422, this.fixtures.invalid_create_response];
      }
      return [201, this.fixtures.create];
    }
    if (method === "POST" && path === `/sessions/${sid}/cohorts`) {
      if (this.submissions >= this.fixtures.cohorts.length) {
        return [409, { error: "conflict", detail: "fixture flow exhausted" }];
      }
      return [200, this.fixtures.cohorts[this.submissions++]];
    }
    if (method === "GET" && path === `/sessions/${sid}/export`) {
      return [200, this.fixtures.export_raw];
    }
    if (method === "GET" && path === `/sessions/${sid}`) {
      const latest =
        this.submissions === 0 ? this.fixtures.create : this.fixtures.cohorts[this.submissions - 1];
      return [200, latest];
    }
    return [404, { error: "not_found", detail: `no fixture for ${method} ${path}` }];
  }

  async start(): Promise<string> {
    await new Promise<void>((resolve) => this.server.listen(0, "127.0.0.1", resolve));
    const address = this.server.address() as AddressInfo;
    return `http://127.0.0.1:${address.port}`;
  }

  async stop(): Promise<void> {
    await new Promise<void>((resolve, reject) =>
      this.server.close((err) => (err ? reject(err) : resolve())),
    );
  }
}
