// Thin fetch wrappers over the service JSON API.

import { TermJson } from "./terms.js";

export type QueryRow = Record<string, TermJson>;

export interface Stats {
  queue_length: number;
  tick_count: number;
  io_counter: number;
  store_entries: number;
  static_clauses: number;
  dead_letters: unknown[];
}

/** A non-2xx response, with whatever detail the server attached. */
export class ApiError extends Error {
  status: number;
  line?: number;
  column?: number;

  constructor(status: number, message: string, line?: number, column?: number) {
    super(message);
    this.status = status;
    this.line = line;
    this.column = column;
  }
}

async function post(base: string, path: string, payload: unknown): Promise<any> {
  const resp = await fetch(base + path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(
      resp.status,
      typeof body.error === "string" ? body.error : "request failed",
      body.line,
      body.column,
    );
  }
  return body;
}

export class Api {
  constructor(private base: string = "") {}

  async insert(axiom: string): Promise<void> {
    await post(this.base, "/api/axioms", { op: "insert", axiom });
  }

  async remove(axiom: string): Promise<void> {
    await post(this.base, "/api/axioms", { op: "remove", axiom });
  }

  async query(goal: string, limit?: number): Promise<QueryRow[]> {
    const payload: { goal: string; limit?: number } =
      limit === undefined ? { goal } : { goal, limit };
    const body = await post(this.base, "/api/query", payload);
    return body.results as QueryRow[];
  }

  /** Drain the propagation queue; resolves to the tick count. */
  async quiesce(): Promise<number> {
    const body = await post(this.base, "/api/quiesce", {});
    return body.ticks as number;
  }

  async stats(): Promise<Stats> {
    const resp = await fetch(this.base + "/api/stats");
    if (!resp.ok) throw new ApiError(resp.status, "stats unavailable");
    return (await resp.json()) as Stats;
  }
}
