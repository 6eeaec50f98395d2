/** Thin typed client for the abceval /v1 API. */

import type {
  Assignment,
  Session,
  TaskDescriptor,
  TrainingFeedback,
  TrainingRound,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    extraHeaders?: Record<string, string>,
  ): Promise<T> {
    const headers: Record<string, string> = { ...extraHeaders };
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers.Authorization = `Bearer ${this.token}`;
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async register(displayName: string): Promise<Session> {
    const session = await this.request<Session>("POST", "/v1/annotators", {
      display_name: displayName,
    });
    this.token = session.token;
    return session;
  }

  async tasks(): Promise<TaskDescriptor[]> {
    const body = await this.request<{ tasks: TaskDescriptor[] }>("GET", "/v1/tasks");
    return body.tasks;
  }

  nextTraining(task: string): Promise<TrainingRound> {
    return this.request("GET", `/v1/training/${task}/next`);
  }

  submitTraining(
    task: string,
    round: number,
    payload: Record<string, unknown>,
  ): Promise<TrainingFeedback> {
    return this.request("POST", `/v1/training/${task}/submit`, { round, payload });
  }

  nextAssignment(task: string): Promise<Assignment> {
    return this.request("GET", `/v1/assignments/next?task=${encodeURIComponent(task)}`);
  }

  submitAnnotation(
    assignmentId: string,
    payload: Record<string, unknown>,
    idempotencyKey?: string,
  ): Promise<Record<string, unknown>> {
    const headers = idempotencyKey ? { "Idempotency-Key": idempotencyKey } : undefined;
    return this.request(
      "POST",
      "/v1/annotations",
      { assignment_id: assignmentId, payload },
      headers,
    );
  }
}
