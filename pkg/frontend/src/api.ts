/** Thin client over the assistant service's HTTP interface. */

import type { ChatResponse, SessionInfo } from "./types.js";

/** Raised for any failed service interaction; status 0 means unreachable. */
export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ServiceError";
    this.status = status;
    this.code = code;
  }
}

async function raiseFor(response: Response): Promise<never> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: { code?: string; message?: string } };
    if (body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ServiceError(response.status, code, message);
}

export class ServiceClient {
  private readonly baseUrl: string;
  private readonly authToken?: string;

  constructor(baseUrl: string, authToken?: string) {
    // Tolerate a trailing slash in config; URLs below always add their own.
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.authToken = authToken;
  }

  private headers(extra: Record<string, string> = {}): Record<string, string> {
    const headers: Record<string, string> = {
      "Content-Type": "application/json",
      ...extra,
    };
    if (this.authToken) {
      headers["Authorization"] = `Bearer ${this.authToken}`;
    }
    return headers;
  }

  private async request(path: string, init: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceError(0, "unreachable", `service unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      await raiseFor(response);
    }
    return response;
  }

  async createSession(context?: string | null): Promise<SessionInfo> {
    const body = context == null ? {} : { context };
    const response = await this.request("/sessions", {
      method: "POST",
      headers: this.headers(),
      body: JSON.stringify(body),
    });
    return (await response.json()) as SessionInfo;
  }

  async chat(sessionId: string, text: string): Promise<ChatResponse> {
    const response = await this.request("/v1/chat/completions", {
      method: "POST",
      headers: this.headers({ "X-Axlerod-Session": sessionId }),
      body: JSON.stringify({ messages: [{ role: "user", content: text }] }),
    });
    return (await response.json()) as ChatResponse;
  }

  async setContext(sessionId: string, context: string | null): Promise<SessionInfo> {
    const response = await this.request(`/sessions/${sessionId}/context`, {
      method: "PATCH",
      headers: this.headers(),
      body: JSON.stringify({ context }),
    });
    return (await response.json()) as SessionInfo;
  }
}
