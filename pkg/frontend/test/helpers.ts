/** Fetch stubbing shared by the widget and client tests. */

import { vi } from "vitest";
import type { AxlerodBlock, ChatResponse, ToolActivity } from "../src/types.js";

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

type Responder = (call: RecordedCall) => Response | Promise<Response>;

/**
 * Installs a fetch stub that records every call and answers from a queue of
 * responders (the last responder sticks for any further calls).
 */
export function stubFetch(...responders: Responder[]) {
  const calls: RecordedCall[] = [];
  const queue = [...responders];
  const mock = vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
    const call: RecordedCall = {
      url: String(input),
      method: init?.method ?? "GET",
      headers: (init?.headers as Record<string, string>) ?? {},
      body: typeof init?.body === "string" ? JSON.parse(init.body) : undefined,
    };
    calls.push(call);
    const responder = queue.length > 1 ? queue.shift() : queue[0];
    if (!responder) {
      throw new Error(`unexpected fetch to ${call.url}`);
    }
    return responder(call);
  });
  vi.stubGlobal("fetch", mock);
  return { calls, mock };
}

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function sessionResponse(
  sessionId = "sess-1",
  context: string | null = null,
): Response {
  return jsonResponse(201, { session_id: sessionId, context });
}

export function errorResponse(status: number, code: string, message: string): Response {
  return jsonResponse(status, { error: { code, message } });
}

let counter = 0;

export function chatResponse(
  content: string,
  options: {
    toolActivity?: ToolActivity[];
    resolvedPolicy?: string | null;
    cost?: string;
  } = {},
): Response {
  counter += 1;
  const axlerod: AxlerodBlock = {
    session_id: "sess-1",
    tool_activity: options.toolActivity ?? [],
    cost_microcents: 29700,
    cost: options.cost ?? "$0.0003",
    usage_estimated: true,
    resolved_policy: options.resolvedPolicy ?? null,
    elapsed_ms: 1.5,
  };
  const body: ChatResponse = {
    id: `chatcmpl-test${counter}`,
    object: "chat.completion",
    created: 1700000000,
    model: "axlerod-scripted",
    choices: [
      {
        index: 0,
        message: { role: "assistant", content },
        finish_reason: "stop",
      },
    ],
    usage: { prompt_tokens: 100, completion_tokens: 20, total_tokens: 120 },
    axlerod,
  };
  return jsonResponse(200, body);
}

/** A promise with its resolve handle exposed, for in-flight assertions. */
export function deferred<T>() {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}
