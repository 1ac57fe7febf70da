import { readFileSync } from "node:fs";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { AxlerodWidget, MountConflictError } from "../src/widget.js";
import {
  chatResponse,
  deferred,
  errorResponse,
  sessionResponse,
  stubFetch,
} from "./helpers.js";

function host(): HTMLElement {
  const el = document.createElement("div");
  el.id = "panel";
  document.body.appendChild(el);
  return el;
}

function mountDefault(el: HTMLElement, context?: string): AxlerodWidget {
  return AxlerodWidget.mount({
    baseUrl: "http://svc.test",
    mount: el,
    ...(context ? { context } : {}),
  });
}

function entryTexts(el: HTMLElement): string[] {
  return Array.from(el.querySelectorAll(".axlerod-entry > div:first-child")).map(
    (node) => node.textContent ?? "",
  );
}

function banner(el: HTMLElement): string | null {
  return el.querySelector(".axlerod-banner span")?.textContent ?? null;
}

beforeEach(() => {
  document.body.innerHTML = "";
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("mount", () => {
  it("creates a session and enables the composer", async () => {
    const { calls } = stubFetch(() => sessionResponse("sess-1"));
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(widget.session).toBe("sess-1");
    expect(calls[0]).toMatchObject({ url: "http://svc.test/sessions", body: {} });
    const input = el.querySelector("input") as HTMLInputElement;
    expect(input.disabled).toBe(false);
  });

  it("accepts a selector and passes the configured context along", async () => {
    const { calls } = stubFetch(() => sessionResponse("sess-1", "AUT9000007"));
    host();
    const widget = AxlerodWidget.mount({
      baseUrl: "http://svc.test",
      mount: "#panel",
      context: "AUT9000007",
    });
    await widget.ready;

    expect(calls[0]?.body).toEqual({ context: "AUT9000007" });
    expect(banner(document.body)).toBe("Viewing policy AUT9000007");
  });

  it("rejects a second mount on the same element", async () => {
    stubFetch(() => sessionResponse());
    const el = host();
    const widget = mountDefault(el);
    expect(() => mountDefault(el)).toThrow(MountConflictError);
    await widget.ready;
    // destroying releases the element for a fresh mount
    widget.destroy();
    expect(() => mountDefault(el)).not.toThrow();
  });

  it("fails fast on a missing element or a bad base URL", () => {
    stubFetch(() => sessionResponse());
    expect(() =>
      AxlerodWidget.mount({ baseUrl: "http://svc.test", mount: "#nowhere" }),
    ).toThrow(/mount element not found/);
    expect(() =>
      AxlerodWidget.mount({ baseUrl: "svc.test", mount: host() }),
    ).toThrow(/baseUrl/);
  });

  it("shows an error banner and keeps input disabled when the service is down", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => {
      throw new TypeError("ECONNREFUSED");
    }));
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    const error = el.querySelector(".axlerod-error");
    expect(error?.textContent).toMatch(/Could not reach the assistant service/);
    expect((el.querySelector("input") as HTMLInputElement).disabled).toBe(true);
    expect(await widget.send("hello?")).toBe(false);
  });
});

describe("send", () => {
  it("renders the user entry, the reply, tool chips, and per-turn cost", async () => {
    stubFetch(
      () => sessionResponse(),
      () =>
        chatResponse("This policy is on a 12-Pay bill plan.", {
          toolActivity: [{ tool: "policy_detail", latency_ms: 123, status: "ok" }],
          cost: "$0.0004",
        }),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.send("What bill plan is AUT9000007 on?")).toBe(true);
    expect(entryTexts(el)).toEqual([
      "What bill plan is AUT9000007 on?",
      "This policy is on a 12-Pay bill plan.",
    ]);
    const chip = el.querySelector(".axlerod-chip");
    expect(chip?.textContent).toBe("policy_detail · 123 ms");
    expect(el.querySelector(".axlerod-cost")?.textContent).toBe("$0.0004");
  });

  it("refuses empty text and keeps the send button disabled for it", async () => {
    const { calls } = stubFetch(() => sessionResponse());
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.send("   ")).toBe(false);
    expect(calls).toHaveLength(1); // only the session call
    const button = el.querySelector("button[type=submit]") as HTMLButtonElement;
    expect(button.disabled).toBe(true);
  });

  it("allows exactly one in-flight turn per widget", async () => {
    const gate = deferred<Response>();
    const { calls } = stubFetch(
      () => sessionResponse(),
      () => gate.promise,
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    const first = widget.send("first question");
    expect(await widget.send("second question")).toBe(false);
    expect(el.querySelector(".axlerod-notice")?.textContent).toMatch(/still in flight/);

    gate.resolve(chatResponse("first answer"));
    expect(await first).toBe(true);
    // session + exactly one chat call; the second send never hit the network
    expect(calls.filter((c) => c.url.endsWith("/v1/chat/completions"))).toHaveLength(1);
    expect(entryTexts(el)).toEqual(["first question", "first answer"]);
  });

  it("shows a busy notice when the service answers 409", async () => {
    stubFetch(
      () => sessionResponse(),
      () => errorResponse(409, "turn_in_flight", "turn already in flight"),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.send("hello")).toBe(false);
    expect(el.querySelector(".axlerod-notice")?.textContent).toMatch(/busy/);
    // the user entry stays; no failed assistant entry is added for a 409
    expect(entryTexts(el)).toEqual(["hello"]);
  });

  it("offers a retry on a failed turn and completes it in place", async () => {
    stubFetch(
      () => sessionResponse(),
      () => errorResponse(502, "backend_error", "backend exploded"),
      () => chatResponse("recovered answer"),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.send("flaky question")).toBe(false);
    const failed = el.querySelector(".axlerod-entry.failed");
    expect(failed?.textContent).toMatch(/backend exploded/);

    (failed?.querySelector("button.axlerod-retry") as HTMLButtonElement).click();
    await vi.waitFor(() => {
      expect(entryTexts(el)).toEqual(["flaky question", "recovered answer"]);
    });
    expect(el.querySelector(".axlerod-entry.failed")).toBeNull();
    expect(widget.transcript).toHaveLength(2);
  });

  it("updates the banner from resolved_policy", async () => {
    stubFetch(
      () => sessionResponse(),
      () => chatResponse("Found it.", { resolvedPolicy: "AUT9000007" }),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;
    expect(banner(el)).toBeNull();

    await widget.send("find the Fall River policy");
    expect(banner(el)).toBe("Viewing policy AUT9000007");
    expect(widget.viewingPolicy).toBe("AUT9000007");
  });
});

describe("setContext", () => {
  it("validates the number locally and never sends malformed input", async () => {
    const { calls } = stubFetch(() => sessionResponse());
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.setContext("AUT12")).toBe(false);
    expect(calls).toHaveLength(1); // no PATCH happened
    expect(el.querySelector(".axlerod-notice")?.textContent).toMatch(/not a policy number/);
  });

  it("PATCHes valid context and renders the banner", async () => {
    const { calls } = stubFetch(
      () => sessionResponse("sess-1"),
      (call) => sessionResponse("sess-1", (call.body as { context: string }).context),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.setContext("HOM1234567")).toBe(true);
    expect(calls[1]).toMatchObject({
      url: "http://svc.test/sessions/sess-1/context",
      method: "PATCH",
      body: { context: "HOM1234567" },
    });
    expect(banner(el)).toBe("Viewing policy HOM1234567");
  });

  it("clearing the context removes the banner", async () => {
    stubFetch(
      () => sessionResponse("sess-1", "AUT9000007"),
      () => sessionResponse("sess-1", null),
    );
    const el = host();
    const widget = mountDefault(el, "AUT9000007");
    await widget.ready;
    expect(banner(el)).toBe("Viewing policy AUT9000007");

    expect(await widget.setContext(null)).toBe(true);
    expect(banner(el)).toBeNull();
  });

  it("surfaces a server-side rejection inline", async () => {
    stubFetch(
      () => sessionResponse("sess-1"),
      () => errorResponse(422, "invalid_context", "malformed policy number 'UMB0000001'"),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    expect(await widget.setContext("UMB0000001")).toBe(false);
    expect(el.querySelector(".axlerod-notice")?.textContent).toMatch(/malformed policy number/);
    expect(banner(el)).toBeNull();
  });
});

describe("transcript", () => {
  it("is append-only and survives a re-render", async () => {
    stubFetch(
      () => sessionResponse(),
      () => chatResponse("answer one"),
      () => chatResponse("answer two"),
    );
    const el = host();
    const widget = mountDefault(el);
    await widget.ready;

    await widget.send("question one");
    await widget.send("question two");
    const before = entryTexts(el);
    expect(before).toEqual(["question one", "answer one", "question two", "answer two"]);

    widget.rerender();
    widget.rerender();
    expect(entryTexts(el)).toEqual(before);
  });
});

describe("reference dialogue", () => {
  interface Transcript {
    user_turns: string[];
    responses: Array<{
      content?: string;
      tool_call?: { name: string };
    }>;
  }

  // vitest runs with cwd = frontend/; the transcript ships with the service
  const transcript: Transcript = JSON.parse(
    readFileSync("../src/axlerod/data/demo_transcript.json", "utf-8"),
  );

  it("renders the recorded three-turn conversation verbatim", async () => {
    const answers = transcript.responses
      .filter((r) => typeof r.content === "string")
      .map((r) => r.content as string);
    const toolNames = transcript.responses
      .filter((r) => r.tool_call)
      .map((r) => (r.tool_call as { name: string }).name);
    expect(answers).toHaveLength(3);

    let turn = 0;
    stubFetch(
      () => sessionResponse(),
      () => {
        const reply = chatResponse(answers[turn] as string, {
          toolActivity: [
            { tool: toolNames[turn] as string, latency_ms: 2, status: "ok" },
          ],
          resolvedPolicy: turn >= 1 ? "AUT9000007" : null,
        });
        turn += 1;
        return reply;
      },
    );

    const el = host();
    const widget = mountDefault(el);
    await widget.ready;
    for (const userText of transcript.user_turns) {
      expect(await widget.send(userText)).toBe(true);
    }

    const expected: string[] = [];
    transcript.user_turns.forEach((u, i) => {
      expected.push(u, answers[i] as string);
    });
    expect(entryTexts(el)).toEqual(expected);
    expect(banner(el)).toBe("Viewing policy AUT9000007");
    const chips = Array.from(el.querySelectorAll(".axlerod-chip")).map(
      (c) => c.textContent,
    );
    expect(chips).toEqual([
      "policy_search · 2 ms",
      "policy_search · 2 ms",
      "policy_detail · 2 ms",
    ]);
  });
});
