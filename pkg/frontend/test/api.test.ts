import { afterEach, describe, expect, it, vi } from "vitest";

import { ServiceClient, ServiceError } from "../src/api.js";
import { chatResponse, errorResponse, sessionResponse, stubFetch } from "./helpers.js";

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ServiceClient", () => {
  it("creates a session with and without context", async () => {
    const { calls } = stubFetch(() => sessionResponse("abc", "AUT9000007"));
    const client = new ServiceClient("http://svc.test");

    const info = await client.createSession("AUT9000007");
    expect(info).toEqual({ session_id: "abc", context: "AUT9000007" });
    expect(calls[0]).toMatchObject({
      url: "http://svc.test/sessions",
      method: "POST",
      body: { context: "AUT9000007" },
    });

    await client.createSession();
    expect(calls[1]?.body).toEqual({});
  });

  it("strips a trailing slash from the base URL", async () => {
    const { calls } = stubFetch(() => sessionResponse());
    await new ServiceClient("http://svc.test/").createSession();
    expect(calls[0]?.url).toBe("http://svc.test/sessions");
  });

  it("sends the session header and bearer token on chat", async () => {
    const { calls } = stubFetch(() => chatResponse("hello"));
    const client = new ServiceClient("http://svc.test", "tok-9");

    const reply = await client.chat("sess-1", "hi there");
    expect(reply.choices[0]?.message.content).toBe("hello");
    expect(calls[0]?.url).toBe("http://svc.test/v1/chat/completions");
    expect(calls[0]?.headers["X-Axlerod-Session"]).toBe("sess-1");
    expect(calls[0]?.headers["Authorization"]).toBe("Bearer tok-9");
    expect(calls[0]?.body).toEqual({
      messages: [{ role: "user", content: "hi there" }],
    });
  });

  it("PATCHes the context endpoint, null meaning clear", async () => {
    const { calls } = stubFetch(() => sessionResponse("sess-1", null));
    await new ServiceClient("http://svc.test").setContext("sess-1", null);
    expect(calls[0]).toMatchObject({
      url: "http://svc.test/sessions/sess-1/context",
      method: "PATCH",
      body: { context: null },
    });
  });

  it("surfaces the error envelope as a typed ServiceError", async () => {
    stubFetch(() => errorResponse(404, "unknown_session", "no such session"));
    const client = new ServiceClient("http://svc.test");
    const failure = await client.chat("nope", "hi").catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ServiceError);
    expect(failure).toMatchObject({
      status: 404,
      code: "unknown_session",
      message: "no such session",
    });
  });

  it("keeps the status text when the error body is not JSON", async () => {
    stubFetch(() => new Response("boom", { status: 500, statusText: "Internal" }));
    const failure = await new ServiceClient("http://svc.test")
      .createSession()
      .catch((e: unknown) => e);
    expect(failure).toMatchObject({ status: 500, code: "http_error" });
  });

  it("maps a network failure to status 0 / unreachable", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => {
      throw new TypeError("fetch failed");
    }));
    const failure = await new ServiceClient("http://svc.test")
      .createSession()
      .catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ServiceError);
    expect(failure).toMatchObject({ status: 0, code: "unreachable" });
  });
});
