import { afterEach, describe, expect, it, vi } from "vitest";

import {
  ApiClient,
  ApiError,
  ServiceUnreachable,
  requestToken,
} from "../src/api.js";

interface Captured {
  url: string;
  method?: string;
  headers: Record<string, string>;
  body?: string;
}

function stubFetch(status: number, payload: unknown): Captured[] {
  const captured: Captured[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      captured.push({
        url,
        method: init?.method,
        headers: (init?.headers ?? {}) as Record<string, string>,
        body: init?.body as string | undefined,
      });
      return new Response(JSON.stringify(payload), {
        status,
        headers: { "content-type": "application/json" },
      });
    }),
  );
  return captured;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("request tokens", () => {
  it("mints distinct non-empty tokens", () => {
    const seen = new Set<string>();
    for (let i = 0; i < 50; i++) {
      const token = requestToken();
      expect(token.length).toBeGreaterThan(8);
      seen.add(token);
    }
    expect(seen.size).toBe(50);
  });
});

describe("request shape", () => {
  it("posts survey submissions with the idempotency token", async () => {
    const captured = stubFetch(201, { ingested: 1, total: 1 });
    const client = new ApiClient("http://svc:8177");
    await client.submitSurvey(
      {
        respondent_id: "r9",
        items: Array.from({ length: 17 }, () => 3),
        review_text: "ok",
        duration_months: 1,
      },
      "tok-123",
    );
    expect(captured).toHaveLength(1);
    expect(captured[0]!.url).toBe("http://svc:8177/api/surveys");
    expect(captured[0]!.method).toBe("POST");
    const body = JSON.parse(captured[0]!.body!);
    expect(body.request_token).toBe("tok-123");
    expect(body.surveys).toHaveLength(1);
  });

  it("wraps a single expert into the batch envelope", async () => {
    const captured = stubFetch(201, { ingested: 1, total: 1 });
    const client = new ApiClient();
    await client.submitExpert(
      { expert_id: "e1", role: "dev", judgments: [] },
      "tok-9",
    );
    const body = JSON.parse(captured[0]!.body!);
    expect(body.experts).toEqual([{ expert_id: "e1", role: "dev", judgments: [] }]);
    expect(body.request_token).toBe("tok-9");
  });

  it("sends the bearer header when a token is configured", async () => {
    const captured = stubFetch(200, {});
    const client = new ApiClient("", "sekrit");
    await client.project();
    expect(captured[0]!.headers["authorization"]).toBe("Bearer sekrit");
  });

  it("stays header-silent without one", async () => {
    const captured = stubFetch(200, {});
    await new ApiClient().project();
    expect(captured[0]!.headers["authorization"]).toBeUndefined();
  });

  it("builds the explanations query", async () => {
    const captured = stubFetch(200, {});
    await new ApiClient().explanations(2, "soft");
    expect(captured[0]!.url).toBe("/api/segments/latest/explanations?cluster=2&mode=soft");
  });
});

describe("error handling", () => {
  it("surfaces the service envelope as a typed error", async () => {
    stubFetch(400, {
      error: {
        code: "invalid_record",
        message: "survey batch has 1 invalid record(s)",
        details: ["record 1: item uq_5 must be an integer in 1..5 (field uq_5)"],
      },
    });
    const err = await new ApiClient()
      .submitSurvey(
        { respondent_id: "x", items: [], review_text: "", duration_months: 0 },
        "t",
      )
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(400);
    expect(err.code).toBe("invalid_record");
    expect(err.details).toHaveLength(1);
  });

  it("keeps a non-envelope failure generic", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => new Response("<html>bad gateway</html>", { status: 502 })),
    );
    const err = await new ApiClient().project().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.code).toBe("internal");
    expect(err.status).toBe(502);
  });

  it("distinguishes an unreachable service from a rejection", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        throw new TypeError("fetch failed");
      }),
    );
    const err = await new ApiClient().project().catch((e) => e);
    expect(err).toBeInstanceOf(ServiceUnreachable);
  });
});
