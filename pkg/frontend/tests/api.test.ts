import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { flushCorrections, flushWithRetry, moveRecord }
  from "../src/corrections.js";

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("api client", () => {
  it("builds query urls and decodes json", async () => {
    const fetchFn = vi.fn(async (url: string) => {
      expect(url).toBe("http://x/frames?t0_ms=5&t1_ms=7");
      return jsonResponse({ width: 4, height: 2, frames: [] });
    });
    const api = new ApiClient("http://x", fetchFn);
    const frames = await api.frames(5, 7);
    expect(frames.width).toBe(4);
  });

  it("raises ApiError with status on failures", async () => {
    const api = new ApiClient("", async () =>
      new Response("{\"error\": \"nope\"}", { status: 404 }));
    await expect(api.clusters(3)).rejects.toThrowError(ApiError);
  });

  it("maps 409 to a conflict result instead of throwing", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse({ error: "stale", current_version: 9 }, 409));
    const out = await api.postCorrections(1, [moveRecord(0, "a", 1, 2)]);
    expect(out.status).toBe("conflict");
    expect(out.version).toBe(9);
  });

  it("returns export text verbatim", async () => {
    const api = new ApiClient("", async () =>
      new Response("FLBL 1\n", { status: 200 }));
    expect(await api.exportLabels()).toBe("FLBL 1\n");
  });
});

describe("flush protocol", () => {
  it("skips empty pending sets", async () => {
    const api = new ApiClient("", async () => {
      throw new Error("should not fetch");
    });
    const out = await flushCorrections(api, 4, []);
    expect(out.status).toBe("empty");
    expect(out.version).toBe(4);
  });

  it("posts base_version and records", async () => {
    const fetchFn = vi.fn(async (_url: string, init?: RequestInit) => {
      const body = JSON.parse(String(init!.body));
      expect(body.base_version).toBe(4);
      expect(body.records).toHaveLength(1);
      expect(body.records[0].action).toBe("move");
      return jsonResponse({ version: 5, labels: [] });
    });
    const api = new ApiClient("", fetchFn);
    const out = await flushCorrections(api, 4, [moveRecord(1, "a", 2, 3)]);
    expect(out.status).toBe("ok");
    expect(out.version).toBe(5);
  });

  it("retries once on top of the fresh version after a conflict", async () => {
    let calls = 0;
    const api = new ApiClient("", async (_url, init) => {
      calls += 1;
      const body = JSON.parse(String(init!.body));
      if (calls === 1) {
        expect(body.base_version).toBe(1);
        return jsonResponse({ error: "stale", current_version: 6 }, 409);
      }
      expect(body.base_version).toBe(6);
      return jsonResponse({ version: 7, labels: [] });
    });
    const out = await flushWithRetry(api, 1, [moveRecord(1, "a", 2, 3)]);
    expect(calls).toBe(2);
    expect(out.status).toBe("ok");
    expect(out.version).toBe(7);
  });
});
