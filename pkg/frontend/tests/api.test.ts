import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Captured {
  url: string;
  method: string;
  headers: Headers;
  body: string | undefined;
}

function clientWith(status: number, payload: unknown, captured: Captured[] = []) {
  const fetchImpl = (async (input: RequestInfo | URL, init?: RequestInit) => {
    captured.push({
      url: String(input),
      method: init?.method ?? "GET",
      headers: new Headers(init?.headers),
      body: init?.body as string | undefined,
    });
    const body = typeof payload === "string" ? payload : JSON.stringify(payload);
    return new Response(body, {
      status,
      headers: { "content-type": typeof payload === "string" ? "text/csv" : "application/json" },
    });
  }) as typeof fetch;
  return { client: new ApiClient({ baseUrl: "http://svc.test/", token: "tok-x", fetchImpl }), captured };
}

describe("ApiClient", () => {
  it("sends the bearer token and strips trailing slashes", async () => {
    const { client, captured } = clientWith(200, { items: [], total: 0, completed: 0, limit: 100, offset: 0 });
    await client.listItems();
    expect(captured[0]!.url).toBe("http://svc.test/items");
    expect(captured[0]!.headers.get("authorization")).toBe("Bearer tok-x");
  });

  it("builds filter, sort, and paging query params", async () => {
    const { client, captured } = clientWith(200, { items: [], total: 0, completed: 0, limit: 5, offset: 10 });
    await client.listItems({ protein: "PB2", status: "pending", sort: "-item_id", limit: 5, offset: 10 });
    const url = new URL(captured[0]!.url);
    expect(url.searchParams.get("protein")).toBe("PB2");
    expect(url.searchParams.get("status")).toBe("pending");
    expect(url.searchParams.get("sort")).toBe("-item_id");
    expect(url.searchParams.get("limit")).toBe("5");
    expect(url.searchParams.get("offset")).toBe("10");
  });

  it("PUTs evaluations as JSON", async () => {
    const { client, captured } = clientWith(200, { item_id: "i1", status: "completed" });
    await client.submitEvaluation("i1", { clarity: 5 }, "note");
    expect(captured[0]!.method).toBe("PUT");
    expect(captured[0]!.headers.get("content-type")).toBe("application/json");
    expect(JSON.parse(captured[0]!.body!)).toEqual({ scores: { clarity: 5 }, comment: "note" });
  });

  it("raises ApiError carrying the server detail", async () => {
    const { client } = clientWith(422, { detail: "missing category: contribution" });
    await expect(client.submitEvaluation("i1", {}, "")).rejects.toThrowError(ApiError);
    try {
      await client.submitEvaluation("i1", {}, "");
    } catch (error) {
      const apiError = error as ApiError;
      expect(apiError.status).toBe(422);
      expect(apiError.detail).toBe("missing category: contribution");
    }
  });

  it("returns export CSV as text", async () => {
    const { client } = clientWith(200, "item_id,evaluator_id\r\na,b\r\n");
    expect(await client.exportCsv()).toContain("item_id,evaluator_id");
  });

  it("encodes item ids in paths", async () => {
    const { client, captured } = clientWith(200, {
      item_id: "a/b", virus: "", protein: "", mutations: [], reasoning: "",
      status: "pending", evaluation: null, rubric_categories: [],
    });
    await client.getItem("a/b");
    expect(captured[0]!.url).toBe("http://svc.test/items/a%2Fb");
  });
});
