/**
 * Thin typed client for the review service.
 *
 * Every request carries the evaluator's bearer token; non-2xx responses
 * become ApiError with the server's detail string, so views can surface
 * validation messages (e.g. "missing category: clarity") inline.
 */

import type { ItemDetail, ItemList, ListParams } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

export interface ApiClientOptions {
  baseUrl: string;
  token: string;
  fetchImpl?: typeof fetch;
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchImpl: typeof fetch;

  constructor(options: ApiClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/+$/, "");
    this.token = options.token;
    this.fetchImpl = options.fetchImpl ?? globalThis.fetch.bind(globalThis);
  }

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers = new Headers(init.headers);
    headers.set("Authorization", `Bearer ${this.token}`);
    if (init.body !== undefined) {
      headers.set("Content-Type", "application/json");
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, { ...init, headers });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
        else if (body.detail !== undefined) detail = JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async health(): Promise<{ status: string; items: number }> {
    const response = await this.request("/health");
    return (await response.json()) as { status: string; items: number };
  }

  async listItems(params: ListParams = {}): Promise<ItemList> {
    const query = new URLSearchParams();
    if (params.virus) query.set("virus", params.virus);
    if (params.protein) query.set("protein", params.protein);
    if (params.status) query.set("status", params.status);
    if (params.sort) query.set("sort", params.sort);
    if (params.limit !== undefined) query.set("limit", String(params.limit));
    if (params.offset !== undefined) query.set("offset", String(params.offset));
    const suffix = query.toString() ? `?${query.toString()}` : "";
    const response = await this.request(`/items${suffix}`);
    return (await response.json()) as ItemList;
  }

  async getItem(itemId: string): Promise<ItemDetail> {
    const response = await this.request(`/items/${encodeURIComponent(itemId)}`);
    return (await response.json()) as ItemDetail;
  }

  async submitEvaluation(
    itemId: string,
    scores: Record<string, number>,
    comment: string,
  ): Promise<{ item_id: string; status: string }> {
    const response = await this.request(`/items/${encodeURIComponent(itemId)}/evaluation`, {
      method: "PUT",
      body: JSON.stringify({ scores, comment }),
    });
    return (await response.json()) as { item_id: string; status: string };
  }

  /** Admin-only: the unblinded evaluation table as CSV text. */
  async exportCsv(): Promise<string> {
    const response = await this.request("/admin/export.csv");
    return await response.text();
  }

  /** Admin-only: load a run manifest as anonymized review items. */
  async ingestManifest(manifest: unknown): Promise<{ created: string[] }> {
    const response = await this.request("/admin/items", {
      method: "POST",
      body: JSON.stringify(manifest),
    });
    return (await response.json()) as { created: string[] };
  }
}
