// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { ApiError, type ApiClient } from "../src/api.js";
import { renderAdminDashboard } from "../src/views/admin.js";

const CSV =
  "item_id,evaluator_id,clarity,conciseness,correctness,citations_context,contribution,comment,submitted_at,method,model,virus,protein\r\n" +
  'i1,alice,5,4,5,3,4,"good, mostly",2026-02-01T00:00:00+00:00,villa,test-model,influenza A,PB2\r\n' +
  "i2,bob,2,2,2,2,2,,2026-02-01T00:00:00+00:00,rag-abstracts,test-model,influenza A,NA\r\n" +
  "i3,alice,4,4,4,4,5,,2026-02-01T00:00:00+00:00,zero-shot,test-model,influenza A,NS1\r\n";

function fakeApi(csv: string | ApiError): ApiClient {
  return {
    async exportCsv() {
      if (csv instanceof ApiError) throw csv;
      return csv;
    },
  } as unknown as ApiClient;
}

function root(): HTMLElement {
  const node = document.createElement("div");
  document.body.append(node);
  return node;
}

describe("admin dashboard", () => {
  it("renders every evaluation with the unblinded method column", async () => {
    const host = root();
    await renderAdminDashboard(host, { api: fakeApi(CSV) });
    const rows = host.querySelectorAll('[data-role="evaluation-row"]');
    expect(rows).toHaveLength(3);
    expect(host.textContent).toContain("villa");
    expect(host.textContent).toContain("rag-abstracts");
  });

  it("filters by minimum contribution", async () => {
    const host = root();
    await renderAdminDashboard(host, { api: fakeApi(CSV), minContribution: 4 });
    const rows = host.querySelectorAll('[data-role="evaluation-row"]');
    expect(rows).toHaveLength(2);
    expect(host.querySelector('[data-role="row-count"]')!.textContent).toBe("2 of 3 shown");
  });

  it("re-renders when the filter changes", async () => {
    const host = root();
    await renderAdminDashboard(host, { api: fakeApi(CSV) });
    const select = host.querySelector('[data-role="min-contribution"]') as HTMLSelectElement;
    select.value = "5";
    select.dispatchEvent(new Event("change"));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(host.querySelectorAll('[data-role="evaluation-row"]')).toHaveLength(1);
  });

  it("export button hands the CSV to the download sink", async () => {
    const host = root();
    const downloads: Array<{ name: string; text: string }> = [];
    await renderAdminDashboard(host, {
      api: fakeApi(CSV),
      download: (name, text) => downloads.push({ name, text }),
    });
    (host.querySelector('[data-role="export"]') as HTMLButtonElement).click();
    expect(downloads).toHaveLength(1);
    expect(downloads[0]!.name).toBe("evaluations.csv");
    expect(downloads[0]!.text).toBe(CSV);
  });

  it("works on an empty store", async () => {
    const host = root();
    const headerOnly = CSV.split("\r\n")[0]! + "\r\n";
    const downloads: string[] = [];
    await renderAdminDashboard(host, {
      api: fakeApi(headerOnly),
      download: (_name, text) => downloads.push(text),
    });
    expect(host.querySelectorAll('[data-role="evaluation-row"]')).toHaveLength(0);
    (host.querySelector('[data-role="export"]') as HTMLButtonElement).click();
    expect(downloads).toHaveLength(1);
  });

  it("shows access denied for evaluator tokens", async () => {
    const host = root();
    await renderAdminDashboard(host, { api: fakeApi(new ApiError(403, "admin role required")) });
    expect(host.querySelector('[data-role="access-denied"]')).not.toBeNull();
    expect(host.querySelector('[data-role="admin-table"]')).toBeNull();
  });
});
