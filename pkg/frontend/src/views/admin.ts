/**
 * Admin dashboard: unblinded table of all evaluations (method and model
 * visible), a minimum-contribution filter, and CSV export.
 */

import { ApiClient, ApiError } from "../api.js";
import { parseCsvRecords } from "../csv.js";
import { clear, el } from "../dom.js";
import { RUBRIC_CATEGORIES } from "../rubric.js";
import type { ExportRow } from "../types.js";

export interface AdminDeps {
  api: ApiClient;
  /** Receives the CSV for download; overridable in tests. */
  download?: (filename: string, text: string) => void;
  minContribution?: number;
}

const COLUMNS = ["item_id", "evaluator_id", ...RUBRIC_CATEGORIES, "comment", "method", "model", "protein"];

function browserDownload(doc: Document, filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = doc.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  doc.body.append(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}

export async function renderAdminDashboard(root: HTMLElement, deps: AdminDeps): Promise<void> {
  const doc = root.ownerDocument;
  clear(root);

  let csvText: string;
  try {
    csvText = await deps.api.exportCsv();
  } catch (error) {
    const denied = error instanceof ApiError && (error.status === 403 || error.status === 401);
    root.append(
      el(doc, "p", {
        className: denied ? "access-denied" : "error-banner",
        text: denied
          ? "Access denied: the admin dashboard requires an admin token."
          : `Could not load evaluations: ${String(error)}`,
        attrs: { "data-role": denied ? "access-denied" : "error-banner" },
      }),
    );
    return;
  }

  const rows = parseCsvRecords(csvText);
  const minContribution = deps.minContribution ?? 1;

  const filterSelect = el(doc, "select", { attrs: { "data-role": "min-contribution" } },
    [1, 2, 3, 4, 5].map((level) =>
      el(doc, "option", { text: `contribution ≥ ${level}`, attrs: { value: String(level) } }),
    ),
  ) as HTMLSelectElement;
  filterSelect.value = String(minContribution);
  filterSelect.addEventListener("change", () => {
    deps.minContribution = Number(filterSelect.value);
    void renderAdminDashboard(root, deps);
  });

  const exportButton = el(doc, "button", {
    text: "export CSV",
    attrs: { "data-role": "export" },
    onClick: () => {
      const sink = deps.download ?? ((name, text) => browserDownload(doc, name, text));
      sink("evaluations.csv", csvText);
    },
  });

  const visible = rows.filter((row) => Number(row["contribution"] ?? "0") >= minContribution);

  const table = el(doc, "table", { className: "admin-table", attrs: { "data-role": "admin-table" } }, [
    el(doc, "thead", {}, [
      el(doc, "tr", {}, COLUMNS.map((name) => el(doc, "th", { text: name }))),
    ]),
    el(
      doc,
      "tbody",
      {},
      visible.map((row: ExportRow) =>
        el(doc, "tr", { attrs: { "data-role": "evaluation-row" } },
          COLUMNS.map((name) => el(doc, "td", { text: row[name] ?? "" })),
        ),
      ),
    ),
  ]);

  root.append(
    el(doc, "header", { className: "toolbar" }, [
      el(doc, "h1", { text: "Evaluations (unblinded)" }),
      el(doc, "span", {
        text: `${visible.length} of ${rows.length} shown`,
        attrs: { "data-role": "row-count" },
      }),
      filterSelect,
      exportButton,
    ]),
    table,
  );
}
