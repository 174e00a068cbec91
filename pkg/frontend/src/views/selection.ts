/**
 * Selection page: browse, filter, and sort anonymized outputs, track
 * progress, and pick an item to evaluate.
 */

import { ApiClient } from "../api.js";
import { clear, el } from "../dom.js";
import type { ItemStatus } from "../types.js";

export interface SelectionState {
  virus: string;
  protein: string;
  status: "" | ItemStatus;
  sort: "item_id" | "-item_id";
}

export interface SelectionDeps {
  api: ApiClient;
  state: SelectionState;
  onOpen: (itemId: string) => void;
}

export function initialSelectionState(): SelectionState {
  return { virus: "", protein: "", status: "", sort: "item_id" };
}

export async function renderSelectionPage(root: HTMLElement, deps: SelectionDeps): Promise<void> {
  const doc = root.ownerDocument;
  const { api, state } = deps;
  clear(root);

  const progress = el(doc, "span", { className: "progress-badge", attrs: { "data-role": "progress" } });
  const header = el(doc, "header", { className: "toolbar" }, [
    el(doc, "h1", { text: "Outputs to review" }),
    progress,
  ]);

  const virusInput = el(doc, "input", {
    attrs: { type: "search", placeholder: "filter by virus", value: state.virus, "data-role": "filter-virus" },
  });
  const proteinInput = el(doc, "input", {
    attrs: { type: "search", placeholder: "filter by protein", value: state.protein, "data-role": "filter-protein" },
  });
  const statusSelect = el(doc, "select", { attrs: { "data-role": "filter-status" } }, [
    el(doc, "option", { text: "all statuses", attrs: { value: "" } }),
    el(doc, "option", { text: "pending", attrs: { value: "pending" } }),
    el(doc, "option", { text: "completed", attrs: { value: "completed" } }),
  ]);
  statusSelect.value = state.status;
  const sortButton = el(doc, "button", {
    className: "sort-toggle",
    text: state.sort === "item_id" ? "id ↑" : "id ↓",
    attrs: { "data-role": "sort-toggle", title: "toggle sort direction" },
  });
  const applyButton = el(doc, "button", { text: "apply", attrs: { "data-role": "apply-filters" } });

  const rerender = () => renderSelectionPage(root, deps);
  applyButton.addEventListener("click", () => {
    state.virus = virusInput.value.trim();
    state.protein = proteinInput.value.trim();
    state.status = statusSelect.value as SelectionState["status"];
    void rerender();
  });
  sortButton.addEventListener("click", () => {
    state.sort = state.sort === "item_id" ? "-item_id" : "item_id";
    void rerender();
  });

  const controls = el(doc, "div", { className: "filters" }, [
    virusInput,
    proteinInput,
    statusSelect,
    applyButton,
    sortButton,
  ]);

  const listRegion = el(doc, "div", { className: "item-list", attrs: { "data-role": "item-list" } });
  root.append(header, controls, listRegion);

  try {
    const page = await api.listItems({
      virus: state.virus || undefined,
      protein: state.protein || undefined,
      status: state.status || undefined,
      sort: state.sort,
      limit: 500,
    });
    progress.textContent = `${page.completed}/${page.total}`;
    if (page.items.length === 0) {
      listRegion.append(
        el(doc, "p", {
          className: "empty-state",
          text: "No outputs match the current filters.",
          attrs: { "data-role": "empty-state" },
        }),
      );
      return;
    }
    for (const item of page.items) {
      const row = el(doc, "div", { className: "item-row", attrs: { "data-item-id": item.item_id } }, [
        el(doc, "code", { className: "item-id", text: item.item_id }),
        el(doc, "span", { text: item.virus }),
        el(doc, "span", { text: item.protein }),
        el(doc, "span", {
          className: `status-badge status-${item.status}`,
          text: item.status,
          attrs: { "data-role": "status" },
        }),
        el(doc, "button", {
          text: item.status === "completed" ? "revisit" : "review",
          attrs: { "data-role": "open-item" },
          onClick: () => deps.onOpen(item.item_id),
        }),
      ]);
      listRegion.append(row);
    }
  } catch (error) {
    listRegion.append(
      el(doc, "p", {
        className: "error-banner",
        text: `Could not reach the review service (${String(error)}). Retry once it is back.`,
        attrs: { "data-role": "error-banner" },
      }),
      el(doc, "button", { text: "retry", attrs: { "data-role": "retry" }, onClick: () => void rerender() }),
    );
  }
}
