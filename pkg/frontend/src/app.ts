/**
 * Entry point: token/base-URL session, hash routing between the three
 * pages. All state beyond the session token and filter preferences lives
 * on the server, so any view is reconstructable from the API alone.
 */

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { loadDescriptions } from "./rubric.js";
import { renderAdminDashboard } from "./views/admin.js";
import { renderEvaluationPage } from "./views/evaluation.js";
import { initialSelectionState, renderSelectionPage } from "./views/selection.js";

const TOKEN_KEY = "review-token";
const BASE_URL_KEY = "review-base-url";

function renderLogin(root: HTMLElement, onReady: (baseUrl: string, token: string) => void): void {
  const doc = root.ownerDocument;
  clear(root);
  const baseInput = el(doc, "input", {
    attrs: { placeholder: "service base URL", value: localStorage.getItem(BASE_URL_KEY) ?? "" },
  }) as HTMLInputElement;
  const tokenInput = el(doc, "input", {
    attrs: { placeholder: "evaluator token", type: "password" },
  }) as HTMLInputElement;
  root.append(
    el(doc, "div", { className: "login" }, [
      el(doc, "h1", { text: "Extraction review" }),
      baseInput,
      tokenInput,
      el(doc, "button", {
        text: "enter",
        onClick: () => {
          const baseUrl = baseInput.value.trim() || window.location.origin;
          const token = tokenInput.value.trim();
          if (!token) return;
          localStorage.setItem(TOKEN_KEY, token);
          localStorage.setItem(BASE_URL_KEY, baseUrl);
          onReady(baseUrl, token);
        },
      }),
    ]),
  );
}

export async function startApp(root: HTMLElement): Promise<void> {
  const token = localStorage.getItem(TOKEN_KEY);
  const baseUrl = localStorage.getItem(BASE_URL_KEY);
  if (!token || !baseUrl) {
    renderLogin(root, () => void startApp(root));
    return;
  }
  const api = new ApiClient({ baseUrl, token });
  const descriptions = await loadDescriptions();
  const selectionState = initialSelectionState();

  const route = async () => {
    const hash = window.location.hash;
    if (hash.startsWith("#/item/")) {
      const itemId = decodeURIComponent(hash.slice("#/item/".length));
      await renderEvaluationPage(root, {
        api,
        itemId,
        descriptions,
        onDone: () => {
          window.location.hash = "#/items";
        },
        onBack: () => {
          window.location.hash = "#/items";
        },
      });
    } else if (hash === "#/admin") {
      await renderAdminDashboard(root, { api });
    } else {
      await renderSelectionPage(root, {
        api,
        state: selectionState,
        onOpen: (itemId) => {
          window.location.hash = `#/item/${encodeURIComponent(itemId)}`;
        },
      });
    }
  };

  window.addEventListener("hashchange", () => void route());
  await route();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void startApp(document.getElementById("app")!);
}
