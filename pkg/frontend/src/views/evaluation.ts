/**
 * Evaluation page: a fixed left panel with the extracted mutations and
 * reasoning, and a right panel with the five-category Likert rubric.
 *
 * The submit button stays disabled until every category has a score;
 * picking a score swaps in that level's descriptive text. A 422 from the
 * service is surfaced inline on the category it names.
 */

import { ApiClient, ApiError } from "../api.js";
import { clear, el } from "../dom.js";
import { RUBRIC_CATEGORIES, RubricCategory, RubricDescriptions, RubricForm } from "../rubric.js";

export interface EvaluationDeps {
  api: ApiClient;
  itemId: string;
  descriptions: RubricDescriptions;
  onDone: () => void;
  onBack: () => void;
}

export async function renderEvaluationPage(root: HTMLElement, deps: EvaluationDeps): Promise<void> {
  const doc = root.ownerDocument;
  clear(root);

  let detail;
  try {
    detail = await deps.api.getItem(deps.itemId);
  } catch (error) {
    root.append(
      el(doc, "p", {
        className: "error-banner",
        text: `Could not load item ${deps.itemId}: ${String(error)}`,
        attrs: { "data-role": "error-banner" },
      }),
      el(doc, "button", { text: "back", attrs: { "data-role": "back" }, onClick: deps.onBack }),
    );
    return;
  }

  const form = new RubricForm();
  form.prefill(detail.evaluation);

  const left = el(doc, "section", { className: "panel panel-left" }, [
    el(doc, "button", { text: "← back to list", attrs: { "data-role": "back" }, onClick: deps.onBack }),
    el(doc, "h2", { text: `Output ${detail.item_id}` }),
    el(doc, "p", { className: "item-meta", text: `${detail.virus} / ${detail.protein}` }),
    el(doc, "h3", { text: "Extracted mutations" }),
    el(
      doc,
      "ul",
      { className: "mutations", attrs: { "data-role": "mutations" } },
      detail.mutations.length
        ? detail.mutations.map((m) => el(doc, "li", { text: m }))
        : [el(doc, "li", { className: "muted", text: "(none reported)" })],
    ),
    el(doc, "h3", { text: "Reasoning" }),
    el(doc, "p", { className: "reasoning", text: detail.reasoning, attrs: { "data-role": "reasoning" } }),
  ]);

  const submit = el(doc, "button", {
    className: "submit",
    text: "submit evaluation",
    attrs: { "data-role": "submit", disabled: "" },
  }) as HTMLButtonElement;
  const globalError = el(doc, "p", { className: "error-inline", attrs: { "data-role": "global-error" } });

  const errorSlots = new Map<RubricCategory, HTMLElement>();

  const refreshGate = () => {
    if (form.complete) {
      submit.removeAttribute("disabled");
    } else {
      submit.setAttribute("disabled", "");
    }
  };

  const rows = RUBRIC_CATEGORIES.map((category) => {
    const description = deps.descriptions[category];
    const levelText = el(doc, "p", {
      className: "level-text",
      text: "",
      attrs: { "data-role": `level-text-${category}` },
    });
    const errorSlot = el(doc, "p", {
      className: "error-inline",
      attrs: { "data-role": `error-${category}` },
    });
    errorSlots.set(category, errorSlot);

    const choices = el(
      doc,
      "div",
      { className: "likert", attrs: { role: "radiogroup", "data-category": category } },
      [1, 2, 3, 4, 5].map((score) => {
        const input = el(doc, "input", {
          attrs: {
            type: "radio",
            name: `score-${category}`,
            value: String(score),
            "data-role": `score-${category}-${score}`,
          },
        }) as HTMLInputElement;
        if (form.getScore(category) === score) input.checked = true;
        input.addEventListener("change", () => {
          form.setScore(category, score);
          levelText.textContent = description.levels[String(score)] ?? "";
          errorSlot.textContent = "";
          refreshGate();
        });
        return el(doc, "label", { className: "likert-choice" }, [input, String(score)]);
      }),
    );

    const saved = form.getScore(category);
    if (saved !== undefined) {
      levelText.textContent = description.levels[String(saved)] ?? "";
    }
    return el(doc, "div", { className: "rubric-row", attrs: { "data-role": `rubric-${category}` } }, [
      el(doc, "h4", { text: description.label }),
      el(doc, "p", { className: "question", text: description.question }),
      choices,
      levelText,
      errorSlot,
    ]);
  });

  const comment = el(doc, "textarea", {
    attrs: { placeholder: "optional comment", "data-role": "comment", rows: "3" },
  }) as HTMLTextAreaElement;
  comment.value = form.comment;
  comment.addEventListener("input", () => {
    form.comment = comment.value;
  });

  submit.addEventListener("click", () => {
    void (async () => {
      if (!form.complete) return;
      globalError.textContent = "";
      try {
        await deps.api.submitEvaluation(detail.item_id, form.payload(), form.comment);
        deps.onDone();
      } catch (error) {
        if (error instanceof ApiError && error.status === 422) {
          const offending = RUBRIC_CATEGORIES.find((c) => error.detail.includes(c));
          if (offending) {
            errorSlots.get(offending)!.textContent = error.detail;
            return;
          }
        }
        globalError.textContent = String(error);
      }
    })();
  });

  const right = el(doc, "section", { className: "panel panel-right" }, [
    el(doc, "h3", { text: "Rubric (1 = lowest, 5 = highest)" }),
    ...rows,
    comment,
    submit,
    globalError,
  ]);

  refreshGate();
  root.append(el(doc, "div", { className: "evaluation-layout" }, [left, right]));
}
