/**
 * Payload shapes of the review service REST API.
 *
 * Evaluator-facing payloads are blind: they never carry the method or
 * model that produced an output. Those columns exist only in the admin
 * CSV export.
 */

export type ItemStatus = "pending" | "completed";

export interface ItemSummary {
  item_id: string;
  virus: string;
  protein: string;
  mutations: string[];
  reasoning: string;
  status: ItemStatus;
}

export interface ItemList {
  items: ItemSummary[];
  total: number;
  completed: number;
  limit: number;
  offset: number;
}

export interface SavedEvaluation {
  scores: Record<string, number>;
  comment: string;
  submitted_at: string;
}

export interface ItemDetail extends ItemSummary {
  evaluation: SavedEvaluation | null;
  rubric_categories: string[];
}

export interface ListParams {
  virus?: string;
  protein?: string;
  status?: ItemStatus | "";
  sort?: "item_id" | "-item_id";
  limit?: number;
  offset?: number;
}

/** One row of the admin export, keyed by CSV header. */
export type ExportRow = Record<string, string>;
