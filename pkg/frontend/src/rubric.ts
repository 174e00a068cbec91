/**
 * Rubric form state: five categories, each scored 1..5.
 *
 * The submit gate lives here (complete only when every category has a
 * score) so the views stay thin. The per-level descriptive text is an
 * editable JSON config (config/rubric-descriptions.json); the constant
 * below is the built-in fallback and the shape documentation.
 */

export const RUBRIC_CATEGORIES = [
  "clarity",
  "conciseness",
  "correctness",
  "citations_context",
  "contribution",
] as const;

export type RubricCategory = (typeof RUBRIC_CATEGORIES)[number];

export interface CategoryDescription {
  label: string;
  question: string;
  /** Descriptive text per score level, keys "1".."5". */
  levels: Record<string, string>;
}

export type RubricDescriptions = Record<RubricCategory, CategoryDescription>;

export const DEFAULT_DESCRIPTIONS: RubricDescriptions = {
  clarity: {
    label: "Clarity",
    question: "How clearly are the ideas and arguments expressed and organized?",
    levels: {
      "1": "Disorganized or incoherent; the argument cannot be followed.",
      "2": "Hard to follow; ordering and phrasing obscure the point.",
      "3": "Understandable with effort; some passages need rereading.",
      "4": "Mostly clear and well organized with minor rough spots.",
      "5": "Exceptionally clear, coherent, and well structured throughout.",
    },
  },
  conciseness: {
    label: "Conciseness",
    question: "Is the text efficient and purposeful while conveying all relevant information?",
    levels: {
      "1": "Heavily padded or repetitive; relevant content is buried.",
      "2": "Noticeably verbose; much text adds nothing.",
      "3": "Some redundancy, but the substance comes through.",
      "4": "Mostly tight; only occasional excess wording.",
      "5": "Every sentence earns its place; nothing relevant is missing.",
    },
  },
  correctness: {
    label: "Correctness",
    question: "Is the writing mechanically correct, and are the identified mutations accurate?",
    levels: {
      "1": "Pervasive errors; the named mutations are wrong or fabricated.",
      "2": "Several errors in mechanics or in the mutations named.",
      "3": "Mixed: mostly sound with a few questionable claims.",
      "4": "Accurate with at most minor slips.",
      "5": "Mechanically clean and fully consistent with the known mutations.",
    },
  },
  citations_context: {
    label: "Citations / context",
    question: "Are the citations and surrounding context relevant, authentic, and complete?",
    levels: {
      "1": "No usable supporting context, or fabricated references.",
      "2": "Sparse or dubious support for the claims.",
      "3": "Some relevant support, with gaps.",
      "4": "Relevant and authentic support for most claims.",
      "5": "Complete, relevant, and verifiable supporting context.",
    },
  },
  contribution: {
    label: "Contribution",
    question: "Overall, how useful is this output for understanding host-virus interactions?",
    levels: {
      "1": "No value for the question asked.",
      "2": "Marginal value; little beyond generic statements.",
      "3": "Moderately useful; a partial answer.",
      "4": "A solid, usable answer with minor omissions.",
      "5": "A significant, directly usable contribution.",
    },
  },
};

/** Fetch the editable descriptions config, falling back to the defaults. */
export async function loadDescriptions(
  url = "config/rubric-descriptions.json",
  fetchImpl: typeof fetch = globalThis.fetch?.bind(globalThis),
): Promise<RubricDescriptions> {
  if (!fetchImpl) return DEFAULT_DESCRIPTIONS;
  try {
    const response = await fetchImpl(url);
    if (!response.ok) return DEFAULT_DESCRIPTIONS;
    return (await response.json()) as RubricDescriptions;
  } catch {
    return DEFAULT_DESCRIPTIONS;
  }
}

export class RubricForm {
  private readonly scores = new Map<RubricCategory, number>();
  comment = "";

  setScore(category: RubricCategory, score: number): void {
    if (!RUBRIC_CATEGORIES.includes(category)) {
      throw new Error(`unknown rubric category: ${category}`);
    }
    if (!Number.isInteger(score) || score < 1 || score > 5) {
      throw new Error(`score must be an integer in 1..5, got ${score}`);
    }
    this.scores.set(category, score);
  }

  getScore(category: RubricCategory): number | undefined {
    return this.scores.get(category);
  }

  /** Categories still lacking a score; submit stays blocked until empty. */
  get missing(): RubricCategory[] {
    return RUBRIC_CATEGORIES.filter((category) => !this.scores.has(category));
  }

  get complete(): boolean {
    return this.missing.length === 0;
  }

  prefill(saved: { scores: Record<string, number>; comment: string } | null): void {
    if (!saved) return;
    for (const category of RUBRIC_CATEGORIES) {
      const value = saved.scores[category];
      if (value !== undefined) this.setScore(category, value);
    }
    this.comment = saved.comment;
  }

  payload(): Record<string, number> {
    if (!this.complete) {
      throw new Error(`rubric incomplete; missing: ${this.missing.join(", ")}`);
    }
    const payload: Record<string, number> = {};
    for (const category of RUBRIC_CATEGORIES) {
      payload[category] = this.scores.get(category)!;
    }
    return payload;
  }
}
