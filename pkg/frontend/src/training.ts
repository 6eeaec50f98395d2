/** Training flow: screen models derived from API feedback.
 *
 * The disagreement list is rendered verbatim — gold labels, the annotator's
 * labels, and the explanation come straight from the API with no rewording.
 */

import type { Disagreement, TrainingFeedback } from "./types.js";

export interface DisagreementRow {
  turn: number;
  goldLabels: string;
  annotatorLabels: string;
  explanation: string;
}

export type FeedbackScreen =
  | { kind: "clean_round"; round: number; message: string; nextAction: "next_round" }
  | {
      kind: "mistakes";
      round: number;
      mistakeCount: number;
      rows: DisagreementRow[];
      nextAction: "next_round";
    }
  | { kind: "passed"; mistakeCount: number; rows: DisagreementRow[]; nextAction: "start_work" }
  | { kind: "failed"; mistakeCount: number; rows: DisagreementRow[]; nextAction: "terminal" };

function formatLabels(labels: string[]): string {
  return labels.length === 0 ? "(none)" : labels.join(", ");
}

export function disagreementRows(disagreements: Disagreement[]): DisagreementRow[] {
  return disagreements.map((d) => ({
    turn: d.turn,
    goldLabels: formatLabels(d.gold_labels),
    annotatorLabels: formatLabels(d.annotator_labels),
    explanation: d.explanation,
  }));
}

export function feedbackScreen(feedback: TrainingFeedback): FeedbackScreen {
  const rows = disagreementRows(feedback.disagreements);
  if (feedback.verdict === "passed") {
    return { kind: "passed", mistakeCount: feedback.mistake_count, rows, nextAction: "start_work" };
  }
  if (feedback.verdict === "failed") {
    return { kind: "failed", mistakeCount: feedback.mistake_count, rows, nextAction: "terminal" };
  }
  if (feedback.mistake_count === 0) {
    return {
      kind: "clean_round",
      round: feedback.round,
      message: "No mistakes in this round.",
      nextAction: "next_round",
    };
  }
  return {
    kind: "mistakes",
    round: feedback.round,
    mistakeCount: feedback.mistake_count,
    rows,
    nextAction: "next_round",
  };
}

/** After a failed screening the work routes are hidden client-side too
 * (the server enforces this regardless). */
export function workAvailable(screen: FeedbackScreen): boolean {
  return screen.kind === "passed";
}
