/** Widget state machines: required-answer gating and the knowledge
 * two-stage flow. */

import { describe, expect, it } from "vitest";

import {
  answerKnowledgeFirst,
  canSubmit,
  emptyFormState,
  emptyTurnAnswer,
  missingAnswers,
  secondStageOpen,
  transcripts,
  type AbcFormState,
  type TurnAnswer,
} from "../src/widgets.js";
import { TASKS, conversationAssignment, pairAssignment } from "./fixtures.js";

type Knowledge = Extract<TurnAnswer, { widget: "knowledge_two_stage" }>;

function knowledgeState(answer: Knowledge): AbcFormState {
  return { kind: "abc", widget: "knowledge_two_stage", turns: { 1: answer } };
}

describe("submit gating", () => {
  it("checkbox, personal info and consistency are submittable untouched", () => {
    for (const key of ["commonsense", "personal_info", "consistency"] as const) {
      const state = emptyFormState(TASKS[key]!, conversationAssignment(key).unit);
      expect(canSubmit(state)).toBe(true);
    }
  });

  it("empathy requires a choice on every bot turn", () => {
    const state = emptyFormState(TASKS.empathy!, conversationAssignment("empathy").unit);
    expect(canSubmit(state)).toBe(false);
    expect(missingAnswers(state)).toHaveLength(3); // one per bot turn
    if (state.kind !== "abc") throw new Error("wrong kind");
    for (const index of Object.keys(state.turns)) {
      state.turns[Number(index)] = { widget: "empathy_radio", choice: "not_applicable" };
    }
    expect(canSubmit(state)).toBe(true);
  });

  it("flow requires all three questions per turn", () => {
    const state = emptyFormState(
      TASKS.dialogue_flow!,
      conversationAssignment("dialogue_flow").unit,
    );
    if (state.kind !== "abc") throw new Error("wrong kind");
    const partial: TurnAnswer = {
      widget: "flow_questions",
      acknowledgement: "acknowledged",
      topic: null,
      relevance: "relevant",
    };
    state.turns[1] = partial;
    expect(missingAnswers(state)).toContain("turn 1: topic");
  });

  it("likert and comparative forms require every dimension", () => {
    const likert = emptyFormState(
      TASKS.dialogue_likert!,
      conversationAssignment("dialogue_likert").unit,
    );
    expect(canSubmit(likert)).toBe(false);
    const comparative = emptyFormState(TASKS.comparative!, pairAssignment().unit);
    expect(canSubmit(comparative)).toBe(false);
    if (comparative.kind !== "comparative") throw new Error("wrong kind");
    for (const label of Object.keys(comparative.choices)) comparative.choices[label] = "neither";
    expect(canSubmit(comparative)).toBe(true);
  });
});

describe("knowledge two-stage flow", () => {
  const base = emptyTurnAnswer("knowledge_two_stage") as Knowledge;

  it("no fact indicated needs nothing more", () => {
    expect(canSubmit(knowledgeState({ ...base, factIndicated: false }))).toBe(true);
  });

  it("fact indicated requires a first-stage judgment", () => {
    const state = knowledgeState({ ...base, factIndicated: true });
    expect(missingAnswers(state)).toEqual(["turn 1: first-stage judgment"]);
  });

  it("uncertain opens the post-search stage and locks the first stage", () => {
    const answered = answerKnowledgeFirst({ ...base, factIndicated: true }, "uncertain");
    expect(secondStageOpen(answered)).toBe(true);
    expect(answered.firstStageLocked).toBe(true);
    expect(() => answerKnowledgeFirst(answered, "accurate")).toThrow(/locked/);
    expect(missingAnswers(knowledgeState(answered))).toEqual(["turn 1: post-search judgment"]);
    expect(canSubmit(knowledgeState({ ...answered, second: "inconclusive" }))).toBe(true);
  });

  it("a direct judgment neither opens nor locks the second stage", () => {
    const answered = answerKnowledgeFirst({ ...base, factIndicated: true }, "misleading");
    expect(secondStageOpen(answered)).toBe(false);
    expect(answered.firstStageLocked).toBe(false);
    expect(canSubmit(knowledgeState(answered))).toBe(true);
  });
});

describe("units", () => {
  it("comparative shows both transcripts", () => {
    const shown = transcripts(pairAssignment().unit);
    expect(shown.map((c) => c.bot_id)).toEqual(["alpha", "beta"]);
  });

  it("single-conversation tasks reject pair units", () => {
    expect(() => emptyFormState(TASKS.empathy!, pairAssignment().unit)).toThrow(/single/);
  });
});
