/** Per-widget form state, validation, and payload building.
 *
 * These are pure functions: the DOM layer renders from the state and calls
 * back into them, and the tests exercise them directly. Required-ness rules:
 * empathy, knowledge, flow, and all Likert/comparative answers are required;
 * plain checkboxes, the personal-info pair, and the consistency multi-select
 * default to "no behavior" and are always submittable.
 */

import type { Conversation, TaskDescriptor } from "./types.js";
import { botTurns, isPairUnit, type AssignmentUnit } from "./types.js";

export const EMPATHY_OPTIONS = ["empathetic", "unempathetic", "not_applicable"] as const;
export const KNOWLEDGE_FIRST = ["accurate", "inaccurate", "misleading", "uncertain"] as const;
export const KNOWLEDGE_SECOND = ["accurate", "inaccurate", "controversial", "inconclusive"] as const;
export const CONSISTENCY_OPTIONS = [
  "self_contradiction",
  "partner_contradiction",
  "redundant",
] as const;
export const FLOW_ACK = ["acknowledged", "ignored", "no_acknowledgement_needed"] as const;
export const FLOW_TOPIC = ["new_topic", "new_talking_point", "follow_up"] as const;
export const FLOW_RELEVANCE = ["relevant", "irrelevant"] as const;
export const PAIR_CHOICES = ["first", "second", "neither"] as const;
export const LIKERT_SCALE = [1, 2, 3, 4, 5] as const;

export type EmpathyChoice = (typeof EMPATHY_OPTIONS)[number];
export type KnowledgeFirst = (typeof KNOWLEDGE_FIRST)[number];
export type KnowledgeSecond = (typeof KNOWLEDGE_SECOND)[number];
export type ConsistencyOption = (typeof CONSISTENCY_OPTIONS)[number];
export type FlowAck = (typeof FLOW_ACK)[number];
export type FlowTopic = (typeof FLOW_TOPIC)[number];
export type FlowRelevance = (typeof FLOW_RELEVANCE)[number];
export type PairChoice = (typeof PAIR_CHOICES)[number];

export type TurnAnswer =
  | { widget: "checkbox"; checked: boolean }
  | { widget: "empathy_radio"; choice: EmpathyChoice | null }
  | { widget: "personal_info"; preference: boolean; life: boolean }
  | {
      widget: "knowledge_two_stage";
      factIndicated: boolean | null;
      first: KnowledgeFirst | null;
      second: KnowledgeSecond | null;
      /** Set once the post-search stage opens; the first stage is then locked. */
      firstStageLocked: boolean;
    }
  | { widget: "consistency_dropdown"; selected: ConsistencyOption[] }
  | {
      widget: "flow_questions";
      acknowledgement: FlowAck | null;
      topic: FlowTopic | null;
      relevance: FlowRelevance | null;
    };

export interface AbcFormState {
  kind: "abc";
  widget: TurnAnswer["widget"];
  /** bot-turn index -> answer */
  turns: Record<number, TurnAnswer>;
}

export interface TurnLikertFormState {
  kind: "turn_likert";
  turns: Record<number, number | null>;
}

export interface DialogueLikertFormState {
  kind: "dialogue_likert";
  ratings: Record<string, number | null>;
}

export interface ComparativeFormState {
  kind: "comparative";
  choices: Record<string, PairChoice | null>;
}

export type FormState =
  | AbcFormState
  | TurnLikertFormState
  | DialogueLikertFormState
  | ComparativeFormState;

export function emptyTurnAnswer(widget: TurnAnswer["widget"]): TurnAnswer {
  switch (widget) {
    case "checkbox":
      return { widget, checked: false };
    case "empathy_radio":
      return { widget, choice: null };
    case "personal_info":
      return { widget, preference: false, life: false };
    case "knowledge_two_stage":
      return { widget, factIndicated: null, first: null, second: null, firstStageLocked: false };
    case "consistency_dropdown":
      return { widget, selected: [] };
    case "flow_questions":
      return { widget, acknowledgement: null, topic: null, relevance: null };
  }
}

export function emptyFormState(task: TaskDescriptor, unit: AssignmentUnit): FormState {
  if (task.method === "comparative") {
    return {
      kind: "comparative",
      choices: Object.fromEntries(task.labels.map((l) => [l, null])),
    };
  }
  if (isPairUnit(unit)) {
    throw new Error(`task ${task.key} expected a single conversation unit`);
  }
  const conversation = unit.conversation;
  if (task.method === "dialogue_likert") {
    return {
      kind: "dialogue_likert",
      ratings: Object.fromEntries(task.labels.map((l) => [l, null])),
    };
  }
  if (task.method === "turn_likert") {
    return {
      kind: "turn_likert",
      turns: Object.fromEntries(botTurns(conversation).map((t) => [t.index, null])),
    };
  }
  const widget = task.widget as TurnAnswer["widget"];
  return {
    kind: "abc",
    widget,
    turns: Object.fromEntries(
      botTurns(conversation).map((t) => [t.index, emptyTurnAnswer(widget)]),
    ),
  };
}

/** Answer the knowledge first stage; choosing "uncertain" opens and locks in
 * the two-stage flow (the first stage can no longer be changed). */
export function answerKnowledgeFirst(
  answer: Extract<TurnAnswer, { widget: "knowledge_two_stage" }>,
  first: KnowledgeFirst,
): Extract<TurnAnswer, { widget: "knowledge_two_stage" }> {
  if (answer.firstStageLocked) {
    throw new Error("first stage is locked once the post-search stage opens");
  }
  return {
    ...answer,
    factIndicated: true,
    first,
    second: null,
    firstStageLocked: first === "uncertain",
  };
}

export function secondStageOpen(
  answer: Extract<TurnAnswer, { widget: "knowledge_two_stage" }>,
): boolean {
  return answer.factIndicated === true && answer.first === "uncertain";
}

/** Which required answers are still missing; empty list means submittable. */
export function missingAnswers(state: FormState): string[] {
  const missing: string[] = [];
  switch (state.kind) {
    case "abc":
      for (const [index, answer] of Object.entries(state.turns)) {
        for (const field of missingTurnFields(answer)) {
          missing.push(`turn ${index}: ${field}`);
        }
      }
      return missing;
    case "turn_likert":
      for (const [index, rating] of Object.entries(state.turns)) {
        if (rating === null) missing.push(`turn ${index}: rating`);
      }
      return missing;
    case "dialogue_likert":
      for (const [label, rating] of Object.entries(state.ratings)) {
        if (rating === null) missing.push(`${label}: rating`);
      }
      return missing;
    case "comparative":
      for (const [label, choice] of Object.entries(state.choices)) {
        if (choice === null) missing.push(`${label}: choice`);
      }
      return missing;
  }
}

function missingTurnFields(answer: TurnAnswer): string[] {
  switch (answer.widget) {
    case "checkbox":
    case "personal_info":
    case "consistency_dropdown":
      return []; // optional: unchecked / empty means "no behavior"
    case "empathy_radio":
      return answer.choice === null ? ["empathy choice"] : [];
    case "knowledge_two_stage":
      if (answer.factIndicated === null) return ["fact indicated"];
      if (!answer.factIndicated) return [];
      if (answer.first === null) return ["first-stage judgment"];
      if (answer.first === "uncertain" && answer.second === null) {
        return ["post-search judgment"];
      }
      return [];
    case "flow_questions": {
      const fields: string[] = [];
      if (answer.acknowledgement === null) fields.push("acknowledgement");
      if (answer.topic === null) fields.push("topic");
      if (answer.relevance === null) fields.push("relevance");
      return fields;
    }
  }
}

export function canSubmit(state: FormState): boolean {
  return missingAnswers(state).length === 0;
}

/** Serialize a complete form into the exact payload the API accepts. */
export function buildPayload(state: FormState): Record<string, unknown> {
  if (!canSubmit(state)) {
    throw new Error(`form incomplete: ${missingAnswers(state).join("; ")}`);
  }
  switch (state.kind) {
    case "abc":
      return {
        turns: Object.fromEntries(
          Object.entries(state.turns).map(([index, answer]) => [
            index,
            turnAnswerPayload(answer),
          ]),
        ),
      };
    case "turn_likert":
      return { turns: { ...state.turns } };
    case "dialogue_likert":
      return { ratings: { ...state.ratings } };
    case "comparative":
      return { choices: { ...state.choices } };
  }
}

function turnAnswerPayload(answer: TurnAnswer): Record<string, unknown> {
  switch (answer.widget) {
    case "checkbox":
      return { checked: answer.checked };
    case "empathy_radio":
      return { choice: answer.choice };
    case "personal_info":
      return { preference: answer.preference, life: answer.life };
    case "knowledge_two_stage": {
      if (!answer.factIndicated) return { fact_indicated: false };
      const payload: Record<string, unknown> = {
        fact_indicated: true,
        first: answer.first,
      };
      if (answer.first === "uncertain") payload.second = answer.second;
      return payload;
    }
    case "consistency_dropdown":
      return { selected: [...answer.selected] };
    case "flow_questions":
      return {
        acknowledgement: answer.acknowledgement,
        topic: answer.topic,
        relevance: answer.relevance,
      };
  }
}

/** The conversation(s) the transcript pane must show for a unit. */
export function transcripts(unit: AssignmentUnit): Conversation[] {
  return isPairUnit(unit) ? [unit.first, unit.second] : [unit.conversation];
}
