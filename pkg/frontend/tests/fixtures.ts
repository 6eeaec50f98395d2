/** Shared builders for tests: task descriptors and assignment units that
 * match what GET /v1/tasks and GET /v1/assignments/next return. */

import type { Assignment, Conversation, TaskDescriptor } from "../src/types.js";

export function conversation(id: string, botId = "alpha", nBotTurns = 3): Conversation {
  const turns = [];
  for (let i = 0; i < nBotTurns; i++) {
    turns.push({ index: 2 * i, speaker: "human" as const, text: `user turn ${i}` });
    turns.push({ index: 2 * i + 1, speaker: "bot" as const, text: `bot turn ${i}` });
  }
  return { id, bot_id: botId, session_pair_id: null, turns };
}

export function task(
  key: string,
  method: TaskDescriptor["method"],
  widget: string,
  labels: string[],
  requiresTraining = method === "abc_eval",
): TaskDescriptor {
  return {
    key,
    method,
    labels,
    widget,
    unit: method === "comparative" ? "pair" : "conversation",
    payment_usd: 1.0,
    requires_training: requiresTraining,
  };
}

export const LIKERT_DIMS = ["Con", "Emo", "Eng", "Gra", "Inf", "Pro", "Qua", "Rel"];

export const TASKS: Record<string, TaskDescriptor> = {
  uninterpretable: task("uninterpretable", "abc_eval", "checkbox", ["!Int_b"]),
  antisocial: task("antisocial", "abc_eval", "checkbox", ["!Soc_b"]),
  commonsense: task("commonsense", "abc_eval", "checkbox", ["!Com_b"]),
  empathy: task("empathy", "abc_eval", "empathy_radio", ["Emp_b", "!Emp_b"]),
  personal_info: task("personal_info", "abc_eval", "personal_info", ["Pre_b", "Lif_b"]),
  knowledge: task("knowledge", "abc_eval", "knowledge_two_stage", ["Fac_b", "!Fac_b"]),
  consistency: task("consistency", "abc_eval", "consistency_dropdown", [
    "!Sel_b",
    "!Par_b",
    "Red_b",
  ]),
  dialogue_flow: task("dialogue_flow", "abc_eval", "flow_questions", [
    "Ign_b",
    "!Rel_b",
    "Fol_b",
    "Top_b",
  ]),
  dialogue_likert: task(
    "dialogue_likert",
    "dialogue_likert",
    "likert_dialogue",
    LIKERT_DIMS.map((d) => `${d}_d`),
  ),
  turn_likert_qua: task("turn_likert_qua", "turn_likert", "likert_turn", ["Qua_t"]),
  comparative: task(
    "comparative",
    "comparative",
    "comparative",
    LIKERT_DIMS.map((d) => `${d}_c`),
  ),
};

export function conversationAssignment(taskKey: string, id = "as-1"): Assignment {
  return {
    assignment_id: id,
    task: taskKey,
    opened_at: "2026-08-23T00:00:00Z",
    expires_at: "2026-08-24T00:00:00Z",
    unit: { conversation: conversation("alpha-000") },
  };
}

export function pairAssignment(id = "as-2"): Assignment {
  return {
    assignment_id: id,
    task: "comparative",
    opened_at: "2026-08-23T00:00:00Z",
    expires_at: "2026-08-24T00:00:00Z",
    unit: {
      pair_id: "p000",
      first: conversation("alpha-000", "alpha"),
      second: conversation("beta-000", "beta"),
    },
  };
}
