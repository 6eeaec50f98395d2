/** Wire types for the abceval /v1 API, as published by the service. */

export type Speaker = "human" | "bot";

export interface Turn {
  index: number;
  speaker: Speaker;
  text: string;
}

export interface Conversation {
  id: string;
  bot_id: string;
  session_pair_id?: string | null;
  turns: Turn[];
}

export type TaskMethod = "abc_eval" | "dialogue_likert" | "turn_likert" | "comparative";

export type WidgetKind =
  | "checkbox"
  | "empathy_radio"
  | "personal_info"
  | "knowledge_two_stage"
  | "consistency_dropdown"
  | "flow_questions"
  | "likert_scale"
  | "comparative_choice";

export interface TaskDescriptor {
  key: string;
  method: TaskMethod;
  labels: string[];
  widget: string;
  unit: string;
  payment_usd: number;
  requires_training: boolean;
}

export interface ConversationUnit {
  conversation: Conversation;
}

export interface PairUnit {
  pair_id: string;
  first: Conversation;
  second: Conversation;
}

export type AssignmentUnit = ConversationUnit | PairUnit;

export interface Assignment {
  assignment_id: string;
  task: string;
  opened_at: string;
  expires_at: string;
  unit: AssignmentUnit;
}

export interface Session {
  annotator_id: string;
  token: string;
  issued_at: string;
  expires_at: string;
}

export interface TrainingRound {
  task: string;
  round: number;
  conversation: Conversation;
}

export interface Disagreement {
  turn: number;
  gold_labels: string[];
  annotator_labels: string[];
  explanation: string;
}

export type TrainingVerdict = "in_progress" | "passed" | "failed";

export interface TrainingFeedback {
  round: number;
  mistake_count: number;
  disagreements: Disagreement[];
  verdict: TrainingVerdict;
}

export function isPairUnit(unit: AssignmentUnit): unit is PairUnit {
  return "pair_id" in unit;
}

export function botTurns(conversation: Conversation): Turn[] {
  return conversation.turns.filter((t) => t.speaker === "bot");
}
