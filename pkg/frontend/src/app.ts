/** DOM rendering for the annotation client.
 *
 * Everything stateful lives in widgets.ts/training.ts; this module turns
 * those models into elements and wires events back into them. Layout is a
 * single column: transcript(s) on top, the form below, one submit button
 * that stays disabled until the form is complete.
 */

import { ApiClient, ApiError } from "./api.js";
import { DraftStore } from "./drafts.js";
import { seededOrder } from "./shuffle.js";
import { feedbackScreen, workAvailable, type FeedbackScreen } from "./training.js";
import type { Assignment, Conversation, TaskDescriptor, TrainingRound } from "./types.js";
import { isPairUnit } from "./types.js";
import {
  CONSISTENCY_OPTIONS,
  EMPATHY_OPTIONS,
  FLOW_ACK,
  FLOW_RELEVANCE,
  FLOW_TOPIC,
  KNOWLEDGE_FIRST,
  KNOWLEDGE_SECOND,
  LIKERT_SCALE,
  PAIR_CHOICES,
  answerKnowledgeFirst,
  buildPayload,
  canSubmit,
  emptyFormState,
  missingAnswers,
  secondStageOpen,
  transcripts,
  type FormState,
  type TurnAnswer,
} from "./widgets.js";

type Rerender = () => void;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function radioGroup<T extends string>(
  name: string,
  options: readonly T[],
  current: T | null,
  disabled: boolean,
  onPick: (value: T) => void,
): HTMLElement {
  const wrap = el("div", "radio-group");
  for (const option of options) {
    const label = el("label", "radio-option");
    const input = el("input");
    input.type = "radio";
    input.name = name;
    input.value = option;
    input.checked = current === option;
    input.disabled = disabled;
    input.addEventListener("change", () => onPick(option));
    label.append(input, document.createTextNode(" " + option.replaceAll("_", " ")));
    wrap.append(label);
  }
  return wrap;
}

function transcriptPane(conversation: Conversation, heading?: string): HTMLElement {
  const pane = el("section", "transcript");
  if (heading) pane.append(el("h3", "transcript-heading", heading));
  for (const turn of conversation.turns) {
    const row = el("div", `turn turn-${turn.speaker}`);
    row.dataset.turnIndex = String(turn.index);
    row.append(el("span", "speaker", turn.speaker === "bot" ? "Bot" : "User"));
    row.append(el("span", "text", turn.text));
    pane.append(row);
  }
  return pane;
}

function turnAnswerForm(
  turnIndex: number,
  answer: TurnAnswer,
  update: (next: TurnAnswer) => void,
): HTMLElement {
  const box = el("fieldset", "turn-answer");
  box.append(el("legend", undefined, `Bot turn ${turnIndex}`));
  const name = `t${turnIndex}`;
  switch (answer.widget) {
    case "checkbox": {
      const label = el("label");
      const input = el("input");
      input.type = "checkbox";
      input.checked = answer.checked;
      input.addEventListener("change", () => update({ ...answer, checked: input.checked }));
      label.append(input, document.createTextNode(" the behavior occurs in this turn"));
      box.append(label);
      break;
    }
    case "empathy_radio":
      box.append(
        radioGroup(`${name}-emp`, EMPATHY_OPTIONS, answer.choice, false, (choice) =>
          update({ ...answer, choice }),
        ),
      );
      break;
    case "personal_info":
      for (const field of ["preference", "life"] as const) {
        const label = el("label");
        const input = el("input");
        input.type = "checkbox";
        input.checked = answer[field];
        input.addEventListener("change", () => update({ ...answer, [field]: input.checked }));
        label.append(
          input,
          document.createTextNode(
            field === "preference" ? " shares a preference or opinion" : " shares life details",
          ),
        );
        box.append(label);
      }
      break;
    case "knowledge_two_stage": {
      const gate = el("div", "knowledge-gate");
      gate.append(el("span", undefined, "Does this turn present a fact? "));
      gate.append(
        radioGroup(
          `${name}-fact`,
          ["yes", "no"] as const,
          answer.factIndicated === null ? null : answer.factIndicated ? "yes" : "no",
          answer.firstStageLocked,
          (value) =>
            update({
              ...answer,
              factIndicated: value === "yes",
              first: null,
              second: null,
              firstStageLocked: false,
            }),
        ),
      );
      box.append(gate);
      if (answer.factIndicated) {
        box.append(el("p", "stage-label", "Your judgment of the statement:"));
        box.append(
          radioGroup(`${name}-first`, KNOWLEDGE_FIRST, answer.first, answer.firstStageLocked, (first) =>
            update(answerKnowledgeFirst(answer, first)),
          ),
        );
      }
      if (secondStageOpen(answer)) {
        box.append(el("p", "stage-label", "After searching, the statement is:"));
        box.append(
          radioGroup(`${name}-second`, KNOWLEDGE_SECOND, answer.second, false, (second) =>
            update({ ...answer, second }),
          ),
        );
      }
      break;
    }
    case "consistency_dropdown": {
      const select = el("select");
      select.multiple = true;
      for (const option of CONSISTENCY_OPTIONS) {
        const opt = el("option", undefined, option.replaceAll("_", " "));
        opt.value = option;
        opt.selected = answer.selected.includes(option);
        select.append(opt);
      }
      select.addEventListener("change", () =>
        update({
          ...answer,
          selected: [...select.selectedOptions].map(
            (o) => o.value as (typeof CONSISTENCY_OPTIONS)[number],
          ),
        }),
      );
      box.append(select);
      break;
    }
    case "flow_questions":
      box.append(el("p", "stage-label", "How does the turn handle the previous user turn?"));
      box.append(
        radioGroup(`${name}-ack`, FLOW_ACK, answer.acknowledgement, false, (acknowledgement) =>
          update({ ...answer, acknowledgement }),
        ),
      );
      box.append(el("p", "stage-label", "What does the turn talk about?"));
      box.append(
        radioGroup(`${name}-topic`, FLOW_TOPIC, answer.topic, false, (topic) =>
          update({ ...answer, topic }),
        ),
      );
      box.append(el("p", "stage-label", "Is the turn relevant to the dialogue?"));
      box.append(
        radioGroup(`${name}-rel`, FLOW_RELEVANCE, answer.relevance, false, (relevance) =>
          update({ ...answer, relevance }),
        ),
      );
      break;
  }
  return box;
}

function likertRow(
  name: string,
  current: number | null,
  onPick: (value: number) => void,
): HTMLElement {
  return radioGroup(
    name,
    LIKERT_SCALE.map(String) as unknown as readonly string[],
    current === null ? null : String(current),
    false,
    (value) => onPick(Number(value)),
  );
}

export function renderForm(
  container: HTMLElement,
  task: TaskDescriptor,
  assignment: Assignment,
  state: FormState,
  onChange: (next: FormState) => void,
  onSubmit: () => void,
): void {
  container.replaceChildren();
  const rerender: Rerender = () =>
    renderForm(container, task, assignment, state, onChange, onSubmit);
  const change = (next: FormState) => {
    state = next;
    onChange(next);
    rerender();
  };

  const header = el("header", "task-header");
  header.append(el("h2", undefined, task.key.replaceAll("_", " ")));
  header.append(el("p", "payment", `$${task.payment_usd.toFixed(2)} per unit`));
  container.append(header);

  if (isPairUnit(assignment.unit)) {
    const pair = el("div", "pair-transcripts");
    pair.append(transcriptPane(assignment.unit.first, "Conversation A"));
    pair.append(transcriptPane(assignment.unit.second, "Conversation B"));
    container.append(pair);
  } else {
    container.append(transcriptPane(assignment.unit.conversation));
  }

  const form = el("form", "answer-form");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (canSubmit(state)) onSubmit();
  });

  switch (state.kind) {
    case "abc": {
      const current = state;
      for (const [indexText, answer] of Object.entries(current.turns)) {
        const index = Number(indexText);
        form.append(
          turnAnswerForm(index, answer, (next) =>
            change({ ...current, turns: { ...current.turns, [index]: next } }),
          ),
        );
      }
      break;
    }
    case "turn_likert": {
      const current = state;
      for (const indexText of Object.keys(current.turns)) {
        const index = Number(indexText);
        const row = el("fieldset", "likert-row");
        row.append(el("legend", undefined, `Bot turn ${index} (1 = worst, 5 = best)`));
        row.append(
          likertRow(`lk-${index}`, current.turns[index] ?? null, (value) =>
            change({ ...current, turns: { ...current.turns, [index]: value } }),
          ),
        );
        form.append(row);
      }
      break;
    }
    case "dialogue_likert": {
      const current = state;
      for (const label of seededOrder(Object.keys(current.ratings), assignment.assignment_id)) {
        const row = el("fieldset", "likert-row");
        row.append(el("legend", undefined, `${label} (1 = worst, 5 = best)`));
        row.append(
          likertRow(`dl-${label}`, current.ratings[label] ?? null, (value) =>
            change({ ...current, ratings: { ...current.ratings, [label]: value } }),
          ),
        );
        form.append(row);
      }
      break;
    }
    case "comparative": {
      const current = state;
      for (const label of seededOrder(Object.keys(current.choices), assignment.assignment_id)) {
        const row = el("fieldset", "comparative-row");
        row.append(el("legend", undefined, label));
        row.append(
          radioGroup(`cmp-${label}`, PAIR_CHOICES, current.choices[label] ?? null, false, (choice) =>
            change({ ...current, choices: { ...current.choices, [label]: choice } }),
          ),
        );
        form.append(row);
      }
      break;
    }
  }

  const footer = el("div", "form-footer");
  const missing = missingAnswers(state);
  const submit = el("button", "submit");
  submit.type = "submit";
  submit.textContent = "Submit";
  submit.disabled = missing.length > 0;
  footer.append(submit);
  if (missing.length > 0) {
    footer.append(el("p", "missing", `Still needed: ${missing.join("; ")}`));
  }
  form.append(footer);
  container.append(form);
}

export function renderFeedback(container: HTMLElement, screen: FeedbackScreen): void {
  container.replaceChildren();
  const box = el("section", `feedback feedback-${screen.kind}`);
  switch (screen.kind) {
    case "clean_round":
      box.append(el("h2", undefined, `Round ${screen.round}: no mistakes`));
      box.append(el("p", undefined, screen.message));
      break;
    case "mistakes":
      box.append(
        el("h2", undefined, `Round ${screen.round}: ${screen.mistakeCount} mistaken turn(s)`),
      );
      break;
    case "passed":
      box.append(el("h2", undefined, "Training passed — you may start the task"));
      break;
    case "failed":
      box.append(el("h2", undefined, "Screening not passed"));
      box.append(
        el("p", undefined, "This task is no longer available to you. Thank you for trying."),
      );
      break;
  }
  if (screen.kind !== "clean_round" && screen.rows.length > 0) {
    const table = el("table", "disagreements");
    const head = el("tr");
    for (const title of ["Turn", "Reference labels", "Your labels", "Explanation"]) {
      head.append(el("th", undefined, title));
    }
    table.append(head);
    for (const row of screen.rows) {
      const tr = el("tr");
      tr.append(el("td", undefined, String(row.turn)));
      tr.append(el("td", undefined, row.goldLabels));
      tr.append(el("td", undefined, row.annotatorLabels));
      tr.append(el("td", undefined, row.explanation));
      table.append(tr);
    }
    box.append(table);
  }
  container.append(box);
}

export interface AppDeps {
  api: ApiClient;
  drafts: DraftStore;
  root: HTMLElement;
}

/** Top-level controller: task list -> training (if required) -> work loop. */
export class App {
  private submitting = false;

  constructor(private readonly deps: AppDeps) {}

  async start(): Promise<void> {
    const { api, root } = this.deps;
    const tasks = await api.tasks();
    root.replaceChildren();
    const list = el("nav", "task-list");
    list.append(el("h1", undefined, "Available tasks"));
    for (const task of tasks) {
      const button = el("button", "task-button");
      button.textContent = `${task.key.replaceAll("_", " ")} — $${task.payment_usd.toFixed(2)}`;
      button.addEventListener("click", () => void this.openTask(task));
      list.append(button);
    }
    root.append(list);
  }

  private async openTask(task: TaskDescriptor): Promise<void> {
    if (task.requires_training) {
      try {
        await this.runTraining(task);
      } catch (error) {
        if (error instanceof ApiError && error.status === 403) {
          this.showError(error.detail);
          return;
        }
        throw error;
      }
    }
    await this.workLoop(task);
  }

  private async runTraining(task: TaskDescriptor): Promise<void> {
    const { api, root } = this.deps;
    for (;;) {
      let round: TrainingRound;
      try {
        round = await api.nextTraining(task.key);
      } catch (error) {
        if (error instanceof ApiError && error.status === 400) return; // already trained
        throw error;
      }
      const assignment: Assignment = {
        assignment_id: `training:${task.key}:${round.round}`,
        task: task.key,
        opened_at: "",
        expires_at: "",
        unit: { conversation: round.conversation },
      };
      const state = emptyFormState(task, assignment.unit);
      const payload = await this.fillForm(task, assignment, state);
      const feedback = await api.submitTraining(task.key, round.round, payload);
      const screen = feedbackScreen(feedback);
      renderFeedback(root, screen);
      await this.acknowledge();
      if (screen.kind === "failed") throw new ApiError(403, "screening failed");
      if (workAvailable(screen)) return;
    }
  }

  private async workLoop(task: TaskDescriptor): Promise<void> {
    const { api, drafts } = this.deps;
    for (;;) {
      let assignment: Assignment;
      try {
        assignment = await api.nextAssignment(task.key);
      } catch (error) {
        if (error instanceof ApiError && error.status === 404) {
          this.showError("No more work available in this task.");
          return;
        }
        throw error;
      }
      const draft = drafts.load(assignment.assignment_id);
      const state = draft ?? emptyFormState(task, assignment.unit);
      const payload = await this.fillForm(task, assignment, state, (next) =>
        drafts.save(assignment.assignment_id, next),
      );
      if (this.submitting) continue;
      this.submitting = true;
      try {
        await api.submitAnnotation(assignment.assignment_id, payload, assignment.assignment_id);
        drafts.clear(assignment.assignment_id);
      } finally {
        this.submitting = false;
      }
    }
  }

  private fillForm(
    task: TaskDescriptor,
    assignment: Assignment,
    initial: FormState,
    onDraft?: (state: FormState) => void,
  ): Promise<Record<string, unknown>> {
    const { root } = this.deps;
    return new Promise((resolve) => {
      let current = initial;
      renderForm(
        root,
        task,
        assignment,
        current,
        (next) => {
          current = next;
          onDraft?.(next);
        },
        () => resolve(buildPayload(current)),
      );
    });
  }

  private acknowledge(): Promise<void> {
    const { root } = this.deps;
    return new Promise((resolve) => {
      const button = el("button", "continue");
      button.textContent = "Continue";
      button.addEventListener("click", () => resolve());
      root.append(button);
    });
  }

  private showError(message: string): void {
    const note = el("p", "notice", message);
    this.deps.root.append(note);
  }
}
