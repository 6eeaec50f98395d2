"""Views over a completed campaign: per-label observations keyed by unit.

Terminology:
  unit      - the natural observation unit of a label: (conversation, turn)
              for turn-scoped labels, conversation for dialogue Likert,
              session pair for comparative dimensions.
  dialogue value - the per-conversation scalar used by regressions and
              t-tests: proportion of flagged bot turns for behavior labels,
              mean turn rating for turn Likert, the raw rating for dialogue
              Likert.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from ..campaign import Campaign
from ..metrics import derive_behavior_labels


@dataclass
class LabelObservations:
    label: str
    kind: str  # behavior_binary | likert_turn | likert_dialogue | comparative
    unit_kind: str  # turn | dialogue | pair
    # unit id -> annotator id -> value (0/1 flag, Likert int, or pair choice)
    by_unit: dict = field(default_factory=lambda: defaultdict(dict))
    # conversation (or pair) id -> annotator id -> dialogue-level scalar
    dialogue_values: dict = field(default_factory=lambda: defaultdict(dict))
    # conversation id -> annotator id -> (flagged, total) turn counts
    turn_counts: dict = field(default_factory=lambda: defaultdict(dict))

    def mean_dialogue_value(self, unit_id: str) -> Optional[float]:
        values = self.dialogue_values.get(unit_id)
        if not values:
            return None
        return sum(values.values()) / len(values)


def extract_observations(campaign: Campaign) -> dict[str, LabelObservations]:
    """One pass over all annotation records, fanned out per label."""
    schema = campaign.schema
    out: dict[str, LabelObservations] = {}
    for label_def in schema.labels.values():
        unit_kind = {
            "behavior_binary": "turn",
            "likert_turn": "turn",
            "likert_dialogue": "dialogue",
            "comparative": "pair",
        }[label_def.kind]
        out[label_def.key] = LabelObservations(
            label=label_def.key, kind=label_def.kind, unit_kind=unit_kind)

    for record in campaign.records:
        task = schema.tasks[record.task_key]
        annotator = record.annotator_id
        if task.method == "abc_eval":
            conv = campaign.corpus.conversations[record.unit_id]
            turns = record.payload["turns"]
            derived = {}
            for turn in conv.bot_turns():
                answer = turns.get(str(turn.index), turns.get(turn.index))
                derived[turn.index] = derive_behavior_labels(task, answer)
            for label in task.labels:
                obs = out[label]
                flags = {idx: label in labels for idx, labels in derived.items()}
                for idx, flag in flags.items():
                    obs.by_unit[(record.unit_id, idx)][annotator] = int(flag)
                flagged = sum(flags.values())
                obs.turn_counts[record.unit_id][annotator] = (flagged, len(flags))
                obs.dialogue_values[record.unit_id][annotator] = flagged / len(flags)
        elif task.method == "turn_likert":
            label = task.labels[0]
            obs = out[label]
            conv = campaign.corpus.conversations[record.unit_id]
            turns = record.payload["turns"]
            ratings = []
            for turn in conv.bot_turns():
                value = turns.get(str(turn.index), turns.get(turn.index))
                obs.by_unit[(record.unit_id, turn.index)][annotator] = value
                ratings.append(value)
            obs.dialogue_values[record.unit_id][annotator] = sum(ratings) / len(ratings)
        elif task.method == "dialogue_likert":
            for label in task.labels:
                value = record.payload["ratings"][label]
                out[label].by_unit[record.unit_id][annotator] = value
                out[label].dialogue_values[record.unit_id][annotator] = value
        elif task.method == "comparative":
            for label in task.labels:
                choice = record.payload["choices"][label]
                out[label].by_unit[record.unit_id][annotator] = choice
                out[label].dialogue_values[record.unit_id][annotator] = choice
    return out


def interactor_quality_dialogue(campaign: Campaign) -> dict[str, float]:
    """conversation id -> interactor Qua_d rating."""
    values = {}
    for judgment in campaign.corpus.judgments:
        if judgment.conversation_id is not None and "Qua" in judgment.dialogue_likert:
            values[judgment.conversation_id] = float(judgment.dialogue_likert["Qua"])
    return values


def interactor_quality_comparative(campaign: Campaign) -> dict[str, str]:
    """pair id -> interactor quality choice (first/second/neither)."""
    choices = {}
    for judgment in campaign.corpus.judgments:
        if judgment.pair_id is not None and "Qua" in judgment.comparative_choice:
            choices[judgment.pair_id] = judgment.comparative_choice["Qua"]
    return choices


def interactor_dimension_dialogue(campaign: Campaign, tag: str) -> dict[str, float]:
    values = {}
    for judgment in campaign.corpus.judgments:
        if judgment.conversation_id is not None and tag in judgment.dialogue_likert:
            values[judgment.conversation_id] = float(judgment.dialogue_likert[tag])
    return values


def quality_labels() -> set[str]:
    return {"Qua_d", "Qua_t", "Qua_c"}


def all_label_keys(campaign: Campaign) -> list[str]:
    """All 40 label keys in a stable order: behavior, turn, dialogue, comparative."""
    schema = campaign.schema
    ordered = []
    for kind in ("behavior_binary", "likert_turn", "likert_dialogue", "comparative"):
        ordered.extend(sorted(l.key for l in schema.labels.values() if l.kind == kind))
    return ordered
