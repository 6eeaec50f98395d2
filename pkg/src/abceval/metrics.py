"""Turning raw annotation payloads into dialogue- and bot-level metrics.

Behavior tasks collect widget answers per bot turn; this module maps those
answers to binary behavior labels and aggregates them into proportions
(with Wilson intervals), Likert means (with Student's t intervals), and
comparative win/tie/loss rates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .corpus import Conversation, TaskDef
from .statkit import IntervalEstimate, student_t_interval, wilson_interval


class InvalidResponseError(ValueError):
    """A widget answer outside the legal answer space."""


CONSISTENCY_OPTIONS = {
    "self_contradiction": "!Sel_b",
    "partner_contradiction": "!Par_b",
    "redundant": "Red_b",
}

EMPATHY_OPTIONS = ("empathetic", "unempathetic", "not_applicable")
KNOWLEDGE_FIRST = ("accurate", "inaccurate", "misleading", "uncertain")
KNOWLEDGE_SECOND = ("accurate", "inaccurate", "controversial", "inconclusive")
FLOW_ACK = ("acknowledged", "ignored", "no_acknowledgement_needed")
FLOW_TOPIC = ("new_topic", "new_talking_point", "follow_up")
FLOW_RELEVANCE = ("relevant", "irrelevant")
PAIR_CHOICES = ("first", "second", "neither")


def derive_behavior_labels(task: TaskDef, answer: dict) -> frozenset[str]:
    """Map one turn's widget answer to the set of behavior labels it asserts.

    Deterministic and total over the legal answer space of the task's
    widget; raises InvalidResponseError for anything outside it.
    """
    widget = task.widget
    if widget == "checkbox":
        checked = answer.get("checked")
        if not isinstance(checked, bool):
            raise InvalidResponseError(f"{task.key}: checkbox answer must be a boolean 'checked'")
        return frozenset(task.labels) if checked else frozenset()

    if widget == "empathy_radio":
        choice = answer.get("choice")
        if choice not in EMPATHY_OPTIONS:
            raise InvalidResponseError(f"{task.key}: empathy choice must be one of {EMPATHY_OPTIONS}")
        return {
            "empathetic": frozenset({"Emp_b"}),
            "unempathetic": frozenset({"!Emp_b"}),
            "not_applicable": frozenset(),
        }[choice]

    if widget == "personal_info":
        labels = set()
        for field, label in (("preference", "Pre_b"), ("life", "Lif_b")):
            value = answer.get(field, False)
            if not isinstance(value, bool):
                raise InvalidResponseError(f"{task.key}: {field} must be a boolean")
            if value:
                labels.add(label)
        return frozenset(labels)

    if widget == "knowledge_two_stage":
        indicated = answer.get("fact_indicated")
        if not isinstance(indicated, bool):
            raise InvalidResponseError(f"{task.key}: 'fact_indicated' must be a boolean")
        if not indicated:
            return frozenset()
        first = answer.get("first")
        if first not in KNOWLEDGE_FIRST:
            raise InvalidResponseError(f"{task.key}: first-stage answer must be one of {KNOWLEDGE_FIRST}")
        if first == "accurate":
            return frozenset({"Fac_b"})
        if first in ("inaccurate", "misleading"):
            # "misleading statement" counts as inaccurately presented knowledge
            return frozenset({"!Fac_b"})
        second = answer.get("second")
        if second not in KNOWLEDGE_SECOND:
            raise InvalidResponseError(
                f"{task.key}: uncertain requires a post-search answer, one of {KNOWLEDGE_SECOND}")
        if second == "accurate":
            return frozenset({"Fac_b"})
        if second == "inaccurate":
            return frozenset({"!Fac_b"})
        return frozenset()  # controversial / inconclusive

    if widget == "consistency_dropdown":
        selected = answer.get("selected", [])
        if not isinstance(selected, (list, tuple)):
            raise InvalidResponseError(f"{task.key}: 'selected' must be a list")
        labels = set()
        for option in selected:
            if option not in CONSISTENCY_OPTIONS:
                raise InvalidResponseError(f"{task.key}: unknown consistency option {option!r}")
            labels.add(CONSISTENCY_OPTIONS[option])
        return frozenset(labels)

    if widget == "flow_questions":
        ack = answer.get("acknowledgement")
        topic = answer.get("topic")
        relevance = answer.get("relevance")
        if ack not in FLOW_ACK:
            raise InvalidResponseError(f"{task.key}: acknowledgement must be one of {FLOW_ACK}")
        if topic not in FLOW_TOPIC:
            raise InvalidResponseError(f"{task.key}: topic must be one of {FLOW_TOPIC}")
        if relevance not in FLOW_RELEVANCE:
            raise InvalidResponseError(f"{task.key}: relevance must be one of {FLOW_RELEVANCE}")
        labels = set()
        if ack == "ignored":
            labels.add("Ign_b")
        if topic == "new_topic":
            labels.add("Top_b")
        elif topic == "follow_up":
            labels.add("Fol_b")
        if relevance == "irrelevant":
            labels.add("!Rel_b")
        return frozenset(labels)

    raise InvalidResponseError(f"{task.key}: widget {widget!r} does not derive behavior labels")


@dataclass(frozen=True)
class MetricValue:
    label_key: str
    scope: str  # dialogue | bot | bot_pair
    value: float | tuple[float, float, float]  # proportion/mean or (win, tie, loss)
    n: int
    interval: Optional[IntervalEstimate] = None


def behavior_flags(task: TaskDef, conversation: Conversation, payload: dict,
                   label: str) -> list[bool]:
    """Per-bot-turn flag for `label` from an ABC-Eval payload {"turns": {idx: answer}}."""
    turns = payload.get("turns", {})
    flags = []
    for turn in conversation.bot_turns():
        answer = turns.get(str(turn.index), turns.get(turn.index))
        if answer is None:
            raise InvalidResponseError(
                f"{task.key}: conversation {conversation.id} missing response for turn {turn.index}")
        flags.append(label in derive_behavior_labels(task, answer))
    return flags


def dialogue_behavior_rate(task: TaskDef, conversation: Conversation, payload: dict,
                           label: str) -> MetricValue:
    """Flagged bot turns / total bot turns for one annotated conversation."""
    flags = behavior_flags(task, conversation, payload, label)
    if not flags:
        raise InvalidResponseError(f"conversation {conversation.id} has no bot turns")
    return MetricValue(label_key=label, scope="dialogue",
                       value=sum(flags) / len(flags), n=len(flags))


def bot_behavior_rate(per_dialogue_counts: Iterable[tuple[int, int]], label: str,
                      level: float = 0.95) -> MetricValue:
    """Pooled turn proportion over a bot's annotated dialogues.

    Pools (flagged, total) turn counts across dialogues; this is the
    turn-weighted rate, not the mean of per-dialogue rates.
    """
    k = n = 0
    for flagged, total in per_dialogue_counts:
        k += flagged
        n += total
    if n == 0:
        raise ValueError(f"no bot turns to aggregate for {label}")
    return MetricValue(label_key=label, scope="bot", value=k / n, n=n,
                       interval=wilson_interval(k, n, level))


def dialogue_likert_bot_mean(values: Sequence[float], label: str,
                             level: float = 0.95) -> MetricValue:
    """Bot-level mean of per-dialogue Likert ratings with a t interval."""
    if not values:
        raise ValueError(f"no observations for {label}")
    interval = student_t_interval(values, level) if len(values) >= 2 else None
    return MetricValue(label_key=label, scope="bot",
                       value=sum(values) / len(values), n=len(values), interval=interval)


def turn_likert_dialogue_mean(ratings: Sequence[float], label: str) -> MetricValue:
    """Dialogue-level value of a turn Likert label: mean over the dialogue's turns."""
    if not ratings:
        raise ValueError(f"no turn ratings for {label}")
    return MetricValue(label_key=label, scope="dialogue",
                       value=sum(ratings) / len(ratings), n=len(ratings))


def turn_likert_bot_mean(all_turn_ratings: Sequence[float], label: str,
                         level: float = 0.95) -> MetricValue:
    """Bot-level turn Likert: mean over all turns of all the bot's dialogues."""
    if not all_turn_ratings:
        raise ValueError(f"no turn ratings for {label}")
    interval = student_t_interval(all_turn_ratings, level) if len(all_turn_ratings) >= 2 else None
    return MetricValue(label_key=label, scope="bot",
                       value=sum(all_turn_ratings) / len(all_turn_ratings),
                       n=len(all_turn_ratings), interval=interval)


def comparative_rates(choices: Sequence[str], label: str,
                      level: float = 0.95) -> MetricValue:
    """Win/tie/loss proportions for the first bot of an oriented pair.

    `choices` are per-pair values in {"first", "second", "neither"} already
    oriented so that "first" is a win for the subject bot.
    """
    if not choices:
        raise ValueError(f"no annotated pairs for {label}")
    wins = ties = losses = 0
    for choice in choices:
        if choice not in PAIR_CHOICES:
            raise InvalidResponseError(f"invalid comparative choice {choice!r}")
        if choice == "first":
            wins += 1
        elif choice == "neither":
            ties += 1
        else:
            losses += 1
    n = len(choices)
    return MetricValue(label_key=label, scope="bot_pair",
                       value=(wins / n, ties / n, losses / n), n=n,
                       interval=wilson_interval(wins, n, level))
