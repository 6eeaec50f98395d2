"""Conversation corpus, evaluation schema, and ingestion/validation.

The built-in schema is the frozen default: 16 binary behavior labels split
over 8 turn-annotation tasks, 8 Likert dimensions at dialogue and turn
level, and 8 comparative dimensions, for 40 labels per fully annotated
conversation across 18 tasks. Campaigns may override it with a schema file
of the same shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


class CorpusError(ValueError):
    """Validation failure while importing a corpus; the message carries the
    location (conversation id / turn index) of the first violation."""


HUMAN = "human"
BOT = "bot"

DIMENSIONS = {
    "Con": "Consistency",
    "Emo": "Emotional Understanding",
    "Eng": "Engagingness",
    "Gra": "Grammaticality",
    "Inf": "Informativeness",
    "Pro": "Proactivity",
    "Qua": "Quality",
    "Rel": "Relevance",
}


@dataclass(frozen=True)
class Turn:
    index: int
    speaker: str  # human | bot
    text: str


@dataclass(frozen=True)
class Conversation:
    id: str
    bot_id: str
    interactor_id: str
    turns: tuple[Turn, ...]
    session_pair_id: Optional[str] = None

    def bot_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.speaker == BOT]


@dataclass(frozen=True)
class InteractorJudgment:
    """Post-conversation ratings from the interactor.

    Conversation-scoped records carry dialogue Likert ratings; pair-scoped
    records carry the per-dimension comparative choice.
    """

    conversation_id: Optional[str] = None
    pair_id: Optional[str] = None
    dialogue_likert: dict[str, int] = field(default_factory=dict)
    comparative_choice: dict[str, str] = field(default_factory=dict)  # first|second|neither


@dataclass(frozen=True)
class LabelDef:
    key: str
    kind: str  # behavior_binary | likert_turn | likert_dialogue | comparative
    polarity: str  # desirable | undesirable | neutral
    in_final_set: bool
    description: str


@dataclass(frozen=True)
class TaskDef:
    key: str
    method: str  # abc_eval | dialogue_likert | turn_likert | comparative
    labels: tuple[str, ...]
    widget: str
    unit: str  # per_bot_turn | per_dialogue | per_pair
    payment_usd: float
    # Screening threshold: pass iff round-3 mistaken turns < threshold.
    # Only meaningful for abc_eval tasks.
    screening_threshold: Optional[int] = None


@dataclass(frozen=True)
class EvaluationSchema:
    labels: dict[str, LabelDef]
    tasks: dict[str, TaskDef]

    def behavior_labels(self) -> list[LabelDef]:
        return [l for l in self.labels.values() if l.kind == "behavior_binary"]

    def abc_tasks(self) -> list[TaskDef]:
        return [t for t in self.tasks.values() if t.method == "abc_eval"]

    def task_for_label(self, label_key: str) -> TaskDef:
        for task in self.tasks.values():
            if label_key in task.labels:
                return task
        raise KeyError(label_key)

    def labels_per_conversation(self) -> int:
        return sum(len(t.labels) for t in self.tasks.values())


def builtin_schema() -> EvaluationSchema:
    """The fixed default schema with payments per task."""
    behavior = [
        # (key, description, polarity, final set, task, widget, payment, threshold)
        ("!Int_b", "It is difficult to understand the intended meaning of part or all of the response.",
         "undesirable", False, "uninterpretable", "checkbox", 0.63, 2),
        ("!Soc_b", "The response is insulting, hateful, or excessively vulgar.",
         "undesirable", False, "antisocial", "checkbox", 0.44, 2),
        ("Pre_b", "The response expresses the bot's preferences, wishes, or values.",
         "neutral", False, "personal_info", "personal_info", 0.70, 3),
        ("Lif_b", "The response shares information about the bot's life or experiences.",
         "neutral", False, "personal_info", "personal_info", 0.70, 3),
        ("Emp_b", "The response shows an understanding and reacts appropriately to someone's emotions.",
         "desirable", True, "empathy", "empathy_radio", 1.15, 3),
        ("!Emp_b", "The bot misunderstands or reacts inappropriately to someone's emotions.",
         "undesirable", True, "empathy", "empathy_radio", 1.15, 3),
        ("!Com_b", "The response misunderstands or contradicts common knowledge.",
         "undesirable", True, "commonsense", "checkbox", 0.92, 3),
        ("Fac_b", "The response accurately incorporates encyclopedic or expert knowledge.",
         "desirable", False, "knowledge", "knowledge_two_stage", 1.96, 3),
        ("!Fac_b", "The response hallucinates or inaccurately presents encyclopedic or expert knowledge.",
         "undesirable", True, "knowledge", "knowledge_two_stage", 1.96, 3),
        ("!Sel_b", "The bot contradicts something it said earlier in the dialogue.",
         "undesirable", True, "consistency", "consistency_dropdown", 0.87, 3),
        ("!Par_b", "The bot contradicts or misremembers something the user said earlier in the dialogue.",
         "undesirable", True, "consistency", "consistency_dropdown", 0.87, 3),
        ("Red_b", "The response inappropriately repeats information presented earlier in the dialogue.",
         "undesirable", True, "consistency", "consistency_dropdown", 0.87, 3),
        ("Ign_b", "The response ignores what the user just said.",
         "undesirable", True, "dialogue_flow", "flow_questions", 1.87, 3),
        ("!Rel_b", "The response interrupts the current topic of discussion by presenting unrelated information.",
         "undesirable", True, "dialogue_flow", "flow_questions", 1.87, 3),
        ("Fol_b", "The response explores, elaborates on, or asks about the ideas shared in the previous turn.",
         "neutral", False, "dialogue_flow", "flow_questions", 1.87, 3),
        ("Top_b", "The response introduces a new topic of conversation.",
         "neutral", False, "dialogue_flow", "flow_questions", 1.87, 3),
    ]

    labels: dict[str, LabelDef] = {}
    tasks: dict[str, TaskDef] = {}
    task_meta: dict[str, tuple[list[str], str, float, int]] = {}
    for key, desc, polarity, final, task, widget, payment, threshold in behavior:
        labels[key] = LabelDef(key=key, kind="behavior_binary", polarity=polarity,
                               in_final_set=final, description=desc)
        meta = task_meta.setdefault(task, ([], widget, payment, threshold))
        meta[0].append(key)
    for task, (label_keys, widget, payment, threshold) in task_meta.items():
        tasks[task] = TaskDef(key=task, method="abc_eval", labels=tuple(label_keys),
                              widget=widget, unit="per_bot_turn", payment_usd=payment,
                              screening_threshold=threshold)

    for tag, name in DIMENSIONS.items():
        labels[f"{tag}_d"] = LabelDef(key=f"{tag}_d", kind="likert_dialogue", polarity="desirable",
                                      in_final_set=False, description=f"{name}, dialogue-level 1-5 rating")
        labels[f"{tag}_t"] = LabelDef(key=f"{tag}_t", kind="likert_turn", polarity="desirable",
                                      in_final_set=False, description=f"{name}, turn-level 1-5 rating")
        labels[f"{tag}_c"] = LabelDef(key=f"{tag}_c", kind="comparative", polarity="desirable",
                                      in_final_set=False, description=f"{name}, side-by-side choice")

    tasks["dialogue_likert"] = TaskDef(
        key="dialogue_likert", method="dialogue_likert",
        labels=tuple(f"{tag}_d" for tag in DIMENSIONS), widget="likert_dialogue",
        unit="per_dialogue", payment_usd=0.60)
    for tag in DIMENSIONS:
        tasks[f"turn_likert_{tag.lower()}"] = TaskDef(
            key=f"turn_likert_{tag.lower()}", method="turn_likert",
            labels=(f"{tag}_t",), widget="likert_turn",
            unit="per_bot_turn", payment_usd=0.70)
    tasks["comparative"] = TaskDef(
        key="comparative", method="comparative",
        labels=tuple(f"{tag}_c" for tag in DIMENSIONS), widget="comparative",
        unit="per_pair", payment_usd=1.43)

    return EvaluationSchema(labels=labels, tasks=tasks)


@dataclass(frozen=True)
class Corpus:
    conversations: dict[str, Conversation]
    judgments: tuple[InteractorJudgment, ...]
    schema: EvaluationSchema

    def pairs(self) -> dict[str, tuple[Conversation, Conversation]]:
        """session_pair_id -> (first, second) in corpus-file order."""
        grouped: dict[str, list[Conversation]] = {}
        for conv in self.conversations.values():
            if conv.session_pair_id is not None:
                grouped.setdefault(conv.session_pair_id, []).append(conv)
        return {pid: (convs[0], convs[1]) for pid, convs in grouped.items()}

    def bots(self) -> list[str]:
        return sorted({c.bot_id for c in self.conversations.values()})


def _validate_conversation(raw: dict, seen_ids: set[str]) -> Conversation:
    cid = raw.get("id")
    if not cid or not isinstance(cid, str):
        raise CorpusError("conversation with missing or non-string id")
    if cid in seen_ids:
        raise CorpusError(f"duplicate conversation id {cid!r}")
    for req in ("bot_id", "interactor_id"):
        if not raw.get(req):
            raise CorpusError(f"conversation {cid!r}: missing {req}")
    raw_turns = raw.get("turns") or []
    if len(raw_turns) < 2:
        raise CorpusError(f"conversation {cid!r}: needs at least 2 turns")
    turns = []
    for i, t in enumerate(raw_turns):
        speaker = t.get("speaker")
        if speaker not in (HUMAN, BOT):
            raise CorpusError(f"conversation {cid!r} turn {i}: invalid speaker {speaker!r}")
        text = t.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise CorpusError(f"conversation {cid!r} turn {i}: empty text")
        if i > 0 and speaker == turns[-1].speaker:
            raise CorpusError(
                f"conversation {cid!r} turn {i}: speakers must alternate "
                f"(two {speaker!r} turns in a row)")
        turns.append(Turn(index=i, speaker=speaker, text=text))
    if not any(t.speaker == BOT for t in turns):
        raise CorpusError(f"conversation {cid!r}: contains no bot turn")
    return Conversation(
        id=cid, bot_id=raw["bot_id"], interactor_id=raw["interactor_id"],
        turns=tuple(turns), session_pair_id=raw.get("session_pair_id"))


def _validate_judgment(raw: dict, conversations: dict[str, Conversation],
                       pair_ids: set[str]) -> InteractorJudgment:
    cid = raw.get("conversation_id")
    pid = raw.get("pair_id")
    if (cid is None) == (pid is None):
        raise CorpusError("judgment must reference exactly one of conversation_id or pair_id")
    if cid is not None and cid not in conversations:
        raise CorpusError(f"judgment references unknown conversation {cid!r}")
    if pid is not None and pid not in pair_ids:
        raise CorpusError(f"judgment references unknown pair {pid!r}")
    likert = raw.get("dialogue_likert") or {}
    for dim, value in likert.items():
        if dim not in DIMENSIONS:
            raise CorpusError(f"judgment for {cid or pid!r}: unknown dimension {dim!r}")
        if not isinstance(value, int) or not 1 <= value <= 5:
            raise CorpusError(
                f"judgment for {cid or pid!r}: Likert value for {dim!r} out of range: {value!r}")
    choices = raw.get("comparative_choice") or {}
    if choices and pid is None:
        raise CorpusError(f"judgment for {cid!r}: comparative_choice requires a pair-scoped record")
    for dim, choice in choices.items():
        if dim not in DIMENSIONS:
            raise CorpusError(f"judgment for {pid!r}: unknown dimension {dim!r}")
        if choice not in ("first", "second", "neither"):
            raise CorpusError(f"judgment for {pid!r}: invalid choice {choice!r} for {dim!r}")
    return InteractorJudgment(conversation_id=cid, pair_id=pid,
                              dialogue_likert=dict(likert), comparative_choice=dict(choices))


def import_corpus(path, schema: Optional[EvaluationSchema] = None) -> Corpus:
    """Load and validate a corpus file; raises CorpusError on the first violation."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CorpusError(f"cannot read corpus file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorpusError(f"malformed corpus file {path}: {exc}") from exc
    return corpus_from_dict(doc, schema=schema)


def corpus_from_dict(doc: dict, schema: Optional[EvaluationSchema] = None) -> Corpus:
    if not isinstance(doc, dict) or "conversations" not in doc:
        raise CorpusError("corpus document must be an object with a 'conversations' list")
    conversations: dict[str, Conversation] = {}
    for raw in doc["conversations"]:
        conv = _validate_conversation(raw, set(conversations))
        conversations[conv.id] = conv

    by_pair: dict[str, list[Conversation]] = {}
    for conv in conversations.values():
        if conv.session_pair_id is not None:
            by_pair.setdefault(conv.session_pair_id, []).append(conv)
    for pid, members in by_pair.items():
        if len(members) != 2:
            raise CorpusError(f"session pair {pid!r} has {len(members)} conversations, expected 2")
        if members[0].bot_id == members[1].bot_id:
            raise CorpusError(f"session pair {pid!r} pairs two conversations of bot {members[0].bot_id!r}")

    judgments = tuple(
        _validate_judgment(raw, conversations, set(by_pair))
        for raw in doc.get("judgments", [])
    )
    return Corpus(conversations=conversations, judgments=judgments,
                  schema=schema or builtin_schema())


def export_corpus(corpus: Corpus) -> dict:
    """Inverse of import: a JSON-ready document (round-trips up to key order)."""
    conversations = []
    for conv in corpus.conversations.values():
        raw = {
            "id": conv.id,
            "bot_id": conv.bot_id,
            "interactor_id": conv.interactor_id,
            "turns": [{"speaker": t.speaker, "text": t.text} for t in conv.turns],
        }
        if conv.session_pair_id is not None:
            raw["session_pair_id"] = conv.session_pair_id
        conversations.append(raw)
    judgments = []
    for j in corpus.judgments:
        raw = {}
        if j.conversation_id is not None:
            raw["conversation_id"] = j.conversation_id
        if j.pair_id is not None:
            raw["pair_id"] = j.pair_id
        if j.dialogue_likert:
            raw["dialogue_likert"] = dict(j.dialogue_likert)
        if j.comparative_choice:
            raw["comparative_choice"] = dict(j.comparative_choice)
        judgments.append(raw)
    return {"conversations": conversations, "judgments": judgments}


@dataclass(frozen=True)
class CorpusSummary:
    n_conversations: int
    per_bot: dict[str, int]
    mean_turns: Optional[float]
    mean_user_turn_tokens: Optional[float]


def corpus_summary(corpus: Corpus) -> CorpusSummary:
    """Dialogue counts and mean lengths; token counts are whitespace splits."""
    convs = list(corpus.conversations.values())
    per_bot: dict[str, int] = {}
    for conv in convs:
        per_bot[conv.bot_id] = per_bot.get(conv.bot_id, 0) + 1
    if not convs:
        return CorpusSummary(0, {}, None, None)
    mean_turns = sum(len(c.turns) for c in convs) / len(convs)
    user_lengths = [
        len(t.text.split())
        for c in convs
        for t in c.turns
        if t.speaker == HUMAN
    ]
    mean_tokens = sum(user_lengths) / len(user_lengths) if user_lengths else None
    return CorpusSummary(
        n_conversations=len(convs), per_bot=per_bot,
        mean_turns=mean_turns, mean_user_turn_tokens=mean_tokens)


def schema_to_dict(schema: EvaluationSchema) -> dict:
    return {
        "labels": [vars(l) for l in schema.labels.values()],
        "tasks": [
            {**vars(t), "labels": list(t.labels)}
            for t in schema.tasks.values()
        ],
    }


def schema_from_dict(doc: dict) -> EvaluationSchema:
    labels = {raw["key"]: LabelDef(**raw) for raw in doc["labels"]}
    tasks = {
        raw["key"]: TaskDef(**{**raw, "labels": tuple(raw["labels"])})
        for raw in doc["tasks"]
    }
    return EvaluationSchema(labels=labels, tasks=tasks)
