"""Annotation campaign: assignment, training/screening, and record keeping.

All state lives in memory and is rebuilt by replaying the event log, so
any on-disk state reachable after a crash corresponds to a prefix of the
mutation sequence. Mutations serialize through one lock; reads see a
consistent snapshot because records are immutable once appended.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..corpus import (
    Conversation,
    Corpus,
    EvaluationSchema,
    TaskDef,
    corpus_from_dict,
    export_corpus,
    schema_from_dict,
    schema_to_dict,
)
from ..metrics import InvalidResponseError, derive_behavior_labels
from .store import EventLog, atomic_write_json

DEFAULT_CAP = 60
DEFAULT_TTL_SECONDS = 24 * 3600


class CampaignError(ValueError):
    pass


class TrainingRequiredError(CampaignError):
    pass


class ScreeningFailedError(CampaignError):
    pass


class CapReachedError(CampaignError):
    pass


class NothingEligibleError(CampaignError):
    pass


@dataclass
class CampaignConfig:
    seed: int = 0
    per_task_cap: int = DEFAULT_CAP
    assignment_ttl_seconds: int = DEFAULT_TTL_SECONDS
    double_conversations: list[str] = field(default_factory=list)
    double_pairs: list[str] = field(default_factory=list)
    # Methods whose tasks require passed screening before work is assigned.
    # The study trained ABC-Eval annotators only; campaigns may opt others in.
    trained_methods: list[str] = field(default_factory=lambda: ["abc_eval"])
    wage_per_hour: float = 20.0
    n_dialogues_for_estimates: int = 400

    def to_dict(self) -> dict:
        return dict(vars(self))

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignConfig":
        return cls(**doc)


@dataclass
class TrainingState:
    task_key: str
    completed_rounds: int = 0
    mistakes: list[int] = field(default_factory=list)  # mistaken-turn count per round
    verdict: str = "in_progress"  # in_progress | passed | failed


@dataclass
class Annotator:
    id: str
    display_name: str
    token: str
    training: dict[str, TrainingState] = field(default_factory=dict)


@dataclass
class Assignment:
    id: str
    annotator_id: str
    task_key: str
    unit_id: str  # conversation id, or pair id for comparative tasks
    opened_at: float
    state: str = "open"  # open | submitted | expired


@dataclass
class AnnotationRecord:
    annotator_id: str
    task_key: str
    unit_id: str
    payload: dict
    submitted_at: float
    duration_seconds: float
    assignment_id: str

    def to_dict(self) -> dict:
        return {
            "annotator_id": self.annotator_id,
            "task_key": self.task_key,
            "conversation_id": self.unit_id,
            "payload": self.payload,
            "submitted_at": self.submitted_at,
            "duration_seconds": self.duration_seconds,
            "assignment_id": self.assignment_id,
        }


@dataclass
class GoldRound:
    round: int  # 1..3
    conversation: Conversation
    gold_labels: dict[int, frozenset[str]]  # bot turn index -> label set
    explanations: dict[int, str]


@dataclass
class TrainingFeedback:
    round: int
    mistake_count: int
    disagreements: list[dict]  # {turn, gold_labels, annotator_labels, explanation}
    verdict: str  # in_progress | passed | failed


class Campaign:
    """One annotation campaign over one corpus, persisted in a store directory."""

    def __init__(self, store_dir: Path, corpus: Corpus, config: CampaignConfig,
                 clock: Callable[[], float] = time.time, _create: bool = True):
        self.store_dir = Path(store_dir)
        self.corpus = corpus
        self.schema: EvaluationSchema = corpus.schema
        self.config = config
        self.clock = clock
        self._lock = threading.RLock()

        self.annotators: dict[str, Annotator] = {}
        self.tokens: dict[str, str] = {}  # token -> annotator id
        self.assignments: dict[str, Assignment] = {}
        self.records: list[AnnotationRecord] = []
        self.gold: dict[str, list[GoldRound]] = {}
        self._mutations = 0

        if _create:
            self.store_dir.mkdir(parents=True, exist_ok=True)
            atomic_write_json(self.store_dir / "corpus.json", export_corpus(corpus))
            atomic_write_json(self.store_dir / "schema.json", schema_to_dict(self.schema))
            atomic_write_json(self.store_dir / "config.json", config.to_dict())
        self.log = EventLog(self.store_dir / "events.jsonl")
        if not _create:
            for event in self.log.replay():
                self._apply(event)

    # -- construction ------------------------------------------------------

    @classmethod
    def create(cls, store_dir: Path, corpus: Corpus, config: Optional[CampaignConfig] = None,
               clock: Callable[[], float] = time.time) -> "Campaign":
        store_dir = Path(store_dir)
        if (store_dir / "events.jsonl").exists():
            raise CampaignError(f"store already exists at {store_dir}")
        return cls(store_dir, corpus, config or CampaignConfig(), clock=clock)

    @classmethod
    def open(cls, store_dir: Path, clock: Callable[[], float] = time.time) -> "Campaign":
        store_dir = Path(store_dir)
        with (store_dir / "corpus.json").open(encoding="utf-8") as fh:
            corpus_doc = json.load(fh)
        with (store_dir / "schema.json").open(encoding="utf-8") as fh:
            schema = schema_from_dict(json.load(fh))
        with (store_dir / "config.json").open(encoding="utf-8") as fh:
            config = CampaignConfig.from_dict(json.load(fh))
        corpus = corpus_from_dict(corpus_doc, schema=schema)
        return cls(store_dir, corpus, config, clock=clock, _create=False)

    def close(self) -> None:
        self.log.close()

    # -- event machinery ---------------------------------------------------

    def _emit(self, event: dict) -> None:
        self.log.append(event)
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["kind"]
        if kind == "annotator_registered":
            annotator = Annotator(id=event["id"], display_name=event["display_name"],
                                  token=event["token"])
            self.annotators[annotator.id] = annotator
            self.tokens[annotator.token] = annotator.id
        elif kind == "training_submitted":
            state = self._training_state(event["annotator_id"], event["task_key"])
            state.completed_rounds = event["round"]
            state.mistakes.append(event["mistake_count"])
            state.verdict = event["verdict"]
        elif kind == "assignment_opened":
            assignment = Assignment(
                id=event["id"], annotator_id=event["annotator_id"],
                task_key=event["task_key"], unit_id=event["unit_id"],
                opened_at=event["opened_at"])
            self.assignments[assignment.id] = assignment
        elif kind == "assignment_expired":
            self.assignments[event["id"]].state = "expired"
        elif kind == "annotation_submitted":
            assignment = self.assignments[event["assignment_id"]]
            assignment.state = "submitted"
            self.records.append(AnnotationRecord(
                annotator_id=assignment.annotator_id,
                task_key=assignment.task_key,
                unit_id=assignment.unit_id,
                payload=event["payload"],
                submitted_at=event["submitted_at"],
                duration_seconds=event["duration_seconds"],
                assignment_id=assignment.id,
            ))
        else:
            raise CampaignError(f"unknown event kind {kind!r} in log")
        self._mutations += 1

    # -- annotators & gold -------------------------------------------------

    def register_annotator(self, display_name: str, annotator_id: Optional[str] = None,
                           token: Optional[str] = None) -> Annotator:
        with self._lock:
            annotator_id = annotator_id or f"a{len(self.annotators) + 1:04d}"
            if annotator_id in self.annotators:
                raise CampaignError(f"annotator id {annotator_id!r} already registered")
            token = token or uuid.uuid4().hex
            self._emit({"kind": "annotator_registered", "id": annotator_id,
                        "display_name": display_name, "token": token})
            return self.annotators[annotator_id]

    def load_gold_bundle(self, doc: dict) -> None:
        """Install the 3-round gold-training bundle for one ABC-Eval task."""
        task_key = doc["task"]
        task = self._task(task_key)
        if task.method != "abc_eval":
            raise CampaignError(f"gold training applies only to ABC-Eval tasks, not {task_key!r}")
        rounds = []
        for i, raw in enumerate(doc["rounds"], start=1):
            conv_doc = raw["conversation"]
            conv = corpus_from_dict({"conversations": [conv_doc]}, schema=self.schema) \
                .conversations[conv_doc["id"]]
            gold = {int(k): frozenset(v) for k, v in raw["gold"].items()}
            for turn in conv.bot_turns():
                if turn.index not in gold:
                    raise CampaignError(
                        f"gold bundle {task_key!r} round {i}: no gold labels for turn {turn.index}")
                extra = gold[turn.index] - set(task.labels)
                if extra:
                    raise CampaignError(
                        f"gold bundle {task_key!r} round {i}: labels {sorted(extra)} "
                        f"outside the task's label set")
            explanations = {int(k): v for k, v in raw.get("explanations", {}).items()}
            rounds.append(GoldRound(round=i, conversation=conv, gold_labels=gold,
                                    explanations=explanations))
        if len(rounds) != 3:
            raise CampaignError(f"gold bundle {task_key!r} must contain exactly 3 rounds")
        self.gold[task_key] = rounds

    # -- training / screening ---------------------------------------------

    def _task(self, task_key: str) -> TaskDef:
        try:
            return self.schema.tasks[task_key]
        except KeyError:
            raise CampaignError(f"unknown task {task_key!r}") from None

    def _annotator(self, annotator_id: str) -> Annotator:
        try:
            return self.annotators[annotator_id]
        except KeyError:
            raise CampaignError(f"unknown annotator {annotator_id!r}") from None

    def _training_state(self, annotator_id: str, task_key: str) -> TrainingState:
        annotator = self._annotator(annotator_id)
        return annotator.training.setdefault(task_key, TrainingState(task_key=task_key))

    def next_training(self, annotator_id: str, task_key: str) -> GoldRound:
        task = self._task(task_key)
        if task.method != "abc_eval":
            raise CampaignError(f"task {task_key!r} has no training sessions")
        if task_key not in self.gold:
            raise CampaignError(f"no gold bundle loaded for task {task_key!r}")
        state = self._training_state(annotator_id, task_key)
        if state.verdict == "passed":
            raise CampaignError("training already passed")
        if state.verdict == "failed":
            raise ScreeningFailedError("screening failed")
        return self.gold[task_key][state.completed_rounds]

    def submit_training(self, annotator_id: str, task_key: str, round_number: int,
                        payload: dict) -> TrainingFeedback:
        with self._lock:
            task = self._task(task_key)
            state = self._training_state(annotator_id, task_key)
            if state.verdict != "in_progress":
                raise CampaignError(f"training is terminal: {state.verdict}")
            current = state.completed_rounds + 1
            if round_number != current:
                raise CampaignError(
                    f"wrong training round: expected {current}, got {round_number}")
            gold_round = self.gold[task_key][current - 1]
            self._validate_abc_payload(task, gold_round.conversation, payload)

            turns = payload["turns"]
            disagreements = []
            for turn in gold_round.conversation.bot_turns():
                answer = turns.get(str(turn.index), turns.get(turn.index))
                derived = derive_behavior_labels(task, answer)
                gold = gold_round.gold_labels[turn.index]
                if derived != gold:
                    disagreements.append({
                        "turn": turn.index,
                        "gold_labels": sorted(gold),
                        "annotator_labels": sorted(derived),
                        "explanation": gold_round.explanations.get(turn.index, ""),
                    })
            mistake_count = len(disagreements)
            verdict = "in_progress"
            if current == 3:
                threshold = task.screening_threshold or 3
                verdict = "passed" if mistake_count < threshold else "failed"
            self._emit({"kind": "training_submitted", "annotator_id": annotator_id,
                        "task_key": task_key, "round": current,
                        "mistake_count": mistake_count, "verdict": verdict})
            return TrainingFeedback(round=current, mistake_count=mistake_count,
                                    disagreements=disagreements, verdict=verdict)

    # -- assignment --------------------------------------------------------

    def _units_for_task(self, task: TaskDef) -> list[str]:
        if task.method == "comparative":
            return sorted(self.corpus.pairs())
        return sorted(self.corpus.conversations)

    def _double_units(self, task: TaskDef) -> set[str]:
        if task.method == "comparative":
            return set(self.config.double_pairs)
        return set(self.config.double_conversations)

    def _submitted(self, task_key: str) -> list[AnnotationRecord]:
        return [r for r in self.records if r.task_key == task_key]

    def expire_stale(self, now: Optional[float] = None) -> int:
        """Return open assignments older than the TTL to the pool."""
        now = self.clock() if now is None else now
        expired = 0
        with self._lock:
            for assignment in list(self.assignments.values()):
                if assignment.state == "open" and \
                        now - assignment.opened_at > self.config.assignment_ttl_seconds:
                    self._emit({"kind": "assignment_expired", "id": assignment.id})
                    expired += 1
        return expired

    def assign(self, annotator_id: str, task_key: str) -> Assignment:
        with self._lock:
            task = self._task(task_key)
            annotator = self._annotator(annotator_id)
            if task.method in self.config.trained_methods:
                state = annotator.training.get(task_key)
                if state is None or state.verdict != "passed":
                    raise TrainingRequiredError(
                        f"annotator {annotator_id!r} has not passed screening for {task_key!r}")

            submitted = self._submitted(task_key)
            own = [r for r in submitted if r.annotator_id == annotator_id]
            if len(own) >= self.config.per_task_cap:
                raise CapReachedError(
                    f"cap reached: {len(own)} submissions for task {task_key!r}")

            for assignment in self.assignments.values():
                if assignment.state == "open" and assignment.annotator_id == annotator_id \
                        and assignment.task_key == task_key:
                    raise CampaignError(
                        f"annotator {annotator_id!r} already holds an open "
                        f"assignment for {task_key!r}")

            coverage: dict[str, int] = {}
            for record in submitted:
                coverage[record.unit_id] = coverage.get(record.unit_id, 0) + 1
            for assignment in self.assignments.values():
                if assignment.state == "open" and assignment.task_key == task_key:
                    coverage[assignment.unit_id] = coverage.get(assignment.unit_id, 0) + 1
            done_by_me = {r.unit_id for r in own}
            double = self._double_units(task)
            eligible = [
                unit for unit in self._units_for_task(task)
                if unit not in done_by_me
                and coverage.get(unit, 0) < (2 if unit in double else 1)
            ]
            if not eligible:
                raise NothingEligibleError(f"nothing eligible for task {task_key!r}")

            digest = hashlib.sha256(
                f"{self.config.seed}:{task_key}:{annotator_id}:{self._mutations}".encode()
            ).digest()
            unit = eligible[int.from_bytes(digest[:8], "big") % len(eligible)]
            assignment_id = f"asg-{self._mutations:08d}-{annotator_id}"
            self._emit({"kind": "assignment_opened", "id": assignment_id,
                        "annotator_id": annotator_id, "task_key": task_key,
                        "unit_id": unit, "opened_at": self.clock()})
            return self.assignments[assignment_id]

    # -- submission --------------------------------------------------------

    def _validate_abc_payload(self, task: TaskDef, conversation: Conversation,
                              payload: dict) -> None:
        turns = payload.get("turns")
        if not isinstance(turns, dict):
            raise InvalidResponseError(f"{task.key}: payload must contain a 'turns' mapping")
        for turn in conversation.bot_turns():
            answer = turns.get(str(turn.index), turns.get(turn.index))
            if answer is None:
                raise InvalidResponseError(
                    f"{task.key}: missing response for bot turn {turn.index}")
            derive_behavior_labels(task, answer)  # raises on illegal answers

    def _validate_turn_likert_payload(self, task: TaskDef, conversation: Conversation,
                                      payload: dict) -> None:
        label = task.labels[0]
        turns = payload.get("turns")
        if not isinstance(turns, dict):
            raise InvalidResponseError(f"{task.key}: payload must contain a 'turns' mapping")
        for turn in conversation.bot_turns():
            value = turns.get(str(turn.index), turns.get(turn.index))
            if value is None:
                raise InvalidResponseError(
                    f"{task.key}: missing {label} rating for turn {turn.index}")
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise InvalidResponseError(
                    f"{task.key}: rating for {label} at turn {turn.index} "
                    f"must be an integer 1..5, got {value!r}")

    def _validate_dialogue_likert_payload(self, task: TaskDef, payload: dict) -> None:
        ratings = payload.get("ratings")
        if not isinstance(ratings, dict):
            raise InvalidResponseError(f"{task.key}: payload must contain a 'ratings' mapping")
        for label in task.labels:
            value = ratings.get(label)
            if value is None:
                raise InvalidResponseError(f"{task.key}: missing rating for {label}")
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise InvalidResponseError(
                    f"{task.key}: rating for {label} must be an integer 1..5, got {value!r}")

    def _validate_comparative_payload(self, task: TaskDef, payload: dict) -> None:
        choices = payload.get("choices")
        if not isinstance(choices, dict):
            raise InvalidResponseError(f"{task.key}: payload must contain a 'choices' mapping")
        for label in task.labels:
            choice = choices.get(label)
            if choice not in ("first", "second", "neither"):
                raise InvalidResponseError(
                    f"{task.key}: choice for {label} must be first/second/neither, "
                    f"got {choice!r}")

    def validate_payload(self, task: TaskDef, unit_id: str, payload: dict) -> None:
        if task.method == "abc_eval":
            self._validate_abc_payload(task, self.corpus.conversations[unit_id], payload)
        elif task.method == "turn_likert":
            self._validate_turn_likert_payload(task, self.corpus.conversations[unit_id], payload)
        elif task.method == "dialogue_likert":
            self._validate_dialogue_likert_payload(task, payload)
        elif task.method == "comparative":
            self._validate_comparative_payload(task, payload)
        else:  # pragma: no cover
            raise CampaignError(f"unknown method {task.method!r}")

    def submit_annotation(self, assignment_id: str, payload: dict) -> AnnotationRecord:
        with self._lock:
            assignment = self.assignments.get(assignment_id)
            if assignment is None:
                raise CampaignError(f"unknown assignment {assignment_id!r}")
            if assignment.state == "submitted":
                raise CampaignError("already submitted")
            if assignment.state == "expired":
                raise CampaignError("assignment expired")
            task = self._task(assignment.task_key)
            self.validate_payload(task, assignment.unit_id, payload)
            now = self.clock()
            self._emit({"kind": "annotation_submitted", "assignment_id": assignment_id,
                        "payload": payload, "submitted_at": now,
                        "duration_seconds": max(0.0, now - assignment.opened_at)})
            return self.records[-1]

    def record_for_assignment(self, assignment_id: str) -> Optional[AnnotationRecord]:
        for record in self.records:
            if record.assignment_id == assignment_id:
                return record
        return None

    # -- export ------------------------------------------------------------

    def export_annotations(self, task_key: Optional[str] = None,
                           method: Optional[str] = None) -> list[dict]:
        """Deterministic sorted export of matching records."""
        rows = []
        for record in self.records:
            if task_key is not None and record.task_key != task_key:
                continue
            if method is not None and self.schema.tasks[record.task_key].method != method:
                continue
            rows.append(record.to_dict())
        rows.sort(key=lambda r: (r["task_key"], r["conversation_id"], r["annotator_id"]))
        return rows
