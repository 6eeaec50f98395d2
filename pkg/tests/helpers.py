"""Shared builders for synthetic corpora and fully annotated campaigns."""

from __future__ import annotations

import random
from pathlib import Path

from abceval.campaign import Campaign, CampaignConfig
from abceval.corpus import Corpus, builtin_schema, corpus_from_dict


def make_conversation(conv_id: str, bot_id: str, n_bot_turns: int = 5,
                      interactor_id: str = "worker-1", pair_id=None) -> dict:
    turns = []
    for i in range(n_bot_turns):
        turns.append({"speaker": "human", "text": f"user turn {i} of {conv_id}"})
        turns.append({"speaker": "bot", "text": f"bot turn {i} of {conv_id}"})
    doc = {"id": conv_id, "bot_id": bot_id, "interactor_id": interactor_id, "turns": turns}
    if pair_id is not None:
        doc["session_pair_id"] = pair_id
    return doc


def make_corpus(bots=("alpha", "beta"), dialogues_per_bot: int = 12,
                n_bot_turns: int = 5, with_pairs: bool = True,
                rng: random.Random | None = None) -> Corpus:
    """A paired corpus: dialogue i of each bot shares session pair p{i}."""
    rng = rng or random.Random(0)
    conversations = []
    judgments = []
    n_pairs = dialogues_per_bot if with_pairs and len(bots) == 2 else 0
    for i in range(dialogues_per_bot):
        pair_id = f"p{i:03d}" if i < n_pairs else None
        for bot in bots:
            cid = f"{bot}-{i:03d}"
            conversations.append(make_conversation(
                cid, bot, n_bot_turns=n_bot_turns, pair_id=pair_id))
            judgments.append({
                "conversation_id": cid,
                "dialogue_likert": {tag: rng.randint(1, 5) for tag in
                                    ("Con", "Emo", "Eng", "Gra", "Inf", "Pro", "Qua", "Rel")},
            })
        if pair_id is not None:
            judgments.append({
                "pair_id": pair_id,
                "comparative_choice": {tag: rng.choice(["first", "second", "neither"])
                                       for tag in
                                       ("Con", "Emo", "Eng", "Gra", "Inf", "Pro", "Qua", "Rel")},
            })
    return corpus_from_dict({"conversations": conversations, "judgments": judgments})


def gold_bundle(task_key: str, schema=None, n_bot_turns: int = 4) -> dict:
    """A 3-round gold bundle whose gold is 'no behavior on any turn'."""
    schema = schema or builtin_schema()
    rounds = []
    for r in range(1, 4):
        conv = make_conversation(f"gold-{task_key}-{r}", "goldbot", n_bot_turns=n_bot_turns)
        n_turns = len(conv["turns"])
        gold = {str(i): [] for i in range(n_turns) if conv["turns"][i]["speaker"] == "bot"}
        rounds.append({
            "conversation": conv,
            "gold": gold,
            "explanations": {k: "no behavior occurs in this turn" for k in gold},
        })
    return {"task": task_key, "rounds": rounds}


def clean_answer(task) -> dict:
    """A widget answer asserting no behavior labels for `task`."""
    return {
        "checkbox": {"checked": False},
        "empathy_radio": {"choice": "not_applicable"},
        "personal_info": {"preference": False, "life": False},
        "knowledge_two_stage": {"fact_indicated": False},
        "consistency_dropdown": {"selected": []},
        # new_talking_point asserts neither the new-topic nor follow-up label
        "flow_questions": {"acknowledgement": "acknowledged", "topic": "new_talking_point",
                           "relevance": "relevant"},
    }[task.widget]


def flagged_answer(task, label: str) -> dict:
    """A widget answer asserting exactly the behavior `label` (plus implied flow labels)."""
    answers = {
        "!Int_b": {"checked": True},
        "!Soc_b": {"checked": True},
        "!Com_b": {"checked": True},
        "Pre_b": {"preference": True, "life": False},
        "Lif_b": {"preference": False, "life": True},
        "Emp_b": {"choice": "empathetic"},
        "!Emp_b": {"choice": "unempathetic"},
        "Fac_b": {"fact_indicated": True, "first": "accurate"},
        "!Fac_b": {"fact_indicated": True, "first": "inaccurate"},
        "!Sel_b": {"selected": ["self_contradiction"]},
        "!Par_b": {"selected": ["partner_contradiction"]},
        "Red_b": {"selected": ["redundant"]},
        "Ign_b": {"acknowledgement": "ignored", "topic": "follow_up", "relevance": "relevant"},
        "!Rel_b": {"acknowledgement": "acknowledged", "topic": "follow_up",
                   "relevance": "irrelevant"},
        "Fol_b": {"acknowledgement": "acknowledged", "topic": "follow_up",
                  "relevance": "relevant"},
        "Top_b": {"acknowledgement": "acknowledged", "topic": "new_topic",
                  "relevance": "relevant"},
    }
    return answers[label]


def pass_training(campaign: Campaign, annotator_id: str, task_key: str) -> None:
    task = campaign.schema.tasks[task_key]
    for round_number in (1, 2, 3):
        gold_round = campaign.next_training(annotator_id, task_key)
        payload = {"turns": {str(t.index): clean_answer(task)
                             for t in gold_round.conversation.bot_turns()}}
        campaign.submit_training(annotator_id, task_key, round_number, payload)


def abc_payload(campaign: Campaign, task, conv_id: str, flag_rate: float,
                rng: random.Random) -> dict:
    """Flag one of the task's labels on a coin-flip per bot turn."""
    conv = campaign.corpus.conversations[conv_id]
    turns = {}
    for t in conv.bot_turns():
        if rng.random() < flag_rate:
            turns[str(t.index)] = flagged_answer(task, rng.choice(task.labels))
        else:
            turns[str(t.index)] = clean_answer(task)
    return {"turns": turns}


def build_annotated_campaign(store_dir: Path, corpus: Corpus | None = None,
                             seed: int = 7, double_all: bool = True,
                             flag_rates: dict[str, float] | None = None,
                             likert_bias: dict[str, int] | None = None) -> Campaign:
    """A campaign with every task fully annotated (2x if double_all) by 2 annotators.

    flag_rates: bot_id -> per-turn behavior probability (default 0.3).
    likert_bias: bot_id -> additive Likert shift (default 0).
    """
    corpus = corpus or make_corpus()
    conv_ids = sorted(corpus.conversations)
    pair_ids = sorted(corpus.pairs())
    config = CampaignConfig(seed=seed, per_task_cap=600,
                            double_conversations=conv_ids if double_all else [],
                            double_pairs=pair_ids if double_all else [])
    campaign = Campaign.create(store_dir, corpus, config)
    rng = random.Random(seed)
    flag_rates = flag_rates or {}
    likert_bias = likert_bias or {}

    annotators = [campaign.register_annotator(f"annotator {i}") for i in (1, 2)]
    n_workers = 2 if double_all else 1
    for task_key in sorted(campaign.schema.tasks):
        task = campaign.schema.tasks[task_key]
        if task.method == "abc_eval":
            campaign.load_gold_bundle(gold_bundle(task_key, campaign.schema))
            for annotator in annotators[:n_workers]:
                pass_training(campaign, annotator.id, task_key)
        for annotator in annotators[:n_workers]:
            while True:
                try:
                    assignment = campaign.assign(annotator.id, task_key)
                except Exception:
                    break
                unit = assignment.unit_id
                if task.method == "abc_eval":
                    bot = corpus.conversations[unit].bot_id
                    payload = abc_payload(campaign, task, unit,
                                          flag_rates.get(bot, 0.3), rng)
                elif task.method == "turn_likert":
                    bot = corpus.conversations[unit].bot_id
                    bias = likert_bias.get(bot, 0)
                    conv = corpus.conversations[unit]
                    payload = {"turns": {
                        str(t.index): max(1, min(5, rng.randint(2, 4) + bias))
                        for t in conv.bot_turns()}}
                elif task.method == "dialogue_likert":
                    bot = corpus.conversations[unit].bot_id
                    bias = likert_bias.get(bot, 0)
                    payload = {"ratings": {
                        label: max(1, min(5, rng.randint(2, 4) + bias))
                        for label in task.labels}}
                else:  # comparative
                    payload = {"choices": {
                        label: rng.choice(["first", "second", "neither"])
                        for label in task.labels}}
                campaign.submit_annotation(assignment.id, payload)
    return campaign
