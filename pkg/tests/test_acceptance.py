"""Acceptance suite: one test per release criterion, with pinned tolerances.

Each test is a single pass/fail line under `pytest -v`. Runtime budgets are
asserted inside the tests themselves.
"""

import csv
import itertools
import math
import struct
import time
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from abceval.analysis import (
    agreement_analysis,
    cost_row,
    sensitivity_analysis,
)
from abceval.campaign import Campaign, CampaignConfig
from abceval.corpus import builtin_schema
from abceval.service import create_app
from abceval.statkit import (
    ReliabilityData,
    beam_backward_selection,
    bootstrap_bca,
    distributions,
    krippendorff_alpha,
    logistic_fit,
    ols_fit,
    power_f_test,
    power_t_test,
    sign_test,
    wilson_interval,
)
from helpers import clean_answer, flagged_answer, gold_bundle, make_corpus


class Budget:
    """Asserts on exit that the criterion ran inside its time budget."""

    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            elapsed = time.monotonic() - self.start
            assert elapsed < self.seconds, (
                f"runtime budget exceeded: {elapsed:.1f}s >= {self.seconds}s")


# -- criterion 1: analytic power values --------------------------------------

def test_criterion_power_replication():
    with Budget(1.0):
        assert 0.78 <= power_t_test(0.40, 100, 0.05) <= 0.82
        assert 0.78 <= power_f_test(0.0196, 400, 1, 0.05) <= 0.82


# -- criterion 2: cost table from median completion times --------------------

def test_criterion_cost_table_replication():
    rows = [  # (median minutes, units, expected throughput, expected cost)
        (2.81, 400, 21.37, 374.36),
        (4.35, 200, 13.81, 289.68),
        (19.94, 400, 3.01, 2658.40),
        (25.60, 400, 2.34, 3413.58),
        (15.17, 400, 3.95, 2022.98),
    ]
    with Budget(1.0):
        for median, n_units, throughput, cost in rows:
            row = cost_row("task", median, n_units, wage_per_hour=20.0)
            assert row.throughput_per_hour == pytest.approx(throughput, abs=0.1)
            assert row.estimated_cost == pytest.approx(cost, rel=0.005)


# -- criterion 3: annotation schema audit -------------------------------------

def test_criterion_schema_audit():
    schema = builtin_schema()
    assert len(schema.behavior_labels()) == 16
    assert len(schema.abc_tasks()) == 8
    assert len(schema.tasks) == 18
    assert schema.labels_per_conversation() == 40
    assert sum(1 for l in schema.labels.values() if l.in_final_set) == 9


# -- criterion 4: statistics kit against independent oracles ------------------

def _wilson_closed_form(k, n, z):
    p = k / n
    center = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = (z / (1 + z * z / n)) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    return center - half, center + half


def test_criterion_statkit_oracles():
    with Budget(30.0):
        # least squares vs explicit normal equations
        rng = np.random.default_rng(42)
        for _ in range(20):
            n, p = 40, int(rng.integers(1, 5))
            x = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            fit = ols_fit(x, y)
            design = np.hstack([np.ones((n, 1)), x])
            beta = np.linalg.solve(design.T @ design, design.T @ y)
            assert np.allclose(fit.coefficients, beta, atol=1e-8)

        # logistic MLE vs two-parameter grid search
        x = rng.normal(size=120)
        prob = 1.0 / (1.0 + np.exp(-(0.5 + 1.2 * x)))
        y = (rng.random(120) < prob).astype(float)
        fit = logistic_fit(x, y)
        grid = np.linspace(-4.0, 4.0, 161)
        best = -np.inf
        best_beta = None
        for b0 in grid:
            eta = b0 + np.outer(grid, x)
            ll = (y * eta - np.logaddexp(0.0, eta)).sum(axis=1)
            j = int(np.argmax(ll))
            if ll[j] > best:
                best, best_beta = ll[j], (b0, grid[j])
        assert fit.loglik >= best - 1e-3
        assert abs(fit.coefficients[0] - best_beta[0]) <= 0.05 + 1e-9
        assert abs(fit.coefficients[1] - best_beta[1]) <= 0.05 + 1e-9

        # agreement vs a hand-computed coincidence value:
        # 2 coders, 4 units (11, 22, 12, 21): Do = 4/8, De = 2*4*4/(8*7)
        data = ReliabilityData(
            units=["u0", "u1", "u2", "u3"], coders=["a", "b"],
            values={("u0", "a"): 1, ("u0", "b"): 1, ("u1", "a"): 2, ("u1", "b"): 2,
                    ("u2", "a"): 1, ("u2", "b"): 2, ("u3", "a"): 2, ("u3", "b"): 1})
        expected = 1.0 - (4 / 8) / ((2 * 4 * 4) / (8 * 7))
        assert krippendorff_alpha(data) == pytest.approx(expected, abs=1e-12)

        # sign test vs exact binomial tail sums
        for wins, losses in ((7, 3), (15, 5), (10, 10), (1, 19)):
            n = wins + losses
            tail = sum(math.comb(n, k) for k in range(max(wins, losses), n + 1))
            exact = min(1.0, 2.0 * tail / 2 ** n)
            assert sign_test(wins, losses).p_value == pytest.approx(exact, abs=1e-12)

        # Wilson score vs the closed form
        z = distributions.normal_ppf(0.975)
        for k, n in ((3, 10), (0, 25), (25, 25), (117, 400)):
            low, high = _wilson_closed_form(k, n, z)
            got = wilson_interval(k, n, level=0.95)
            assert got.low == pytest.approx(max(low, 0.0), abs=1e-12)
            assert got.high == pytest.approx(min(high, 1.0), abs=1e-12)

        # distribution spot checks against high-precision fixtures
        fixtures = Path(__file__).parent / "data" / "distribution_spot_checks.csv"
        with open(fixtures, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) >= 40
        for row in rows:
            params = {k: float(v) for k, v in
                      (part.split("=") for part in row["params"].split(";") if part)}
            x = float(row["x"])
            name = row["distribution"]
            if name == "normal":
                got = distributions.normal_cdf(x)
            elif name == "t":
                got = distributions.t_cdf(x, params["df"])
            elif name == "f":
                got = distributions.f_cdf(x, params["df1"], params["df2"])
            elif name == "nct":
                got = distributions.noncentral_t_cdf(x, params["df"], params["nc"])
            else:
                got = distributions.noncentral_f_cdf(
                    x, params["df1"], params["df2"], params["nc"])
            assert got == pytest.approx(float(row["expected"]), abs=1e-6)


# -- criterion 5: beam search equals exhaustive subset search ------------------

def test_criterion_stepwise_matches_exhaustive():
    with Budget(60.0):
        rng = np.random.default_rng(123)
        for instance in range(100):
            kind = "linear" if instance % 2 == 0 else "logistic"
            n = 80
            p = int(rng.integers(2, 6))
            columns = {f"x{i}": rng.normal(size=n) for i in range(p)}
            signal = sum(columns[f"x{i}"] * rng.normal() * 0.6 for i in range(p))
            if kind == "linear":
                y = signal + rng.normal(size=n)
            else:
                y = (rng.random(n) < 1.0 / (1.0 + np.exp(-signal))).astype(float)
                if y.sum() in (0, n):
                    continue

            try:
                trace = beam_backward_selection(columns, y, kind=kind, beam_width=100)
            except Exception:
                continue  # separation: no MLE exists for either searcher

            best = {}
            for size in range(p, 0, -1):
                for subset in itertools.combinations(sorted(columns), size):
                    x = np.column_stack([columns[name] for name in subset])
                    try:
                        if kind == "linear":
                            fit = ols_fit(x, y, check_rank=False)
                        else:
                            fit = logistic_fit(x, y)
                    except Exception:
                        continue
                    if size not in best or fit.adjusted_fitness > best[size]:
                        best[size] = fit.adjusted_fitness
            for step in trace.steps:
                size = len(step.predictors)
                assert step.adjusted_fitness == pytest.approx(best[size], abs=1e-9), \
                    f"instance {instance} ({kind}), size {size}"


# -- criterion 6: bootstrap determinism and coverage ---------------------------

def test_criterion_bootstrap_determinism_and_coverage():
    with Budget(120.0):
        rng = np.random.default_rng(99)
        data = rng.exponential(size=40)
        first = bootstrap_bca(data, lambda s: float(np.mean(s)), k=2000, seed=11)
        second = bootstrap_bca(data, lambda s: float(np.mean(s)), k=2000, seed=11)
        assert (struct.pack("<dd", first.low, first.high)
                == struct.pack("<dd", second.low, second.high))

        rng = np.random.default_rng(2024)
        hits = 0
        n_datasets = 500
        for i in range(n_datasets):
            sample = rng.normal(0.5, 1.0, size=100)
            ci = bootstrap_bca(sample, lambda s: float(np.mean(s)), k=1000, seed=i)
            hits += ci.low <= 0.5 <= ci.high
        coverage = hits / n_datasets
        assert 0.93 <= coverage <= 0.97, f"coverage {coverage}"


# -- criterion 7: end-to-end synthetic study over HTTP only --------------------

LOW_BOTS = ("bota", "botb")
HIGH_BOTS = ("botc", "botd")


def _planted_flags(task_key, bot, dialogue_index):
    """Deterministic noise-free planting: 0.05 vs 0.30 flagged turns for the
    contrast label; an identical 0.20 everywhere for the control label."""
    if task_key == "uninterpretable":
        return 1
    if bot in LOW_BOTS:  # 8 of 160 turns
        return 1 if dialogue_index < 8 else 0
    return 2 if dialogue_index < 16 else 1  # 48 of 160 turns


def _train_over_http(client, headers, task_key, task):
    for round_number in (1, 2, 3):
        gold = client.get(f"/v1/training/{task_key}/next", headers=headers).json()
        turns = {str(t["index"]): clean_answer(task)
                 for t in gold["conversation"]["turns"] if t["speaker"] == "bot"}
        response = client.post(f"/v1/training/{task_key}/submit", headers=headers,
                               json={"round": round_number, "payload": {"turns": turns}})
        assert response.status_code == 200, response.text
    assert response.json()["verdict"] == "passed"


def _annotate_over_http(client, headers, task_key, payload_fn):
    while True:
        response = client.get("/v1/assignments/next", params={"task": task_key},
                              headers=headers)
        if response.status_code == 404:
            return
        assert response.status_code == 200, response.text
        assignment = response.json()
        submitted = client.post("/v1/annotations", headers=headers, json={
            "assignment_id": assignment["assignment_id"],
            "payload": payload_fn(assignment["unit"])})
        assert submitted.status_code == 201, submitted.text


def _register(client, name):
    body = client.post("/v1/annotators", json={"display_name": name}).json()
    return {"Authorization": f"Bearer {body['token']}"}


def _sensitivity_campaign(tmp_path):
    corpus = make_corpus(bots=LOW_BOTS + HIGH_BOTS, dialogues_per_bot=32,
                         with_pairs=False)
    campaign = Campaign.create(tmp_path / "sens", corpus,
                               CampaignConfig(seed=1, per_task_cap=600))
    client = TestClient(create_app(campaign))
    headers = _register(client, "scripted")
    for task_key in ("commonsense", "uninterpretable"):
        task = campaign.schema.tasks[task_key]
        campaign.load_gold_bundle(gold_bundle(task_key))
        _train_over_http(client, headers, task_key, task)

        def payload(unit, key=task_key):
            conv = unit["conversation"]
            bot = conv["bot_id"]
            index = int(conv["id"].rsplit("-", 1)[1])
            bot_turns = [t["index"] for t in conv["turns"] if t["speaker"] == "bot"]
            flags = _planted_flags(key, bot, index)
            return {"turns": {str(t): {"checked": i < flags}
                              for i, t in enumerate(bot_turns)}}

        _annotate_over_http(client, headers, task_key, payload)
    return campaign


def _scripted_payload(task, unit):
    """Deterministic answer keyed only on the unit, so duplicated annotators
    agree exactly while every label still varies across units."""
    labels = list(task.labels)
    if task.method == "comparative":
        index = int(unit["pair_id"].lstrip("p"))
        options = ("first", "second", "neither")
        return {"choices": {label: options[(index + pos) % 3]
                            for pos, label in enumerate(labels)}}
    conv = unit["conversation"]
    index = int(conv["id"].rsplit("-", 1)[1])
    bot_turns = [t["index"] for t in conv["turns"] if t["speaker"] == "bot"]
    if task.method == "abc_eval":
        cycle = index % (len(labels) + 1)
        answer = (clean_answer(task) if cycle == len(labels)
                  else flagged_answer(task, labels[cycle]))
        return {"turns": {str(t): answer for t in bot_turns}}
    if task.method == "turn_likert":
        return {"turns": {str(t): 1 + (index + t) % 5 for t in bot_turns}}
    return {"ratings": {label: 1 + (index + pos) % 5
                        for pos, label in enumerate(labels)}}


def _duplicated_annotator_campaign(tmp_path):
    corpus = make_corpus(dialogues_per_bot=6)
    config = CampaignConfig(seed=2, per_task_cap=600,
                            double_conversations=sorted(corpus.conversations),
                            double_pairs=sorted(corpus.pairs()))
    campaign = Campaign.create(tmp_path / "dup", corpus, config)
    for task_key, task in campaign.schema.tasks.items():
        if task.method == "abc_eval":
            campaign.load_gold_bundle(gold_bundle(task_key))
    client = TestClient(create_app(campaign))
    for name in ("twin one", "twin two"):
        headers = _register(client, name)
        for task_key in sorted(campaign.schema.tasks):
            task = campaign.schema.tasks[task_key]
            if task.method == "abc_eval":
                _train_over_http(client, headers, task_key, task)
            _annotate_over_http(
                client, headers, task_key,
                lambda unit, task=task: _scripted_payload(task, unit))
    return campaign


def test_criterion_end_to_end_synthetic_study(tmp_path):
    with Budget(300.0):
        campaign = _sensitivity_campaign(tmp_path)
        contrast_pairs = {frozenset((low, high))
                          for low in LOW_BOTS for high in HIGH_BOTS}
        successes = 0
        for seed in range(20):
            table = sensitivity_analysis(campaign, downsample=32, seed=seed)
            flagged = {frozenset(p)
                       for p in table.significant_pairs("!Com_b", alpha=0.05)}
            control = table.significant_pairs("!Int_b", alpha=0.01)
            successes += flagged == contrast_pairs and not control
        assert successes >= 19, f"only {successes}/20 seeds recovered the design"

        duplicated = _duplicated_annotator_campaign(tmp_path)
        report = agreement_analysis(duplicated, k=1000, seed=0)
        entries = dict(report.entries)
        schema = builtin_schema()
        expected_labels = {l.key for l in schema.labels.values()}
        assert expected_labels <= set(entries)
        for label in expected_labels:
            entry = entries[label]
            assert entry.reason is None, f"{label}: {entry.reason}"
            assert entry.alpha == pytest.approx(1.0, abs=1e-12), label


# -- criterion 8: screening threshold matrix -----------------------------------

def test_criterion_screening_threshold_matrix(tmp_path):
    campaign = Campaign.create(tmp_path / "screen", make_corpus(dialogues_per_bot=2),
                               CampaignConfig(seed=3))
    schema = campaign.schema
    for task in schema.abc_tasks():
        campaign.load_gold_bundle(gold_bundle(task.key, n_bot_turns=6))
    strict = {"antisocial", "uninterpretable"}
    for task in schema.abc_tasks():
        threshold = 2 if task.key in strict else 3
        for mistakes in range(6):
            annotator = campaign.register_annotator(f"{task.key} m{mistakes}")
            wrong = flagged_answer(task, task.labels[0])
            for round_number in (1, 2, 3):
                gold_round = campaign.next_training(annotator.id, task.key)
                bot_turns = [t.index for t in gold_round.conversation.bot_turns()]
                n_wrong = mistakes if round_number == 3 else 0
                payload = {"turns": {
                    str(t): wrong if i < n_wrong else clean_answer(task)
                    for i, t in enumerate(bot_turns)}}
                feedback = campaign.submit_training(
                    annotator.id, task.key, round_number, payload)
            expected = "passed" if mistakes < threshold else "failed"
            assert feedback.verdict == expected, (task.key, mistakes)
            assert feedback.mistake_count == mistakes
