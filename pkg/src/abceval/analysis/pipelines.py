"""Batch validation analyses over a completed campaign.

Each pipeline is read-only over a campaign snapshot and deterministic for a
given seed; every report embeds the seed, filters, and sample sizes it used.
"""

from __future__ import annotations

import itertools
import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..campaign import Campaign
from ..corpus import TaskDef
from ..statkit import (
    DegenerateAgreementError,
    IntervalEstimate,
    ReliabilityData,
    SeparationError,
    StepwiseTrace,
    beam_backward_selection,
    bootstrap_bca,
    krippendorff_alpha,
    logistic_fit,
    ols_fit,
    power_f_test,
    power_t_test,
    sign_test,
    t_test,
    two_prop_z_test,
)
from .extract import (
    LabelObservations,
    all_label_keys,
    extract_observations,
    interactor_quality_comparative,
    interactor_quality_dialogue,
    quality_labels,
)

ALPHA_LEVELS = (0.01, 0.05, 0.1)


class AnalysisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Agreement


@dataclass(frozen=True)
class AgreementEntry:
    label: str
    alpha: Optional[float]
    interval: Optional[IntervalEstimate]
    n_units: int
    n_double: int
    reason: Optional[str] = None  # why alpha is absent


@dataclass(frozen=True)
class AgreementReport:
    entries: dict[str, AgreementEntry]
    k: int
    seed: int
    level: float


def _case_of_unit(obs: LabelObservations, unit):
    """The resampling case a unit belongs to: its conversation or pair id."""
    if obs.unit_kind == "turn":
        return unit[0]
    return unit


def _alpha_level(kind: str) -> str:
    return "interval" if kind in ("likert_turn", "likert_dialogue") else "nominal"


def agreement_analysis(campaign: Campaign, k: int = 10_000, seed: int = 0,
                       level: float = 0.95) -> AgreementReport:
    """Krippendorff's alpha with BCa intervals for every double-annotated label.

    Alpha is computed at the label's natural unit (turn, dialogue, or pair)
    over the double-annotated subset only; intervals come from case
    resampling of conversations (pairs for comparative labels).
    """
    observations = extract_observations(campaign)
    entries: dict[str, AgreementEntry] = {}
    for label in all_label_keys(campaign):
        obs = observations[label]
        double_units = {u: v for u, v in obs.by_unit.items() if len(v) >= 2}
        if not double_units:
            entries[label] = AgreementEntry(
                label=label, alpha=None, interval=None,
                n_units=len(obs.by_unit), n_double=0, reason="no overlap")
            continue

        measurement = _alpha_level(obs.kind)
        by_case: dict = {}
        for unit, values in double_units.items():
            by_case.setdefault(_case_of_unit(obs, unit), []).append(values)
        cases = sorted(by_case)

        def statistic(case_sample, _by_case=by_case, _level=measurement):
            data = ReliabilityData(units=[], coders=[], level=_level)
            for occurrence, case in enumerate(case_sample):
                for j, values in enumerate(_by_case[case]):
                    for coder, value in values.items():
                        data.add((occurrence, j), coder, value)
            return krippendorff_alpha(data)

        try:
            point = statistic(cases)
        except DegenerateAgreementError:
            entries[label] = AgreementEntry(
                label=label, alpha=None, interval=None,
                n_units=len(obs.by_unit), n_double=len(double_units),
                reason="degenerate: no expected disagreement")
            continue
        try:
            interval = bootstrap_bca(cases, statistic, k=k, level=level, seed=seed)
        except Exception:
            interval = None
        entries[label] = AgreementEntry(
            label=label, alpha=point, interval=interval,
            n_units=len(obs.by_unit), n_double=len(double_units))
    return AgreementReport(entries=entries, k=k, seed=seed, level=level)


# ---------------------------------------------------------------------------
# Importance (predictive validity)


@dataclass(frozen=True)
class ImportanceEntry:
    predictor: str
    target: str  # Qua_d | Qua_c
    kind: str  # linear | logistic
    fitness: float  # r2 or McFadden pseudo-r2
    coefficient: float
    n: int
    note: Optional[str] = None


@dataclass(frozen=True)
class ImportanceReport:
    entries: list[ImportanceEntry]
    n_pairs_total: int
    n_pairs_tied: int


def _pair_difference(campaign: Campaign, obs: LabelObservations,
                     pair_id: str) -> Optional[float]:
    """Second-minus-first dialogue value for a non-comparative predictor."""
    first, second = campaign.corpus.pairs()[pair_id]
    v1 = obs.mean_dialogue_value(first.id)
    v2 = obs.mean_dialogue_value(second.id)
    if v1 is None or v2 is None:
        return None
    return v2 - v1


def _comparative_encoding(obs: LabelObservations, pair_id: str) -> Optional[float]:
    """Mean of per-annotator choices encoded second=+1, first=-1, neither=0."""
    values = obs.dialogue_values.get(pair_id)
    if not values:
        return None
    encoded = [{"first": -1.0, "second": 1.0, "neither": 0.0}[c] for c in values.values()]
    return sum(encoded) / len(encoded)


def importance_analysis(campaign: Campaign,
                        predictors: Optional[Sequence[str]] = None) -> ImportanceReport:
    """Univariate regressions of each label onto the interactor's quality labels.

    Targets come from interactor judgments so no predictor shares an
    evaluator with its target. Dialogue-scoped predictors get a linear fit
    against Qua_d (reporting r2) and, as within-pair differences, a logistic
    fit against Qua_c (reporting McFadden); comparative predictors only the
    latter. Quality-tie pairs are excluded from the logistic fits.
    """
    observations = extract_observations(campaign)
    qua_d = interactor_quality_dialogue(campaign)
    qua_c = interactor_quality_comparative(campaign)
    labels = list(predictors) if predictors is not None else [
        l for l in all_label_keys(campaign) if l not in quality_labels()]

    n_total = len(qua_c)
    kept_pairs = sorted(p for p, choice in qua_c.items() if choice != "neither")
    n_tied = n_total - len(kept_pairs)
    y_pair = {p: (1.0 if qua_c[p] == "second" else 0.0) for p in kept_pairs}

    entries: list[ImportanceEntry] = []
    for label in labels:
        obs = observations[label]
        if obs.unit_kind != "pair" and qua_d:
            xs, ys = [], []
            for conv_id, target in sorted(qua_d.items()):
                value = obs.mean_dialogue_value(conv_id)
                if value is not None:
                    xs.append(value)
                    ys.append(target)
            if len(xs) < 3:
                raise AnalysisError(
                    f"{label}: {len(xs)} usable observations for the Qua_d model, need >= 3")
            fit = ols_fit(np.asarray(xs)[:, None], np.asarray(ys))
            entries.append(ImportanceEntry(
                predictor=label, target="Qua_d", kind="linear",
                fitness=fit.r2, coefficient=float(fit.coefficients[1]), n=len(xs)))
        if kept_pairs:
            xs, ys = [], []
            for pair_id in kept_pairs:
                if obs.unit_kind == "pair":
                    value = _comparative_encoding(obs, pair_id)
                else:
                    value = _pair_difference(campaign, obs, pair_id)
                if value is not None:
                    xs.append(value)
                    ys.append(y_pair[pair_id])
            if len(xs) < 3:
                raise AnalysisError(
                    f"{label}: {len(xs)} usable pairs for the Qua_c model, need >= 3")
            try:
                fit = logistic_fit(np.asarray(xs)[:, None], np.asarray(ys))
                entries.append(ImportanceEntry(
                    predictor=label, target="Qua_c", kind="logistic",
                    fitness=fit.mcfadden, coefficient=float(fit.coefficients[1]), n=len(xs)))
            except SeparationError:
                # The predictor orders the pairs perfectly; McFadden tends to 1.
                entries.append(ImportanceEntry(
                    predictor=label, target="Qua_c", kind="logistic",
                    fitness=1.0, coefficient=float("inf"), n=len(xs),
                    note="complete separation"))
    return ImportanceReport(entries=entries, n_pairs_total=n_total, n_pairs_tied=n_tied)


# ---------------------------------------------------------------------------
# Sensitivity


@dataclass(frozen=True)
class SensitivityCell:
    label: str
    bot_pair: tuple[str, str]
    p_value: Optional[float]
    n1: int
    n2: int
    undersampled: bool  # a bot had fewer dialogues than the downsample size
    reason: Optional[str] = None


@dataclass(frozen=True)
class SensitivityTable:
    cells: list[SensitivityCell]
    downsample: int
    seed: int
    bots: tuple[str, ...]

    def significant_pairs(self, label: str, alpha: float) -> set[tuple[str, str]]:
        return {c.bot_pair for c in self.cells
                if c.label == label and c.p_value is not None and c.p_value < alpha}

    def counts(self) -> dict[str, dict[float, int]]:
        """label -> alpha level -> number of significantly different bot pairs."""
        labels = {c.label for c in self.cells}
        return {label: {a: len(self.significant_pairs(label, a)) for a in ALPHA_LEVELS}
                for label in labels}


def sensitivity_analysis(campaign: Campaign, downsample: int = 32,
                         seed: int = 0) -> SensitivityTable:
    """Pairwise bot-difference tests for every label at a fixed downsample.

    One seeded draw of `downsample` conversations per bot (and pairs per bot
    pair) is shared by all labels. Behavior labels use a pooled
    two-proportion z-test over turn counts, Likert labels a Welch t-test
    over per-dialogue values, and comparative dimensions an exact sign test.
    """
    corpus = campaign.corpus
    bots = tuple(corpus.bots())
    if len(bots) < 2:
        raise AnalysisError("sensitivity analysis needs at least 2 bots")
    observations = extract_observations(campaign)
    rng = np.random.default_rng(seed)

    sampled: dict[str, list[str]] = {}
    undersampled: dict[str, bool] = {}
    for bot in bots:
        conv_ids = sorted(c.id for c in corpus.conversations.values() if c.bot_id == bot)
        if len(conv_ids) > downsample:
            idx = rng.choice(len(conv_ids), size=downsample, replace=False)
            sampled[bot] = [conv_ids[i] for i in sorted(idx)]
            undersampled[bot] = False
        else:
            sampled[bot] = conv_ids
            undersampled[bot] = True

    pair_lookup: dict[tuple[str, str], list[str]] = {}
    for pid, (first, second) in sorted(corpus.pairs().items()):
        key = tuple(sorted((first.bot_id, second.bot_id)))
        pair_lookup.setdefault(key, []).append(pid)
    sampled_pairs: dict[tuple[str, str], list[str]] = {}
    for key, pids in pair_lookup.items():
        if len(pids) > downsample:
            idx = rng.choice(len(pids), size=downsample, replace=False)
            sampled_pairs[key] = [pids[i] for i in sorted(idx)]
        else:
            sampled_pairs[key] = pids

    cells: list[SensitivityCell] = []
    for label in all_label_keys(campaign):
        obs = observations[label]
        for bot_a, bot_b in itertools.combinations(bots, 2):
            flagged_low = undersampled[bot_a] or undersampled[bot_b]
            if obs.kind == "behavior_binary":
                counts = []
                for bot in (bot_a, bot_b):
                    k = n = 0
                    for conv_id in sampled[bot]:
                        per_annotator = obs.turn_counts.get(conv_id)
                        if per_annotator:
                            for flagged, total in per_annotator.values():
                                k += flagged
                                n += total
                    counts.append((k, n))
                (k1, n1), (k2, n2) = counts
                if n1 == 0 or n2 == 0:
                    cells.append(SensitivityCell(label, (bot_a, bot_b), None, n1, n2,
                                                 flagged_low, reason="no annotated turns"))
                    continue
                result = two_prop_z_test(k1, n1, k2, n2)
                cells.append(SensitivityCell(label, (bot_a, bot_b), result.p_value,
                                             n1, n2, flagged_low))
            elif obs.kind in ("likert_dialogue", "likert_turn"):
                samples = []
                for bot in (bot_a, bot_b):
                    values = [obs.mean_dialogue_value(c) for c in sampled[bot]]
                    samples.append([v for v in values if v is not None])
                if len(samples[0]) < 2 or len(samples[1]) < 2:
                    cells.append(SensitivityCell(label, (bot_a, bot_b), None,
                                                 len(samples[0]), len(samples[1]),
                                                 flagged_low, reason="too few dialogues"))
                    continue
                result = t_test(samples[0], samples[1])
                cells.append(SensitivityCell(label, (bot_a, bot_b), result.p_value,
                                             len(samples[0]), len(samples[1]), flagged_low))
            else:  # comparative
                key = tuple(sorted((bot_a, bot_b)))
                pids = sampled_pairs.get(key, [])
                wins = losses = ties = 0
                for pid in pids:
                    first, _second = corpus.pairs()[pid]
                    for choice in obs.dialogue_values.get(pid, {}).values():
                        if choice == "neither":
                            ties += 1
                        elif (choice == "first") == (first.bot_id == bot_a):
                            wins += 1
                        else:
                            losses += 1
                if wins + losses == 0:
                    cells.append(SensitivityCell(label, (bot_a, bot_b), None,
                                                 wins + ties + losses, 0,
                                                 flagged_low, reason="no non-tied pairs"))
                    continue
                result = sign_test(wins, losses, ties)
                cells.append(SensitivityCell(label, (bot_a, bot_b), result.p_value,
                                             wins + losses, ties, flagged_low))
    return SensitivityTable(cells=cells, downsample=downsample, seed=seed, bots=bots)


# ---------------------------------------------------------------------------
# Stepwise (incremental validity / distinctness)


def _stepwise_design(campaign: Campaign, observations: dict[str, LabelObservations],
                     method: str, target: str):
    """Predictor columns and target vector for one method's stepwise search."""
    schema = campaign.schema
    labels = []
    for task in schema.tasks.values():
        if task.method != method:
            continue
        labels.extend(l for l in task.labels if l not in quality_labels())
    labels = sorted(set(labels))
    if len(labels) < 2:
        raise AnalysisError(f"method {method!r} has {len(labels)} non-quality predictors, need >= 2")

    if target == "Qua_d":
        if method == "comparative":
            raise AnalysisError("comparative labels have no dialogue-level value for Qua_d")
        qua_d = interactor_quality_dialogue(campaign)
        rows, y = [], []
        for conv_id, value in sorted(qua_d.items()):
            row = [observations[l].mean_dialogue_value(conv_id) for l in labels]
            if all(v is not None for v in row):
                rows.append(row)
                y.append(value)
        kind = "linear"
    else:  # Qua_c
        qua_c = interactor_quality_comparative(campaign)
        kept = sorted(p for p, choice in qua_c.items() if choice != "neither")
        rows, y = [], []
        for pair_id in kept:
            row = []
            for label in labels:
                obs = observations[label]
                if obs.unit_kind == "pair":
                    row.append(_comparative_encoding(obs, pair_id))
                else:
                    row.append(_pair_difference(campaign, obs, pair_id))
            if all(v is not None for v in row):
                rows.append(row)
                y.append(1.0 if qua_c[pair_id] == "second" else 0.0)
        kind = "logistic"
    if len(rows) < len(labels) + 2:
        raise AnalysisError(
            f"{method} -> {target}: {len(rows)} usable observations for {len(labels)} predictors")
    columns = {label: [row[i] for row in rows] for i, label in enumerate(labels)}
    return columns, y, kind


def stepwise_analysis(campaign: Campaign, target: str, method: str,
                      beam_width: int = 100) -> StepwiseTrace:
    """Backwards-elimination beam search of one method's labels onto a quality target."""
    if target not in ("Qua_d", "Qua_c"):
        raise AnalysisError(f"target must be Qua_d or Qua_c, got {target!r}")
    observations = extract_observations(campaign)
    columns, y, kind = _stepwise_design(campaign, observations, method, target)
    return beam_backward_selection(columns, y, kind=kind, beam_width=beam_width,
                                   target=f"{method}->{target}")


def stepwise_methods(campaign: Campaign, target: str) -> list[str]:
    """Evaluation methods applicable to a quality target, in stable order."""
    methods = sorted({t.method for t in campaign.schema.tasks.values()})
    if target == "Qua_d":
        return [m for m in methods if m != "comparative"]
    return methods


# ---------------------------------------------------------------------------
# Cost


@dataclass(frozen=True)
class CostRow:
    task: str
    median_minutes: float
    throughput_per_hour: float
    estimated_cost: float
    actual_paid: float
    n_records: int


@dataclass(frozen=True)
class CostReport:
    rows: list[CostRow]
    n_dialogues: int
    wage_per_hour: float


def cost_row(task: str, median_minutes: float, n_units: int,
             wage_per_hour: float, actual_paid: float = 0.0,
             n_records: int = 0) -> CostRow:
    """Throughput and projected cost from a median completion time."""
    if median_minutes <= 0:
        raise AnalysisError(f"{task}: median minutes must be positive")
    return CostRow(
        task=task,
        median_minutes=median_minutes,
        throughput_per_hour=60.0 / median_minutes,
        estimated_cost=median_minutes * n_units / 60.0 * wage_per_hour,
        actual_paid=actual_paid,
        n_records=n_records,
    )


def cost_analysis(campaign: Campaign, n_dialogues: int = 400,
                  wage_per_hour: float = 20.0) -> CostReport:
    """Per-task completion-time economics from recorded durations.

    Comparative tasks cover two conversations per unit, so their projection
    uses n_dialogues/2 units. Aggregate rows project the full behavior
    battery: the sum of all behavior-task medians, and of final-set tasks only.
    """
    schema = campaign.schema
    durations: dict[str, list[float]] = {}
    paid: dict[str, float] = {}
    for record in campaign.records:
        durations.setdefault(record.task_key, []).append(record.duration_seconds / 60.0)
        task = schema.tasks[record.task_key]
        paid[record.task_key] = paid.get(record.task_key, 0.0) + task.payment_usd

    rows: list[CostRow] = []
    for task_key in sorted(durations):
        task = schema.tasks[task_key]
        n_units = n_dialogues // 2 if task.method == "comparative" else n_dialogues
        rows.append(cost_row(task_key, statistics.median(durations[task_key]), n_units,
                             wage_per_hour, paid[task_key], len(durations[task_key])))

    abc_tasks = [t for t in schema.abc_tasks() if t.key in durations]
    if abc_tasks and len(abc_tasks) == len(schema.abc_tasks()):
        total = sum(statistics.median(durations[t.key]) for t in abc_tasks)
        rows.append(cost_row("behavior_all", total, n_dialogues, wage_per_hour,
                             sum(paid[t.key] for t in abc_tasks),
                             sum(len(durations[t.key]) for t in abc_tasks)))
        final = [t for t in abc_tasks
                 if any(schema.labels[l].in_final_set for l in t.labels)]
        if final:
            total = sum(statistics.median(durations[t.key]) for t in final)
            rows.append(cost_row("behavior_final_set", total, n_dialogues, wage_per_hour,
                                 sum(paid[t.key] for t in final),
                                 sum(len(durations[t.key]) for t in final)))
    return CostReport(rows=rows, n_dialogues=n_dialogues, wage_per_hour=wage_per_hour)


# ---------------------------------------------------------------------------
# Power planning


def power_report(d_grid: Sequence[float], f2_grid: Sequence[float],
                 n_grid: Sequence[int], alpha: float = 0.05) -> list[dict]:
    """Power of the t-test over d_grid x n_grid and of the F-test over f2_grid x n_grid."""
    if not n_grid or (not d_grid and not f2_grid):
        raise AnalysisError("power report needs a sample-size grid and at least one effect grid")
    rows = []
    for n in n_grid:
        for d in d_grid:
            rows.append({"test": "t", "effect": float(d), "n": int(n), "alpha": alpha,
                         "power": power_t_test(d, n, alpha)})
        for f2 in f2_grid:
            rows.append({"test": "F", "effect": float(f2), "n": int(n), "alpha": alpha,
                         "power": power_f_test(f2, n, 1, alpha)})
    return rows


# ---------------------------------------------------------------------------
# Training pass rates


def training_pass_rates(campaign: Campaign) -> dict[str, float]:
    """Per-task fraction of screened annotators who passed; tasks with no
    completed screenings are absent."""
    outcomes: dict[str, list[str]] = {}
    for annotator in campaign.annotators.values():
        for task_key, state in annotator.training.items():
            if state.verdict in ("passed", "failed"):
                outcomes.setdefault(task_key, []).append(state.verdict)
    return {
        task_key: verdicts.count("passed") / len(verdicts)
        for task_key, verdicts in sorted(outcomes.items())
    }
