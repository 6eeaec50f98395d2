"""Report bundle: one directory of CSVs, vector plots, and a manifest.

Re-running with the same campaign, seed, and configuration produces
byte-identical files; matplotlib's hashed ids and timestamps are pinned.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "report-bundle"

import matplotlib.pyplot as plt  # noqa: E402

from ..campaign import Campaign
from .pipelines import (
    ALPHA_LEVELS,
    AgreementReport,
    AnalysisError,
    CostReport,
    ImportanceReport,
    SensitivityTable,
    agreement_analysis,
    cost_analysis,
    importance_analysis,
    power_report,
    sensitivity_analysis,
    stepwise_analysis,
    stepwise_methods,
    training_pass_rates,
)

DEFAULT_D_GRID = (0.2, 0.4, 0.6, 0.8)
DEFAULT_F2_GRID = (0.02, 0.0196, 0.15, 0.35)
DEFAULT_N_GRID = (50, 100, 200, 400)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _atomic_write_text(path, buffer.getvalue())


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _save_plot(fig, path: Path) -> None:
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(buffer.getvalue())
    os.replace(tmp, path)


def _digest_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _agreement_files(report: AgreementReport, out: Path) -> None:
    rows = []
    for label, e in sorted(report.entries.items()):
        rows.append([
            label, e.alpha,
            e.interval.low if e.interval else None,
            e.interval.high if e.interval else None,
            e.n_units, e.n_double, e.reason or "",
        ])
    _write_csv(out / "agreement.csv",
               ["label", "alpha", "ci_low", "ci_high", "n_units", "n_double", "reason"],
               rows)

    present = [(l, e) for l, e in sorted(report.entries.items()) if e.alpha is not None]
    fig, ax = plt.subplots(figsize=(10, max(2, 0.3 * len(present) + 1)))
    if present:
        labels = [l for l, _ in present]
        alphas = [e.alpha for _, e in present]
        y = range(len(present))
        ax.barh(list(y), alphas, color="#4878d0")
        for i, (_, e) in enumerate(present):
            if e.interval:
                ax.plot([e.interval.low, e.interval.high], [i, i], color="black", lw=1)
        ax.set_yticks(list(y))
        ax.set_yticklabels(labels, fontsize=7)
        ax.invert_yaxis()
    ax.set_xlabel("Krippendorff's alpha")
    ax.set_title("Inter-annotator agreement (BCa 95% CI)")
    fig.tight_layout()
    _save_plot(fig, out / "agreement.svg")


def _importance_files(report: ImportanceReport, out: Path) -> None:
    rows = [[e.predictor, e.target, e.kind, e.fitness, e.coefficient, e.n, e.note or ""]
            for e in report.entries]
    _write_csv(out / "importance.csv",
               ["predictor", "target", "kind", "fitness", "coefficient", "n", "note"], rows)

    fig, axes = plt.subplots(1, 2, figsize=(12, 5))
    for ax, target, metric in ((axes[0], "Qua_d", "r2"), (axes[1], "Qua_c", "McFadden")):
        entries = [e for e in report.entries if e.target == target]
        entries.sort(key=lambda e: (-e.fitness, e.predictor))
        ax.bar(range(len(entries)), [e.fitness for e in entries], color="#4878d0")
        ax.set_xticks(range(len(entries)))
        ax.set_xticklabels([e.predictor for e in entries], rotation=90, fontsize=6)
        ax.set_ylabel(metric)
        ax.set_title(f"Quality variance explained ({target})")
    fig.tight_layout()
    _save_plot(fig, out / "importance.svg")


def _sensitivity_files(table: SensitivityTable, out: Path) -> None:
    counts = table.counts()
    rows = []
    for label in sorted(counts):
        for alpha in ALPHA_LEVELS:
            rows.append([label, alpha, counts[label][alpha],
                         len([c for c in table.cells if c.label == label])])
    _write_csv(out / "sensitivity.csv",
               ["label", "alpha", "significant_pairs", "total_pairs"], rows)

    labels = sorted(counts)
    fig, ax = plt.subplots(figsize=(11, 4))
    width = 0.28
    for i, alpha in enumerate(ALPHA_LEVELS):
        xs = [x + (i - 1) * width for x in range(len(labels))]
        ax.bar(xs, [counts[l][alpha] for l in labels], width=width, label=f"alpha={alpha}")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_ylabel("significant bot pairs")
    ax.set_title(f"Sensitivity at {table.downsample} dialogues/bot")
    ax.legend()
    fig.tight_layout()
    _save_plot(fig, out / "sensitivity.svg")


def _stepwise_files(traces: dict, target: str, out: Path) -> None:
    rows = []
    for method in sorted(traces):
        trace = traces[method]
        for step in trace.steps:
            rows.append([
                method, target, len(step.predictors),
                step.removed or "", ";".join(sorted(step.predictors)),
                step.fitness, step.adjusted_fitness, int(step.all_positive),
            ])
    _write_csv(out / f"stepwise_{target}.csv",
               ["method", "target", "n_predictors", "removed", "predictors",
                "fitness", "adjusted_fitness", "all_positive"], rows)

    fig, ax = plt.subplots(figsize=(8, 5))
    for method in sorted(traces):
        trace = traces[method]
        sizes = [len(s.predictors) for s in trace.steps]
        ax.plot(sizes, [s.adjusted_fitness for s in trace.steps], marker="o", label=method)
    ax.set_xlabel("predictors remaining")
    ax.set_ylabel("adjusted fitness")
    ax.invert_xaxis()
    ax.set_title(f"Backwards elimination toward {target}")
    ax.legend()
    fig.tight_layout()
    _save_plot(fig, out / f"stepwise_{target}.svg")


def _cost_files(report: CostReport, out: Path) -> None:
    rows = [[r.task, r.median_minutes, r.throughput_per_hour, r.estimated_cost,
             r.actual_paid, r.n_records] for r in report.rows]
    _write_csv(out / "cost.csv",
               ["task", "median_minutes", "throughput_per_hour", "estimated_cost",
                "actual_paid", "n_records"], rows)

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.bar(range(len(report.rows)), [r.estimated_cost for r in report.rows], color="#d65f5f")
    ax.set_xticks(range(len(report.rows)))
    ax.set_xticklabels([r.task for r in report.rows], rotation=45, ha="right", fontsize=7)
    ax.set_ylabel(f"estimated cost (USD, {report.n_dialogues} dialogues)")
    ax.set_title(f"Projected annotation cost at ${report.wage_per_hour}/hr")
    fig.tight_layout()
    _save_plot(fig, out / "cost.svg")


def _power_files(rows: list[dict], out: Path) -> None:
    _write_csv(out / "power.csv", ["test", "effect", "n", "alpha", "power"],
               [[r["test"], r["effect"], r["n"], r["alpha"], r["power"]] for r in rows])
    fig, ax = plt.subplots(figsize=(7, 5))
    t_rows = [r for r in rows if r["test"] == "t"]
    for effect in sorted({r["effect"] for r in t_rows}):
        series = sorted((r["n"], r["power"]) for r in t_rows if r["effect"] == effect)
        ax.plot([n for n, _ in series], [p for _, p in series], marker="o", label=f"d={effect}")
    ax.set_xlabel("n per group")
    ax.set_ylabel("power")
    ax.set_title("Two-sample t-test power")
    ax.legend()
    fig.tight_layout()
    _save_plot(fig, out / "power.svg")


def _pass_rate_files(rates: dict[str, float], out: Path) -> None:
    _write_csv(out / "pass_rates.csv", ["task", "pass_rate"],
               [[task, rate] for task, rate in sorted(rates.items())])
    fig, ax = plt.subplots(figsize=(8, 4))
    tasks = sorted(rates)
    ax.bar(range(len(tasks)), [rates[t] for t in tasks], color="#6acc64")
    ax.set_xticks(range(len(tasks)))
    ax.set_xticklabels(tasks, rotation=45, ha="right", fontsize=8)
    ax.set_ylim(0, 1)
    ax.set_ylabel("pass rate")
    ax.set_title("Annotator screening pass rate per task")
    fig.tight_layout()
    _save_plot(fig, out / "pass_rates.svg")


def write_report_bundle(
    campaign: Campaign,
    out_dir: Path,
    seed: int = 0,
    reports: Optional[list[str]] = None,
    k: int = 10_000,
    downsample: int = 32,
    beam_width: int = 100,
    n_dialogues: int = 400,
    wage_per_hour: float = 20.0,
) -> dict:
    """Run the requested analyses and write the bundle; returns the manifest.

    `reports` defaults to all of {agreement, importance, sensitivity,
    stepwise, cost, power, pass_rates}; pipelines whose preconditions the
    campaign cannot meet are skipped and listed in the manifest.
    """
    wanted = list(reports) if reports else [
        "agreement", "importance", "sensitivity", "stepwise", "cost", "power", "pass_rates"]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    written: list[str] = []
    skipped: dict[str, str] = {}

    def run(name, fn):
        if name not in wanted:
            return
        try:
            fn()
        except (AnalysisError, ValueError) as exc:
            skipped[name] = str(exc)

    def do_agreement():
        _agreement_files(agreement_analysis(campaign, k=k, seed=seed), out)
        written.extend(["agreement.csv", "agreement.svg"])

    def do_importance():
        _importance_files(importance_analysis(campaign), out)
        written.extend(["importance.csv", "importance.svg"])

    def do_sensitivity():
        _sensitivity_files(sensitivity_analysis(campaign, downsample=downsample, seed=seed), out)
        written.extend(["sensitivity.csv", "sensitivity.svg"])

    def do_stepwise():
        for target in ("Qua_d", "Qua_c"):
            traces = {}
            for method in stepwise_methods(campaign, target):
                try:
                    traces[method] = stepwise_analysis(campaign, target, method,
                                                       beam_width=beam_width)
                except AnalysisError:
                    continue
            if traces:
                _stepwise_files(traces, target, out)
                written.extend([f"stepwise_{target}.csv", f"stepwise_{target}.svg"])
            else:
                skipped[f"stepwise_{target}"] = "no method had enough usable observations"

    def do_cost():
        report = cost_analysis(campaign, n_dialogues=n_dialogues, wage_per_hour=wage_per_hour)
        if not report.rows:
            raise AnalysisError("no timed annotation records")
        _cost_files(report, out)
        written.extend(["cost.csv", "cost.svg"])

    def do_power():
        _power_files(power_report(DEFAULT_D_GRID, DEFAULT_F2_GRID, DEFAULT_N_GRID), out)
        written.extend(["power.csv", "power.svg"])

    def do_pass_rates():
        rates = training_pass_rates(campaign)
        if not rates:
            raise AnalysisError("no completed screenings")
        _pass_rate_files(rates, out)
        written.extend(["pass_rates.csv", "pass_rates.svg"])

    run("agreement", do_agreement)
    run("importance", do_importance)
    run("sensitivity", do_sensitivity)
    run("stepwise", do_stepwise)
    run("cost", do_cost)
    run("power", do_power)
    run("pass_rates", do_pass_rates)

    events_path = campaign.store_dir / "events.jsonl"
    manifest = {
        "seed": seed,
        "config": {
            "k": k, "downsample": downsample, "beam_width": beam_width,
            "n_dialogues": n_dialogues, "wage_per_hour": wage_per_hour,
            "reports": wanted,
        },
        "inputs": {
            "events": _digest_file(events_path) if events_path.exists() else None,
            "n_records": len(campaign.records),
            "n_conversations": len(campaign.corpus.conversations),
        },
        "outputs": {name: _digest_file(out / name) for name in sorted(written)},
        "skipped": skipped,
    }
    _atomic_write_text(out / "manifest.json",
                       json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
