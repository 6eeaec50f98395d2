"""Command-line administration: corpus import, campaigns, exports, analyses.

Exit codes: 0 success, 1 validation error (bad corpus, bad campaign state,
bad analysis preconditions), 2 internal error. The default store path comes
from the ABCEVAL_STORE environment variable.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from ..analysis import AnalysisError, cost_analysis, training_pass_rates, write_report_bundle
from ..campaign import Campaign, CampaignConfig, CampaignError
from ..corpus import (
    CorpusError,
    builtin_schema,
    corpus_summary,
    import_corpus,
    schema_from_dict,
    schema_to_dict,
)
from ..metrics import InvalidResponseError
from ..statkit import power_f_test, power_t_test

VALIDATION_ERRORS = (CorpusError, CampaignError, InvalidResponseError, AnalysisError,
                     ValueError, FileNotFoundError)

store_option = click.option(
    "--store", envvar="ABCEVAL_STORE", required=True, type=click.Path(),
    help="Campaign store directory (env: ABCEVAL_STORE).")


def guarded(fn):
    """Map domain validation failures to exit 1 and anything else to exit 2."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VALIDATION_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except click.ClickException:
            raise
        except Exception as exc:
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(2)
    return wrapper


def _load_schema(schema_path):
    if schema_path is None:
        return None
    with open(schema_path, encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))


@click.group()
def main():
    """Chatbot-evaluation platform: behavior labeling campaigns and analyses."""


@main.command("import")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the validated, normalized corpus here.")
@guarded
def import_cmd(corpus_path, schema_path, out_path):
    """Validate a corpus file and print its summary."""
    corpus = import_corpus(corpus_path, schema=_load_schema(schema_path))
    summary = corpus_summary(corpus)
    click.echo(f"conversations: {summary.n_conversations}")
    for bot, count in sorted(summary.per_bot.items()):
        click.echo(f"  {bot}: {count}")
    if summary.mean_turns is not None:
        click.echo(f"mean turns per dialogue: {summary.mean_turns:.2f}")
    if summary.mean_user_turn_tokens is not None:
        click.echo(f"mean tokens per user turn: {summary.mean_user_turn_tokens:.2f}")
    if out_path is not None:
        from ..campaign import atomic_write_json
        from ..corpus import export_corpus
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        atomic_write_json(Path(out_path), export_corpus(corpus))
        click.echo(f"wrote {out_path}")


@main.command("schema")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
@guarded
def schema_cmd(schema_path):
    """Print the evaluation schema (built-in by default) as JSON."""
    schema = _load_schema(schema_path) or builtin_schema()
    click.echo(json.dumps(schema_to_dict(schema), indent=2, sort_keys=True))


@main.group()
def campaign():
    """Create and inspect annotation campaigns."""


@campaign.command("create")
@store_option
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cap", type=int, default=60, show_default=True,
              help="Per-annotator submissions per task.")
@click.option("--ttl", type=int, default=86400, show_default=True,
              help="Assignment time-to-live in seconds.")
@click.option("--double-fraction", type=float, default=0.0, show_default=True,
              help="Leading fraction of units annotated twice for agreement.")
@click.option("--gold", "gold_paths", type=click.Path(exists=True), multiple=True,
              help="Gold-training bundle JSON; repeatable, one per behavior task.")
@guarded
def campaign_create(store, corpus_path, schema_path, seed, cap, ttl,
                    double_fraction, gold_paths):
    """Initialize a campaign store from a validated corpus."""
    if cap < 1:
        raise CampaignError("per-task cap must be at least 1")
    if not 0.0 <= double_fraction <= 1.0:
        raise CampaignError("double fraction must be in [0, 1]")
    corpus = import_corpus(corpus_path, schema=_load_schema(schema_path))
    conv_ids = sorted(corpus.conversations)
    pair_ids = sorted(corpus.pairs())
    config = CampaignConfig(
        seed=seed, per_task_cap=cap, assignment_ttl_seconds=ttl,
        double_conversations=conv_ids[: round(len(conv_ids) * double_fraction)],
        double_pairs=pair_ids[: round(len(pair_ids) * double_fraction)],
    )
    camp = Campaign.create(Path(store), corpus, config)
    for path in gold_paths:
        with open(path, encoding="utf-8") as fh:
            camp.load_gold_bundle(json.load(fh))
    click.echo(f"campaign created at {store}: "
               f"{len(conv_ids)} conversations, {len(pair_ids)} pairs, seed {seed}")


@campaign.command("status")
@store_option
@guarded
def campaign_status(store):
    """Annotator, coverage, and spend summary for a campaign."""
    camp = Campaign.open(Path(store))
    click.echo(f"conversations: {len(camp.corpus.conversations)}")
    click.echo(f"annotators: {len(camp.annotators)}")
    click.echo(f"records: {len(camp.records)}")
    per_task: dict[str, int] = {}
    for record in camp.records:
        per_task[record.task_key] = per_task.get(record.task_key, 0) + 1
    for task_key in sorted(camp.schema.tasks):
        click.echo(f"  {task_key}: {per_task.get(task_key, 0)} submissions")
    rates = training_pass_rates(camp)
    if rates:
        click.echo("screening pass rates:")
        for task_key, rate in rates.items():
            click.echo(f"  {task_key}: {rate:.2f}")
    if camp.records:
        report = cost_analysis(camp, n_dialogues=camp.config.n_dialogues_for_estimates,
                               wage_per_hour=camp.config.wage_per_hour)
        paid = sum(r.actual_paid for r in report.rows
                   if r.task in camp.schema.tasks)
        click.echo(f"paid so far: ${paid:.2f}")


@main.group()
def tokens():
    """Annotator token management."""


@tokens.command("mint")
@store_option
@click.option("--name", required=True, help="Annotator display name.")
@guarded
def tokens_mint(store, name):
    """Register an annotator and print their bearer token."""
    camp = Campaign.open(Path(store))
    annotator = camp.register_annotator(name)
    click.echo(f"annotator_id: {annotator.id}")
    click.echo(f"token: {annotator.token}")


@main.command("export")
@store_option
@click.option("--task", default=None, help="Restrict to one task key.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write JSON Lines here instead of stdout.")
@guarded
def export_cmd(store, task, out_path):
    """Export annotation records as sorted JSON Lines."""
    camp = Campaign.open(Path(store))
    if task is not None and task not in camp.schema.tasks:
        raise CampaignError(f"unknown task {task!r}")
    rows = camp.export_annotations(task_key=task)
    body = "".join(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n"
                   for row in rows)
    if out_path is None:
        click.echo(body, nl=False)
    else:
        out = Path(out_path)
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp = out.with_suffix(out.suffix + ".tmp")
        tmp.write_text(body, encoding="utf-8")
        tmp.replace(out)
        click.echo(f"wrote {len(rows)} records to {out_path}")


@main.command("analyze")
@store_option
@click.option("--report", "reports", multiple=True, default=("all",), show_default=True,
              type=click.Choice(["all", "agreement", "importance", "sensitivity",
                                 "stepwise", "cost", "power", "pass_rates"]))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=10_000, show_default=True,
              help="Bootstrap resample count.")
@click.option("--downsample", type=int, default=32, show_default=True)
@click.option("--beam-width", type=int, default=100, show_default=True)
@click.option("--n-dialogues", type=int, default=400, show_default=True)
@click.option("--wage", type=float, default=20.0, show_default=True)
@guarded
def analyze_cmd(store, reports, out_dir, seed, k, downsample, beam_width,
                n_dialogues, wage):
    """Run the validation analyses and write a report bundle."""
    camp = Campaign.open(Path(store))
    wanted = None if "all" in reports else list(reports)
    manifest = write_report_bundle(
        camp, Path(out_dir), seed=seed, reports=wanted, k=k,
        downsample=downsample, beam_width=beam_width,
        n_dialogues=n_dialogues, wage_per_hour=wage)
    click.echo(f"wrote {len(manifest['outputs'])} files to {out_dir}")
    for name, reason in sorted(manifest["skipped"].items()):
        click.echo(f"skipped {name}: {reason}")


@main.command("power")
@click.option("--d", "d_values", type=float, multiple=True,
              help="Cohen's d effect sizes for the two-sample t-test.")
@click.option("--f2", "f2_values", type=float, multiple=True,
              help="Cohen's f2 effect sizes for the regression F-test.")
@click.option("--n", "n_values", type=int, multiple=True, required=True,
              help="Sample size per group (t) or total (F).")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@guarded
def power_cmd(d_values, f2_values, n_values, alpha):
    """Statistical power for planned study sizes."""
    if not d_values and not f2_values:
        raise ValueError("provide at least one --d or --f2 effect size")
    for n in n_values:
        for d in d_values:
            click.echo(f"t-test  d={d:g} n={n} alpha={alpha:g}: "
                       f"power={power_t_test(d, n, alpha):.4f}")
        for f2 in f2_values:
            click.echo(f"F-test  f2={f2:g} n={n} alpha={alpha:g}: "
                       f"power={power_f_test(f2, n, 1, alpha):.4f}")


@main.command("serve")
@store_option
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--session-ttl", type=int, default=30 * 86400, show_default=True,
              help="Bearer token lifetime in seconds.")
@guarded
def serve_cmd(store, host, port, session_ttl):
    """Serve the campaign HTTP API."""
    import uvicorn

    from .api import create_app

    camp = Campaign.open(Path(store))
    app = create_app(camp, session_ttl_seconds=session_ttl)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
