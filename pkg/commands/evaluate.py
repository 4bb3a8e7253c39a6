"""
`eval` — metrics and McNemar comparisons from prediction files or a live run.
"""
import logging
from pathlib import Path

import click
from flask import Blueprint

from artifacts import write_json, write_jsonl, write_text
from commands.classify import classify_emails
from commands.common import (
    build_config, command_errors, corpus_option, load_configured_corpora,
    protected_paths, record_run, run_options,
)
from errors import MissingInput, PreconditionFailed
from evaluation import evaluate_run, load_predictions, render_report

logger = logging.getLogger(__name__)
bp = Blueprint("evaluate", __name__, cli_group=None)


def _parse_pair(text: str) -> tuple[str, str]:
    a, sep, b = text.partition(":")
    if not sep or not a or not b:
        raise PreconditionFailed(f"--compare expects SYSTEM_A:SYSTEM_B, got {text!r}")
    return a, b


@bp.cli.command("eval")
@click.option("--predictions", multiple=True, type=click.Path(dir_okay=False),
              help="Prediction JSONL {email_id, system, label, score} (repeatable).")
@click.option("--labels", "labels_path", default=None, type=click.Path(dir_okay=False),
              help="Ground truth JSONL {email_id, label, corpus}.")
@click.option("--compare", multiple=True, help="SYSTEM_A:SYSTEM_B comparison (repeatable).")
@click.option("--checkpoint", default=None, type=click.Path(dir_okay=False),
              help="Policy for a live run over --corpus.")
@corpus_option
@run_options
@command_errors("eval")
def eval_command(predictions, labels_path, compare, checkpoint, **options):
    """Write metrics.json and report.txt."""
    cfg = build_config("eval", **options)
    run_dir = Path(cfg.output_dir)
    protected = protected_paths(cfg, list(predictions) + ([labels_path] if labels_path else []))
    pairs = [_parse_pair(c) for c in compare] or None

    paths = list(predictions)
    if cfg.corpora:
        raws = [raw for emails in load_configured_corpora(cfg).values() for raw in emails]
        _, rows = classify_emails(cfg, raws, checkpoint)
        live = write_jsonl(run_dir / "results.jsonl", rows, run_dir=run_dir, protected=protected)
        paths.append(live)
    if not paths:
        raise MissingInput("eval needs --predictions files or --corpus inputs")

    predictions_set = load_predictions(paths, labels_path)
    report = evaluate_run(predictions_set.outputs, predictions_set.labels, predictions_set.groups, pairs)
    text = render_report(report)

    write_json(run_dir / "metrics.json", report, run_dir=run_dir, protected=protected)
    write_text(run_dir / "report.txt", text, run_dir=run_dir, protected=protected)
    record_run("eval", cfg)
    logger.info("Evaluated %d emails across %d systems", len(predictions_set.labels), len(report.systems))
    click.echo(text, nl=False)
