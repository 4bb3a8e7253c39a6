"""
`classify` — parse → agents → fuse → classify → (optional) simplify → results.jsonl.

Exit status 1 means the run completed and at least one email was labeled phishing.
"""
import logging
import sys
from pathlib import Path

import click
from flask import Blueprint

from agent.verdict import DETECTION_ROLES
from artifacts import write_jsonl
from commands.common import (
    build_config, command_errors, corpus_option, load_configured_corpora, load_inputs,
    protected_paths, record_run, run_options, setup_backend,
)
from config import ExplainMode, RunConfig
from errors import MissingInput, PreconditionFailed
from explain import simplify
from fusion import DetectionResult, Detector, PolicyParams, load_checkpoint
from fusion.checkpoint import file_digest
from parsing import parse_eml
from parsing.models import Label, RawEmail

logger = logging.getLogger(__name__)
bp = Blueprint("classify", __name__, cli_group=None)


def load_policy(cfg: RunConfig, checkpoint) -> PolicyParams | None:
    """Policy for learned fusion: the checkpoint, or an untrained policy seeded from the config."""
    if cfg.fusion_mode.kind != "learned":
        return None
    if checkpoint:
        return load_checkpoint(checkpoint).params
    logger.warning("No --checkpoint given: learned fusion is running an untrained policy (seed %d)", cfg.seed)
    return PolicyParams.initialize(cfg.seed, cfg.ppo.hidden)


def result_row(result: DetectionResult, raw: RawEmail, config_hash: str, explanation=None) -> dict:
    row = {
        "source_id": result.source_id,
        "corpus": raw.corpus,
        "label": result.label.value,
        "score": result.score,
        "weights": dict(zip((r.value for r in DETECTION_ROLES), result.weights)),
        "reports": [
            {
                "report_id": report.report_id,
                "role": report.role.value,
                "verdict": report.verdict.verdict.value,
                "confidence": report.verdict.confidence,
                "reasons": report.verdict.reasons,
            }
            for report in result.reports
        ],
        "config_hash": config_hash,
    }
    if raw.corpus_label is not Label.UNLABELED:
        row["truth"] = raw.corpus_label.value
    if explanation is not None:
        row["explanation"] = explanation.text
        row["explain_mode"] = explanation.mode.value
    return row


def classify_emails(cfg: RunConfig, raws: list[RawEmail], checkpoint=None) -> tuple[list[DetectionResult], list[dict]]:
    if not raws:
        raise MissingInput("no emails to classify")
    if cfg.explain is not ExplainMode.NONE and cfg.ablate:
        raise PreconditionFailed("explanations need all three detection agents; drop --ablate or --explain")

    resources, backend = setup_backend(cfg)
    params = load_policy(cfg, checkpoint)
    detector = Detector(params, cfg.fusion_mode, cfg.threshold, cfg.enabled_roles())
    parsed = [parse_eml(raw) for raw in raws]
    results = detector.detect_many(parsed, backend, resources, cfg.jobs)

    config_hash = cfg.config_hash()
    rows = []
    for result, raw in zip(results, raws):
        explanation = None
        if cfg.explain is not ExplainMode.NONE:
            explanation = simplify(backend, list(result.reports), cfg.explain)
        rows.append(result_row(result, raw, config_hash, explanation))
    return results, rows


@bp.cli.command("classify")
@click.argument("inputs", nargs=-1, type=click.Path())
@corpus_option
@run_options
@click.option("--checkpoint", default=None, type=click.Path(dir_okay=False), help="Trained policy checkpoint.")
@click.option("--explain", type=click.Choice([m.value for m in ExplainMode]), default=None,
              help="Add a simplified explanation to each result.")
@click.option("--expert-mode", is_flag=True, help="Shorthand for --explain expert.")
@command_errors("classify")
def classify_command(inputs, checkpoint, explain, expert_mode, **options):
    """Classify emails and write results.jsonl."""
    if expert_mode:
        explain = ExplainMode.EXPERT.value
    cfg = build_config("classify", explain=explain, **options)

    raws = load_inputs(inputs)
    for emails in load_configured_corpora(cfg).values():
        raws.extend(emails)
    results, rows = classify_emails(cfg, raws, checkpoint)

    run_dir = Path(cfg.output_dir)
    path = write_jsonl(run_dir / "results.jsonl", rows, run_dir=run_dir,
                       protected=protected_paths(cfg, inputs))
    refs = [{"path": str(checkpoint), "sha256": file_digest(checkpoint)}] if checkpoint else []
    record_run("classify", cfg, checkpoints=refs, detections=results)

    flagged = sum(r.label is Label.PHISHING for r in results)
    logger.info("Classified %d emails, %d phishing; results in %s", len(results), flagged, path)
    click.echo(f"{len(results)} emails classified, {flagged} phishing → {path}")
    if flagged:
        sys.exit(1)
