"""
`train` — fit the fusion policy with PPO on labeled corpora.
"""
import logging
from pathlib import Path

import click
from flask import Blueprint

from artifacts import write_jsonl
from commands.common import (
    build_config, command_errors, corpus_option, load_configured_corpora,
    protected_paths, record_run, run_options, setup_backend,
)
from errors import EmptyCorpus, PreconditionFailed
from fusion import load_checkpoint, train
from fusion.checkpoint import file_digest

logger = logging.getLogger(__name__)
bp = Blueprint("train", __name__, cli_group=None)


@bp.cli.command("train")
@corpus_option
@run_options
@click.option("--per-corpus/--pooled", default=None, help="One policy per corpus instead of a pooled one.")
@click.option("--resume", default=None, type=click.Path(dir_okay=False), help="Continue from a checkpoint.")
@click.option("--passes", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@command_errors("train")
def train_command(per_corpus, resume, passes, batch_size, learning_rate, **options):
    """Train the fusion policy and write checkpoints plus training.jsonl."""
    ppo = {k: v for k, v in (("passes", passes), ("batch_size", batch_size),
                             ("learning_rate", learning_rate)) if v is not None}
    cfg = build_config("train", per_corpus=per_corpus, ppo=ppo or None, **options)
    if cfg.fusion_mode.kind != "learned":
        raise PreconditionFailed(f"fusion mode {cfg.fusion_mode.describe()} has no parameters to train")

    corpora = load_configured_corpora(cfg)
    if not any(corpora.values()):
        raise EmptyCorpus("train needs at least one non-empty --corpus")
    checkpoint = load_checkpoint(resume) if resume else None
    if checkpoint and checkpoint.params.W1.shape[0] != cfg.ppo.hidden:
        raise PreconditionFailed(f"checkpoint hidden size {checkpoint.params.W1.shape[0]} "
                                 f"does not match ppo.hidden={cfg.ppo.hidden}")

    resources, backend = setup_backend(cfg)
    if cfg.per_corpus:
        groups = list(corpora.items())
    else:
        groups = [("policy", [raw for emails in corpora.values() for raw in emails])]

    run_dir = Path(cfg.output_dir)
    protected = protected_paths(cfg)
    checkpoint_dir = run_dir / "checkpoints"
    log_rows, refs = [], []
    for name, emails in groups:
        result, samples = train(
            emails, backend, cfg.ppo, resources=resources, threshold=cfg.threshold,
            enabled_roles=cfg.enabled_roles(), jobs=cfg.jobs, resume=checkpoint,
            checkpoint_dir=checkpoint_dir, checkpoint_name=name,
        )
        log_rows.extend({"policy": name, **entry} for entry in result.log)
        final = result.checkpoints[-1]
        refs.append({"policy": name, "path": str(final), "sha256": file_digest(final),
                     "batch_counter": result.batch_counter, "emails": len(samples)})
        click.echo(f"{name}: {len(samples)} emails, {result.batch_counter} batches → {final}")

    write_jsonl(run_dir / "training.jsonl", log_rows, run_dir=run_dir, protected=protected)
    record_run("train", cfg, checkpoints=refs)
    logger.info("Training finished: %s", ", ".join(r["path"] for r in refs))
