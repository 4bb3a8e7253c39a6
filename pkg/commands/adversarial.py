"""
`adversarial` — run the generate / detect / admit / retrain loop for N rounds.
"""
import logging
from pathlib import Path

import click
from flask import Blueprint

from adversarial import adversarial_loop
from artifacts import write_jsonl
from commands.common import (
    build_config, command_errors, corpus_option, load_configured_corpora,
    protected_paths, record_run, run_options, setup_backend,
)
from config import GeneratorKind
from errors import EmptyCorpus
from fusion import PolicyParams, load_checkpoint, save_checkpoint
from fusion.checkpoint import file_digest

logger = logging.getLogger(__name__)
bp = Blueprint("adversarial", __name__, cli_group=None)


@bp.cli.command("adversarial")
@corpus_option
@run_options
@click.option("--rounds", type=int, default=None, help="Adversarial rounds (default 2).")
@click.option("--generator", type=click.Choice([k.value for k in GeneratorKind]), default=None)
@click.option("--checkpoint", default=None, type=click.Path(dir_okay=False), help="Policy to attack and retrain.")
@command_errors("adversarial")
def adversarial_command(rounds, generator, checkpoint, **options):
    """Write round_k/ variants and feedback, rounds.jsonl and pool.jsonl."""
    adversarial = {k: v for k, v in (("rounds", rounds), ("generator", generator)) if v is not None}
    cfg = build_config("adversarial", adversarial=adversarial or None, **options)

    corpus = [raw for emails in load_configured_corpora(cfg).values() for raw in emails]
    if not corpus:
        raise EmptyCorpus("adversarial needs at least one non-empty --corpus")

    params = optimizer = None
    batch_counter = 0
    if cfg.fusion_mode.kind == "learned":
        if checkpoint:
            loaded = load_checkpoint(checkpoint)
            params, optimizer, batch_counter = loaded.params, loaded.optimizer, loaded.batch_counter
        else:
            logger.warning("No --checkpoint given: attacking an untrained policy (seed %d)", cfg.seed)
            params = PolicyParams.initialize(cfg.seed, cfg.ppo.hidden)

    resources, backend = setup_backend(cfg)
    run_dir = Path(cfg.output_dir)
    protected = protected_paths(cfg)
    result = adversarial_loop(corpus, backend, params, cfg.adversarial.rounds, cfg, resources, run_dir,
                              optimizer=optimizer, batch_counter=batch_counter, protected=protected)

    write_jsonl(run_dir / "rounds.jsonl", result.rounds, run_dir=run_dir, protected=protected)
    write_jsonl(run_dir / "pool.jsonl", [
        {"source_id": raw.source_id, "corpus": raw.corpus, "label": raw.corpus_label.value,
         "generated": raw.generated}
        for raw in result.pool
    ], run_dir=run_dir, protected=protected)

    refs = []
    if any(r.retrained for r in result.rounds):
        path = save_checkpoint(run_dir / "checkpoints" / "adversarial.json", result.params,
                               result.optimizer, cfg.ppo, result.batch_counter)
        refs.append({"path": str(path), "sha256": file_digest(path)})
    record_run("adversarial", cfg, checkpoints=refs)

    for report in result.rounds:
        click.echo(f"round {report.round}: evasion {report.evaded}/{report.generated} "
                   f"({report.evasion_rate:.3f}), admitted {report.admitted}, pool {report.pool_size}")
