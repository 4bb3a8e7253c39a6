"""
`quality` — score explanations against their references and write quality.jsonl.
"""
import logging
from pathlib import Path

import click
from flask import Blueprint

from artifacts import read_jsonl, write_jsonl
from commands.common import build_config, command_errors, protected_paths, record_run, run_options
from errors import MissingInput
from explain import QualityScorer

logger = logging.getLogger(__name__)
bp = Blueprint("quality", __name__, cli_group=None)


def quality_items(rows: list[dict]) -> list[tuple[str, str, str]]:
    """
    Accept {id, text, reference} rows, or classify results with an explanation,
    whose reference is the concatenated agent rationales.
    """
    items = []
    for number, row in enumerate(rows, start=1):
        item_id = str(row.get("id") or row.get("source_id") or number)
        text = row.get("text") or row.get("explanation")
        reference = row.get("reference")
        if reference is None and row.get("reports"):
            reference = " ".join(r.get("reasons", "") for r in row["reports"])
        if not text or not reference:
            raise MissingInput(f"row {item_id} needs an explanation and a reference", id=item_id)
        items.append((item_id, text, reference))
    return items


@bp.cli.command("quality")
@click.argument("explanations", type=click.Path(dir_okay=False))
@click.option("--topics", type=int, default=None)
@click.option("--top-k", type=int, default=None)
@click.option("--reference-corpus", default=None, type=click.Path(dir_okay=False),
              help="Plain-text corpus for the offline unigram language model.")
@run_options
@command_errors("quality")
def quality_command(explanations, topics, top_k, reference_corpus, **options):
    """Score EXPLANATIONS (JSONL) and write quality.jsonl with a summary line."""
    quality = {k: v for k, v in (("topics", topics), ("top_k", top_k),
                                 ("reference_corpus", reference_corpus)) if v is not None}
    cfg = build_config("quality", quality=quality or None, **options)
    items = quality_items(read_jsonl(explanations))

    rows, summary = QualityScorer(cfg.quality, seed=cfg.seed).score(items)
    run_dir = Path(cfg.output_dir)
    path = write_jsonl(run_dir / "quality.jsonl", [*rows, summary], run_dir=run_dir,
                       protected=protected_paths(cfg, [explanations]))
    record_run("quality", cfg)
    logger.info("Scored %d explanations → %s", summary.count, path)
    click.echo(" ".join(f"{name}={value:.4f}" for name, value in summary.means.items()))
