"""
Shared CLI plumbing — option decorators, config building, error records and the run ledger.
"""
import functools
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
from flask import g
from pydantic import ValidationError

from artifacts import dumps_line, write_jsonl
from config import CorpusSpec, FusionMode, RunConfig, load_run_config
from data import Resources, default_output_root, load_resources
from errors import IoFailure, PhishGuardError, PreconditionFailed
from extensions import db
from llm import resolve_backend_config
from llm.client import make_backend
from models import DetectionRow, RunRecord
from parsing import CorpusFormat, load_corpus
from parsing.models import RawEmail

logger = logging.getLogger(__name__)


# ── Options ───────────────────────────────────────────────────────────────────

def run_options(fn):
    """Flags every pipeline command shares. Unset flags leave the --config value alone."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="JSON RunConfig to start from."),
        click.option("--output-dir", default=None, help="Run directory for every artifact."),
        click.option("--backend", type=click.Choice(["mock", "remote_http", "remote-http"]), default=None),
        click.option("--model", default=None, help="Model name for the remote backend."),
        click.option("--threshold", type=float, default=None),
        click.option("--fusion", default=None, help="learned | static | static:a,b,c"),
        click.option("--seed", type=int, default=None),
        click.option("--jobs", type=int, default=None, help="Emails processed in parallel."),
        click.option("--ablate", multiple=True, type=click.Choice(["url", "metadata"]),
                     help="Disable a detection agent (repeatable)."),
        click.option("--lexicon", "lexicon_path", default=None, type=click.Path(dir_okay=False)),
        click.option("--reputation", "reputation_path", default=None, type=click.Path(dir_okay=False)),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def corpus_option(fn):
    return click.option(
        "--corpus", "corpora", multiple=True,
        help="path[:format[:label[:name]]], format one of eml_dir, mbox, csv (repeatable).",
    )(fn)


def build_config(command: str, *, config_path=None, output_dir=None, backend=None, model=None,
                 threshold=None, fusion=None, seed=None, jobs=None, ablate=(), lexicon_path=None,
                 reputation_path=None, corpora=(), **extra) -> RunConfig:
    """Load --config and lay the CLI flags over it."""
    overrides = dict(
        threshold=threshold,
        seed=seed,
        jobs=jobs,
        output_dir=output_dir,
        lexicon_path=lexicon_path,
        reputation_path=reputation_path,
        fusion_mode=FusionMode.parse(fusion) if fusion else None,
        ablate=list(ablate) if ablate else None,
        corpora=[CorpusSpec.parse(c).model_dump(mode="json") for c in corpora] if corpora else None,
        **extra,
    )
    cfg = load_run_config(config_path, **overrides)
    if seed is not None or "seed" not in cfg.ppo.model_fields_set:
        # the policy seed follows --seed unless the config file pins ppo.seed
        cfg = cfg.model_copy(update={"ppo": cfg.ppo.model_copy(update={"seed": cfg.seed})})
    if output_dir is None and not _config_sets_output(config_path):
        cfg = cfg.model_copy(update={"output_dir": str(default_output_root() / command)})
    g.output_dir = Path(cfg.output_dir)
    try:
        backend_cfg = resolve_backend_config(backend, model, cfg.backend)
    except ValidationError as e:
        raise PreconditionFailed(f"invalid backend configuration: {e.errors()[0]['msg']}")
    cfg = cfg.model_copy(update={"backend": backend_cfg})
    g.run_config = cfg
    logger.info("%s: config %s, backend=%s model=%s temperature=%s, output=%s",
                command, cfg.config_hash()[:12], cfg.backend.kind.value, cfg.backend.model_name,
                cfg.backend.temperature, cfg.output_dir)
    return cfg


def _config_sets_output(config_path) -> bool:
    if not config_path:
        return False
    try:
        return "output_dir" in json.loads(Path(config_path).read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return False


def setup_backend(cfg: RunConfig) -> tuple[Resources, object]:
    resources = load_resources(cfg.lexicon_path, cfg.reputation_path)
    return resources, make_backend(cfg.backend, resources)


# ── Inputs ────────────────────────────────────────────────────────────────────

def _load_single_eml(path: Path) -> RawEmail:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}", path=str(path))
    return RawEmail(source_id=path.name, data=data, corpus=path.parent.name)


def load_inputs(paths) -> list[RawEmail]:
    """Positional inputs: .eml files, .eml directories, .mbox files or .csv exports."""
    emails = []
    for raw_path in paths:
        path = Path(raw_path)
        if not path.exists():
            raise IoFailure(f"{path} does not exist", path=str(path))
        if path.is_dir():
            emails.extend(load_corpus(path, CorpusFormat.EML_DIR))
        elif path.suffix.lower() == ".mbox":
            emails.extend(load_corpus(path, CorpusFormat.MBOX))
        elif path.suffix.lower() == ".csv":
            emails.extend(load_corpus(path, CorpusFormat.CSV))
        else:
            emails.append(_load_single_eml(path))
    return emails


def load_configured_corpora(cfg: RunConfig) -> dict[str, list[RawEmail]]:
    """Corpus name → emails, in configuration order."""
    loaded = {}
    for spec in cfg.corpora:
        emails = load_corpus(spec.path, spec.format, spec.label, spec.name, spec.columns)
        name = emails[0].corpus if emails else (spec.name or Path(spec.path).stem)
        loaded.setdefault(name, []).extend(emails)
    return loaded


def protected_paths(cfg: RunConfig, extra=()) -> list[Path]:
    return [Path(spec.path) for spec in cfg.corpora] + [Path(p) for p in extra]


# ── Errors and ledger ─────────────────────────────────────────────────────────

def command_errors(command: str):
    """
    Turn a PhishGuardError into one JSON record on stderr and in errors.jsonl,
    record the failed run, and exit with the error's status.
    """
    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            g.started = time.perf_counter()
            g.started_at = datetime.now(timezone.utc)
            try:
                return fn(*args, **kwargs)
            except PhishGuardError as e:
                db.session.rollback()
                record = e.to_record()
                logger.error("%s aborted: %s", command, record["message"])
                click.echo(dumps_line(record), err=True)
                output_dir = g.get("output_dir") or Path(kwargs.get("output_dir") or default_output_root() / command)
                try:
                    write_jsonl(Path(output_dir) / "errors.jsonl", [record], append=True)
                except IoFailure as io_error:
                    logger.error("could not record the error: %s", io_error)
                if g.get("run_config") is not None:
                    record_run(command, g.run_config, exit_status=e.exit_status, error_code=e.code)
                sys.exit(e.exit_status)
        return wrapper
    return decorator


def record_run(command: str, cfg: RunConfig, *, exit_status: int = 0, error_code: str | None = None,
               checkpoints=(), detections=()) -> RunRecord:
    """Insert one RunRecord and its DetectionRows."""
    config_hash = cfg.config_hash()
    run = RunRecord(
        command=command,
        config_hash=config_hash,
        config_snapshot=json.dumps(cfg.snapshot(), sort_keys=True),
        output_dir=str(cfg.output_dir),
        exit_status=exit_status,
        error_code=error_code,
        duration_ms=(time.perf_counter() - g.get("started", time.perf_counter())) * 1000.0,
        checkpoint_refs=json.dumps(list(checkpoints)),
        started_at=g.get("started_at") or datetime.now(timezone.utc),
    )
    db.session.add(run)
    db.session.flush()
    for position, result in enumerate(detections):
        db.session.add(DetectionRow(
            run_id=run.id,
            position=position,
            source_id=result.source_id,
            label=result.label.value,
            score=result.score,
            weights=json.dumps(list(result.weights)),
            config_hash=config_hash,
        ))
    db.session.commit()
    logger.info("Ledger: %s run %s recorded (%d detections)", command, run.id, len(detections))
    return run
