"""
PhishGuard — multi-agent phishing detection
===========================================

This file is the orchestration layer only:
  - Creates the Flask app
  - Initialises extensions (run ledger DB)
  - Registers the CLI command blueprints
  - Creates the ledger tables on first start

All business logic lives in the dedicated modules:
  parsing/     — email parsing, URL / auth extraction, features, corpus loaders
  agent/       — prompts, verdict contract, per-role runner, parallel dispatch
  llm/         — chat backend resolution, remote client, mock backend
  fusion/      — weight fusion, Dirichlet policy, PPO, checkpoints, inference
  adversarial/ — variant transforms, generators and the adversarial loop
  explain/     — explanation simplifier and rationale quality metrics
  evaluation/  — classification metrics, McNemar tests, report tables
  commands/    — CLI blueprints (one file per command)
  models.py    — SQLAlchemy ledger models
  extensions.py — Shared db singleton

Usage: `python app.py classify mail.eml` or `flask --app app classify mail.eml`.
"""

import logging
import os

from dotenv import load_dotenv
from flask import Flask
from flask.cli import FlaskGroup

from commands import register_commands
from data import default_output_root
from extensions import db

load_dotenv()


# ── Logging ───────────────────────────────────────────────────────────────────

def _configure_logging():
    level_name = os.getenv("PHISHGUARD_LOG_LEVEL", "INFO").strip().upper()
    level = getattr(logging, level_name, logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


# ── App factory ───────────────────────────────────────────────────────────────

def create_app(test_config: dict | None = None) -> Flask:
    _configure_logging()
    app = Flask(__name__)
    if test_config is None:
        root = default_output_root().resolve()
        root.mkdir(parents=True, exist_ok=True)
        app.config["SQLALCHEMY_DATABASE_URI"] = os.getenv(
            "PHISHGUARD_LEDGER_URL", f"sqlite:///{root / 'ledger.db'}")
    else:
        app.config.update(test_config)
    app.config["SQLALCHEMY_TRACK_MODIFICATIONS"] = False

    db.init_app(app)
    register_commands(app)

    with app.app_context():
        db.create_all()

    return app


# ── Entry point ───────────────────────────────────────────────────────────────

cli = FlaskGroup(create_app=create_app, add_default_commands=False,
                 help="PhishGuard multi-agent phishing detector.")

if __name__ == "__main__":
    cli()
