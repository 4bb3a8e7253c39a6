"""
SQLAlchemy models for the PhishGuard run ledger.

Rows are inserted once and never updated: a RunRecord is written when a command
finishes (successfully or not) together with its DetectionRows.
"""
import uuid
from datetime import datetime, timezone

from extensions import db


class RunRecord(db.Model):
    __tablename__ = "run_record"
    id = db.Column(db.String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    command = db.Column(db.String(20), nullable=False)        # classify | train | eval | adversarial | quality
    config_hash = db.Column(db.String(64), nullable=False)
    config_snapshot = db.Column(db.Text, nullable=False)      # JSON
    output_dir = db.Column(db.String(500), nullable=False)
    exit_status = db.Column(db.Integer, default=0)
    error_code = db.Column(db.String(50))
    duration_ms = db.Column(db.Float, default=0.0)
    checkpoint_refs = db.Column(db.Text, default="[]")        # JSON list of {path, sha256}
    started_at = db.Column(db.DateTime, nullable=False)
    created_at = db.Column(db.DateTime, default=lambda: datetime.now(timezone.utc))
    detections = db.relationship("DetectionRow", backref="run", lazy=True,
                                 order_by="DetectionRow.position")


class DetectionRow(db.Model):
    __tablename__ = "detection_row"
    id = db.Column(db.String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    run_id = db.Column(db.String(36), db.ForeignKey("run_record.id"), nullable=False)
    position = db.Column(db.Integer, nullable=False)
    source_id = db.Column(db.String(500), nullable=False)
    label = db.Column(db.String(20), nullable=False)
    score = db.Column(db.Float, nullable=False)
    weights = db.Column(db.Text, nullable=False)              # JSON [text, url, metadata]
    config_hash = db.Column(db.String(64), nullable=False)
    created_at = db.Column(db.DateTime, default=lambda: datetime.now(timezone.utc))
