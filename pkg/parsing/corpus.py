"""
Corpus loaders for .eml directories, mbox files and CSV exports.
"""
import logging
import mailbox
import re
from email.message import EmailMessage
from enum import Enum
from pathlib import Path

import pandas as pd

from errors import FormatMismatch, IoFailure, PreconditionFailed
from parsing.models import Label, RawEmail

logger = logging.getLogger(__name__)

_MBOX_SEPARATOR = re.compile(rb"^From ", re.MULTILINE)


class CorpusFormat(str, Enum):
    EML_DIR = "eml_dir"
    MBOX = "mbox"
    CSV = "csv"


def _label_from_path(path: Path, root: Path) -> Label:
    for part in reversed((root.name,) + path.relative_to(root).parts[:-1]):
        try:
            label = Label.coerce(part)
        except PreconditionFailed:
            continue
        if label is not Label.UNLABELED:
            return label
    return Label.UNLABELED


def _load_eml_dir(path: Path, label: Label | None, name: str) -> list[RawEmail]:
    if not path.is_dir():
        raise FormatMismatch(f"{path} is not a directory of .eml files", path=str(path))
    files = sorted(p for p in path.rglob("*.eml") if p.is_file())
    emails = []
    for file in files:
        try:
            data = file.read_bytes()
        except OSError as e:
            raise IoFailure(f"cannot read {file}: {e}", path=str(file))
        emails.append(RawEmail(
            source_id=f"{name}:{file.relative_to(path).as_posix()}",
            data=data,
            corpus_label=label or _label_from_path(file, path),
            corpus=name,
        ))
    return emails


def _sidecar_labels(path: Path) -> list[Label] | None:
    sidecar = path.with_name(path.name + ".labels")
    if not sidecar.exists():
        return None
    lines = [l.strip() for l in sidecar.read_text(encoding="utf-8").splitlines()]
    return [Label.coerce(l) for l in lines if l and not l.startswith("#")]


def _load_mbox(path: Path, label: Label | None, name: str) -> list[RawEmail]:
    with open(path, "rb") as fh:
        head = fh.read()
    if not _MBOX_SEPARATOR.search(head):
        raise FormatMismatch(f"{path}: no 'From ' separator found", path=str(path))

    box = mailbox.mbox(str(path), create=False)
    try:
        messages = [m.as_bytes() for m in box]
    finally:
        box.close()

    sidecar = _sidecar_labels(path)
    if sidecar is not None and len(sidecar) != len(messages):
        raise FormatMismatch(
            f"{path}: {len(sidecar)} sidecar labels for {len(messages)} messages", path=str(path))

    emails = []
    for i, data in enumerate(messages):
        row_label = label or (sidecar[i] if sidecar else Label.UNLABELED)
        emails.append(RawEmail(source_id=f"{name}:{i}", data=data, corpus_label=row_label, corpus=name))
    return emails


def _load_csv(path: Path, label: Label | None, name: str, columns: dict) -> list[RawEmail]:
    body_col = columns.get("body", "body")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise FormatMismatch(f"{path}: not a readable CSV ({e})", path=str(path))
    if body_col not in frame.columns:
        raise FormatMismatch(f"{path}: missing body column {body_col!r}", path=str(path))

    subject_col = columns.get("subject", "subject")
    sender_col = columns.get("sender", "sender")
    label_col = columns.get("label", "label")

    emails = []
    for i, row in enumerate(frame.to_dict(orient="records")):
        msg = EmailMessage()
        if row.get(sender_col):
            msg["From"] = row[sender_col]
        msg["Subject"] = row.get(subject_col, "") or ""
        msg.set_content(row[body_col] or "")
        if label is not None:
            row_label = label
        elif label_col in frame.columns:
            row_label = Label.coerce(row[label_col])
        else:
            row_label = Label.UNLABELED
        emails.append(RawEmail(source_id=f"{name}:{i}", data=msg.as_bytes(),
                               corpus_label=row_label, corpus=name))
    return emails


def load_corpus(path, format: CorpusFormat | str, label: Label | str | None = None,
                name: str | None = None, columns: dict | None = None) -> list[RawEmail]:
    """
    Load one corpus. The label argument overrides anything inferred from directory
    names, mbox sidecar files (`<file>.labels`, one label per message) or CSV columns.
    """
    path = Path(path)
    if not path.exists():
        raise IoFailure(f"{path} does not exist", path=str(path))
    format = CorpusFormat(format)
    label = Label.coerce(label) if label is not None else None
    name = name or path.stem

    try:
        if format is CorpusFormat.EML_DIR:
            emails = _load_eml_dir(path, label, name)
        elif format is CorpusFormat.MBOX:
            emails = _load_mbox(path, label, name)
        else:
            emails = _load_csv(path, label, name, columns or {})
    except PermissionError as e:
        raise IoFailure(f"cannot read {path}: {e}", path=str(path))

    logger.info("Loaded %d emails from %s (%s)", len(emails), path, format.value)
    return emails
