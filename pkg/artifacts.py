"""
Run-directory artifacts: JSON Lines writers and write-containment checks.

Lines carry no timestamps and keep input order so seeded runs are byte-identical.
"""
import json
import logging
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel

from errors import ContainmentViolation, IoFailure

logger = logging.getLogger(__name__)


def to_jsonable(value):
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    return value


def dumps_line(record) -> str:
    return json.dumps(to_jsonable(record), ensure_ascii=False, separators=(", ", ": "))


def ensure_contained(target, run_dir, protected: Iterable = ()) -> Path:
    """
    Resolve `target` and refuse it unless it sits inside `run_dir` and outside
    every protected input path (corpus files and directories).
    """
    target = Path(target).resolve()
    run_dir = Path(run_dir).resolve()
    if not target.is_relative_to(run_dir):
        raise ContainmentViolation(f"{target} is outside the run directory {run_dir}", path=str(target))
    for path in protected:
        guarded = Path(path).resolve()
        if target == guarded or (guarded.is_dir() and target.is_relative_to(guarded)):
            raise ContainmentViolation(f"{target} would write into corpus input {guarded}", path=str(target))
    return target


def write_jsonl(path, records: Iterable, run_dir=None, protected: Iterable = (), append: bool = False) -> Path:
    path = Path(path)
    if run_dir is not None:
        path = ensure_contained(path, run_dir, protected)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a" if append else "w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(dumps_line(record) + "\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}", path=str(path))
    return path


def read_jsonl(path) -> list[dict]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}", path=str(path))
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except ValueError as e:
            raise IoFailure(f"{path}:{number}: invalid JSON ({e})", path=str(path))
    return rows


def write_json(path, document, run_dir=None, protected: Iterable = ()) -> Path:
    path = Path(path)
    if run_dir is not None:
        path = ensure_contained(path, run_dir, protected)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(to_jsonable(document), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}", path=str(path))
    return path


def write_text(path, text: str, run_dir=None, protected: Iterable = ()) -> Path:
    path = Path(path)
    if run_dir is not None:
        path = ensure_contained(path, run_dir, protected)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}", path=str(path))
    return path
