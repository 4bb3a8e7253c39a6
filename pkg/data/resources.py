"""
Bundled reference data — keyword lexicon, domain reputation, confusables,
synonyms and neutral filler sentences.

All files are line-oriented text: `#` starts a comment, blank lines are skipped.
"""
import logging
import os
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, ConfigDict

from errors import FormatMismatch, IoFailure

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent

LEXICON_FILE = DATA_DIR / "lexicon.txt"
REPUTATION_FILE = DATA_DIR / "reputation.tsv"
CONFUSABLES_FILE = DATA_DIR / "confusables.tsv"
SYNONYMS_FILE = DATA_DIR / "synonyms.tsv"
NEUTRAL_SENTENCES_FILE = DATA_DIR / "neutral_sentences.txt"
REFERENCE_CORPUS_FILE = DATA_DIR / "reference_corpus.txt"


class Lexicon(BaseModel):
    model_config = ConfigDict(frozen=True)

    version: str = "unversioned"
    words: tuple[str, ...]


class Resources(BaseModel):
    """Everything the mock backend, features and generators read from disk."""
    model_config = ConfigDict(frozen=True)

    lexicon: Lexicon
    reputation: dict[str, float]
    confusables: dict[str, tuple[str, ...]]
    synonyms: dict[str, tuple[str, ...]]
    neutral_sentences: tuple[str, ...]


# ── Line readers ──────────────────────────────────────────────────────────────

def _read_lines(path) -> list[tuple[int, str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}", path=str(path))
    lines = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((number, line.rstrip("\n")))
    return lines


def _read_version(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.lower().startswith("# version:"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return "unversioned"


def _split_tab(path, number: int, line: str) -> tuple[str, str]:
    parts = line.split("\t")
    if len(parts) < 2 or not parts[0].strip():
        raise FormatMismatch(f"{path}:{number}: expected two tab-separated columns", path=str(path))
    return parts[0].strip(), parts[1].strip()


# ── Loaders ───────────────────────────────────────────────────────────────────

def load_lexicon(path=None) -> Lexicon:
    path = path or LEXICON_FILE
    words = []
    for _, line in _read_lines(path):
        word = line.strip().lower()
        if word not in words:
            words.append(word)
    if not words:
        raise FormatMismatch(f"lexicon {path} is empty", path=str(path))
    return Lexicon(version=_read_version(path), words=tuple(words))


def load_reputation(path=None) -> dict[str, float]:
    path = path or REPUTATION_FILE
    table = {}
    for number, line in _read_lines(path):
        domain, score = _split_tab(path, number, line)
        try:
            value = float(score)
        except ValueError:
            raise FormatMismatch(f"{path}:{number}: score {score!r} is not a number", path=str(path))
        table[domain.lower().lstrip(".")] = max(-1.0, min(1.0, value))
    return table


def load_confusables(path=None) -> dict[str, tuple[str, ...]]:
    """Map an ASCII letter to the codepoints that render like it."""
    path = path or CONFUSABLES_FILE
    table: dict[str, list[str]] = {}
    for number, line in _read_lines(path):
        source, replacement = _split_tab(path, number, line)
        table.setdefault(source, [])
        if replacement not in table[source]:
            table[source].append(replacement)
    return {k: tuple(v) for k, v in table.items()}


def load_synonyms(path=None) -> dict[str, tuple[str, ...]]:
    path = path or SYNONYMS_FILE
    table: dict[str, list[str]] = {}
    for number, line in _read_lines(path):
        key, replacement = _split_tab(path, number, line)
        table.setdefault(key.lower(), []).append(replacement)
    if not table:
        raise FormatMismatch(f"synonym table {path} is empty", path=str(path))
    return {k: tuple(v) for k, v in table.items()}


def load_neutral_sentences(path=None) -> tuple[str, ...]:
    path = path or NEUTRAL_SENTENCES_FILE
    return tuple(line.strip() for _, line in _read_lines(path))


def load_reference_corpus(path=None) -> list[str]:
    """One document per line; comments are not allowed in reference corpora."""
    path = path or REFERENCE_CORPUS_FILE
    try:
        text = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}", path=str(path))
    return [line.strip() for line in text.splitlines() if line.strip()]


@lru_cache(maxsize=8)
def _cached_resources(lexicon_path, reputation_path) -> Resources:
    return Resources(
        lexicon=load_lexicon(lexicon_path),
        reputation=load_reputation(reputation_path),
        confusables=load_confusables(),
        synonyms=load_synonyms(),
        neutral_sentences=load_neutral_sentences(),
    )


def load_resources(lexicon_path=None, reputation_path=None) -> Resources:
    lexicon_path = str(lexicon_path) if lexicon_path else None
    reputation_path = str(reputation_path) if reputation_path else None
    resources = _cached_resources(lexicon_path, reputation_path)
    logger.debug("Loaded lexicon %s (%d words), %d reputation entries",
                 resources.lexicon.version, len(resources.lexicon.words), len(resources.reputation))
    return resources


def default_output_root() -> Path:
    return Path(os.getenv("PHISHGUARD_OUTPUT_ROOT", "runs"))
