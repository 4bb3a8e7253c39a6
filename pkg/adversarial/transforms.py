"""
Rule-based, label-preserving text transforms: synonym substitution, neutral
content insertion and homoglyph replacement.
"""
import math
import re
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from data import load_confusables
from errors import PreconditionFailed
from parsing.urls import URL_PATTERN, _split


class TransformKind(str, Enum):
    SYNONYM_SUB = "synonym_sub"
    SENTENCE_REWRITE = "sentence_rewrite"
    CONTENT_MOD = "content_mod"
    HOMOGLYPH = "homoglyph"
    POLYMORPHIC = "polymorphic"


RULE_KINDS = frozenset({TransformKind.SYNONYM_SUB, TransformKind.CONTENT_MOD, TransformKind.HOMOGLYPH})

# Application order for rule-based variants.
RULE_ORDER = (TransformKind.SYNONYM_SUB, TransformKind.CONTENT_MOD, TransformKind.HOMOGLYPH)

_DOMAIN = re.compile(r"(?<![\w@.-])((?:[a-z0-9-]+\.)+[a-z]{2,})(?![\w-])", re.IGNORECASE)


# ── Homoglyphs ────────────────────────────────────────────────────────────────

def _host_spans(text: str) -> list[tuple[int, int]]:
    spans = [m.span(1) for m in _DOMAIN.finditer(text)]
    for match in URL_PATTERN.finditer(text):
        host, _ = _split(match.group(0))
        if not host:
            continue
        offset = match.group(0).lower().find(host)
        if offset != -1:
            start = match.start() + offset
            spans.append((start, start + len(host)))
    return spans


def _brand_spans(text: str, brands: Sequence[str]) -> list[tuple[int, int]]:
    spans = []
    for brand in brands:
        for match in re.finditer(rf"(?<!\w){re.escape(brand)}(?!\w)", text, re.IGNORECASE):
            spans.append(match.span())
    return spans


def brand_tokens(reputation: Mapping[str, float], sender_host: str | None = None) -> tuple[str, ...]:
    """Registrable labels of allowlisted domains, plus the sender's own domain label."""
    brands = []
    hosts = [d for d, score in reputation.items() if score >= 1.0]
    if sender_host:
        hosts.append(sender_host)
    for host in hosts:
        labels = host.lower().strip(".").split(".")
        label = labels[-2] if len(labels) >= 2 else labels[0]
        if len(label) >= 3 and label not in brands:
            brands.append(label)
    return tuple(brands)


def homoglyph_replace(text: str, intensity: float, seed: int = 0,
                      confusables: Mapping[str, Sequence[str]] | None = None,
                      brands: Sequence[str] = ()) -> str:
    """
    Swap ⌈intensity · eligible⌉ Latin letters inside URL hosts, bare domains and
    brand tokens for confusable codepoints. Identity when nothing is eligible.
    """
    if not 0.0 < intensity <= 1.0:
        raise PreconditionFailed(f"intensity {intensity} outside (0, 1]")
    table = confusables if confusables is not None else load_confusables()

    positions = set()
    for start, end in _host_spans(text) + _brand_spans(text, brands):
        for i in range(start, end):
            if text[i] in table:
                positions.add(i)
    eligible = sorted(positions)
    if not eligible:
        return text

    count = math.ceil(intensity * len(eligible))
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(len(eligible), size=count, replace=False).tolist())
    chars = list(text)
    for idx in chosen:
        pos = eligible[idx]
        options = table[chars[pos]]
        chars[pos] = options[int(rng.integers(len(options)))]
    return "".join(chars)


# ── Synonyms ──────────────────────────────────────────────────────────────────

def _match_case(original: str, replacement: str) -> str:
    if original.isupper() and len(original) > 1:
        return replacement.upper()
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


def synonym_substitute(text: str, lexicon: Mapping[str, Sequence[str]], seed: int = 0) -> str:
    """Whole-word, case-preserving keyword replacement."""
    if not lexicon:
        raise PreconditionFailed("synonym lexicon is empty")
    table = {k.lower(): (v,) if isinstance(v, str) else tuple(v) for k, v in lexicon.items()}
    keys = sorted(table, key=len, reverse=True)
    pattern = re.compile(r"(?<!\w)(" + "|".join(re.escape(k) for k in keys) + r")(?!\w)", re.IGNORECASE)
    rng = np.random.default_rng(seed)

    def replace(match):
        options = table[match.group(1).lower()]
        choice = options[int(rng.integers(len(options)))] if len(options) > 1 else options[0]
        return _match_case(match.group(1), choice)

    return pattern.sub(replace, text)


# ── Content modification ──────────────────────────────────────────────────────

def insert_neutral_sentence(body: str, sentences: Sequence[str], seed: int = 0) -> str:
    """Insert one neutral sentence after the opening line (or at the top of a one-line body)."""
    if not sentences:
        raise PreconditionFailed("no neutral sentences available")
    rng = np.random.default_rng(seed)
    sentence = sentences[int(rng.integers(len(sentences)))]
    lines = body.split("\n")
    first = next((i for i, line in enumerate(lines) if line.strip()), None)
    if first is None:
        return sentence
    if len([l for l in lines if l.strip()]) == 1:
        return sentence + "\n\n" + body
    return "\n".join(lines[:first + 1] + ["", sentence] + lines[first + 1:])
