"""
Static email features consumed by the fusion policy.
"""
import re
from functools import lru_cache
from typing import Iterable

from data import Lexicon
from errors import PreconditionFailed
from parsing.models import EmailFeatures, ParsedEmail


@lru_cache(maxsize=32)
def _keyword_pattern(words: tuple[str, ...]) -> re.Pattern:
    alternatives = sorted((re.escape(w) for w in words if w), key=len, reverse=True)
    return re.compile(r"(?<!\w)(?:" + "|".join(alternatives) + r")(?!\w)", re.IGNORECASE)


def _words(lexicon) -> tuple[str, ...]:
    words = lexicon.words if isinstance(lexicon, Lexicon) else tuple(lexicon)
    words = tuple(w.strip().lower() for w in words if w and w.strip())
    if not words:
        raise PreconditionFailed("keyword lexicon is empty")
    return words


def count_keyword_hits(text: str, lexicon: Lexicon | Iterable[str]) -> int:
    """Total case-insensitive whole-word matches of lexicon entries."""
    return len(_keyword_pattern(_words(lexicon)).findall(text or ""))


def lookup_reputation(host: str | None, reputation: dict[str, float]) -> float:
    """Score for host or its nearest listed parent domain; 0 when unknown."""
    if not host:
        return 0.0
    labels = host.lower().strip(".").split(".")
    for i in range(len(labels) - 1):
        candidate = ".".join(labels[i:])
        if candidate in reputation:
            return max(-1.0, min(1.0, float(reputation[candidate])))
    return 0.0


def extract_features(parsed: ParsedEmail, lexicon: Lexicon | Iterable[str],
                     reputation: dict[str, float]) -> EmailFeatures:
    hits = count_keyword_hits(f"{parsed.subject}\n{parsed.body_text}", lexicon)
    return EmailFeatures(
        url_count=len(parsed.urls),
        keyword_hits=hits,
        domain_reputation=lookup_reputation(parsed.from_host, reputation),
        spf_code=parsed.auth.spf.code,
        dkim_code=parsed.auth.dkim.code,
        dmarc_code=parsed.auth.dmarc.code,
    )
